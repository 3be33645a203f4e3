use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use super::{PairedTestResult, TestMethod};
use crate::error::{Error, Result};

/// Mean-centered Levene test for equal variances.
pub fn levene(groups: &[Vec<f64>]) -> Result<PairedTestResult> {
    let k = groups.len();
    if k < 2 || groups.iter().any(|g| g.len() < 2) {
        return Err(Error::DegenerateGroups);
    }
    let z: Vec<Vec<f64>> = groups
        .iter()
        .map(|g| {
            let m = g.iter().sum::<f64>() / g.len() as f64;
            g.iter().map(|v| (v - m).abs()).collect()
        })
        .collect();
    let n_total: usize = groups.iter().map(Vec::len).sum();
    let zbar_i: Vec<f64> = z.iter().map(|g| g.iter().sum::<f64>() / g.len() as f64).collect();
    let zbar = z.iter().flatten().sum::<f64>() / n_total as f64;
    let between: f64 = z.iter().zip(&zbar_i).map(|(g, &zi)| g.len() as f64 * (zi - zbar).powi(2)).sum();
    let within: f64 = z.iter().zip(&zbar_i).map(|(g, &zi)| g.iter().map(|v| (v - zi).powi(2)).sum::<f64>()).sum();
    let df1 = (k - 1) as f64;
    let df2 = (n_total - k) as f64;
    if !(within > 0.0) {
        if between == 0.0 {
            return Ok(PairedTestResult { statistic: 0.0, p_value: 1.0, method: TestMethod::Levene, n_effective: n_total });
        }
        return Err(Error::DegenerateGroups);
    }
    let statistic = df2 / df1 * between / within;
    let f = FisherSnedecor::new(df1, df2).map_err(|_| Error::DegenerateGroups)?;
    let p_value = f.sf(statistic).clamp(0.0, 1.0);
    Ok(PairedTestResult { statistic, p_value, method: TestMethod::Levene, n_effective: n_total })
}
