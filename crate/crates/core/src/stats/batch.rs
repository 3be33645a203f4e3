use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{levene, shapiro_wilk, wilcoxon_signed_rank, PairedSample, PairedTestResult};
use crate::error::{Error, Result};

pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

/// All tests run on one paired metric. Tests that are undefined for the
/// data (all-zero differences, constant differences) are `None` with the
/// reason in `notes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedComparison {
    pub label: String,
    pub n_pairs: usize,
    pub wilcoxon: Option<PairedTestResult>,
    pub shapiro_differences: Option<PairedTestResult>,
    pub levene: Option<PairedTestResult>,
    pub notes: Vec<String>,
}

impl PairedComparison {
    pub fn significant(&self) -> bool {
        self.wilcoxon.as_ref().is_some_and(PairedTestResult::significant)
    }
}

fn keep(r: Result<PairedTestResult>, what: &str, notes: &mut Vec<String>) -> Result<Option<PairedTestResult>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e @ (Error::AllZeroDifferences | Error::ZeroVariance | Error::DegenerateGroups | Error::SizeOutOfRange { .. })) => {
            notes.push(format!("{what}: {e}"));
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

pub fn compare_paired(sample: &PairedSample) -> Result<PairedComparison> {
    let mut notes = Vec::new();
    let wilcoxon = keep(wilcoxon_signed_rank(sample), "wilcoxon", &mut notes)?;
    let shapiro_differences = keep(shapiro_wilk(&sample.differences()), "shapiro_wilk", &mut notes)?;
    let levene = keep(levene(&[sample.a.clone(), sample.b.clone()]), "levene", &mut notes)?;
    Ok(PairedComparison { label: sample.label.clone(), n_pairs: sample.a.len(), wilcoxon, shapiro_differences, levene, notes })
}

/// One line of the flat statistics table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub metric: String,
    pub statistic: f64,
    pub p: f64,
    pub method: String,
    pub significant: bool,
}

impl StatsRow {
    pub fn rows(c: &PairedComparison) -> Vec<StatsRow> {
        [&c.wilcoxon, &c.shapiro_differences, &c.levene]
            .into_iter()
            .flatten()
            .map(|r| StatsRow {
                metric: c.label.clone(),
                statistic: r.statistic,
                p: r.p_value,
                method: r.method.as_str().to_string(),
                significant: r.significant(),
            })
            .collect()
    }
}

pub fn write_stats_csv(path: &Path, rows: &[StatsRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Csv(format!("{}: {e}", path.display())))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
