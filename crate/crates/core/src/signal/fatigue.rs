//! Fatigue indicators: RMS amplitude and median frequency per muscle.

use serde::{Deserialize, Serialize};

use super::{median_frequency, EmgRecording, PsdConfig};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::util::rms;

/// Which signal the fatigue metrics are computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricSource {
    #[default]
    Raw,
    Filtered,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FatigueConfig {
    pub source: MetricSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FatigueMetrics {
    pub rms_per_muscle: Vec<f64>,
    pub median_freq_per_muscle: Vec<f64>,
}

/// Percent change of the fatigue condition relative to the standard one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FatigueChange {
    pub rms_pct: Vec<f64>,
    pub median_freq_pct: Vec<f64>,
}

/// Root mean square of every channel.
pub fn rms_amplitude(rec: &EmgRecording) -> Result<Vec<f64>> {
    if rec.is_empty() {
        return Err(Error::EmptySignal);
    }
    Ok(rec.samples.rows().into_iter().map(|r| rms(r.as_slice().expect("row-major"))).collect())
}

pub fn fatigue_metrics(rec: &EmgRecording, psd: &PsdConfig, exec: Execution) -> Result<FatigueMetrics> {
    Ok(FatigueMetrics { rms_per_muscle: rms_amplitude(rec)?, median_freq_per_muscle: median_frequency(rec, psd, exec)? })
}

fn pct_change(reference: &[f64], other: &[f64]) -> Result<Vec<f64>> {
    reference
        .iter()
        .zip(other)
        .enumerate()
        .map(|(i, (&r, &o))| if r == 0.0 { Err(Error::ZeroReference { index: i }) } else { Ok(100.0 * (o - r) / r) })
        .collect()
}

pub fn fatigue_comparison(standard: &FatigueMetrics, fatigue: &FatigueMetrics) -> Result<FatigueChange> {
    if standard.rms_per_muscle.len() != fatigue.rms_per_muscle.len()
        || standard.median_freq_per_muscle.len() != fatigue.median_freq_per_muscle.len()
    {
        return Err(Error::ShapeMismatch("fatigue metrics cover different muscle counts".into()));
    }
    Ok(FatigueChange {
        rms_pct: pct_change(&standard.rms_per_muscle, &fatigue.rms_per_muscle)?,
        median_freq_pct: pct_change(&standard.median_freq_per_muscle, &fatigue.median_freq_per_muscle)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Condition;
    use ndarray::Array2;
    use std::f64::consts::PI;

    fn rec(row: Vec<f64>) -> EmgRecording {
        let n = row.len();
        EmgRecording::new(Array2::from_shape_vec((1, n), row).unwrap(), 1000.0, vec!["m".into()], Condition::Standard, "s")
            .unwrap()
    }

    #[test]
    fn rms_examples() {
        assert_eq!(rms_amplitude(&rec(vec![3.0; 10])).unwrap(), vec![3.0]);
        let s: Vec<f64> = (0..1000).map(|i| 2.0 * (2.0 * PI * 5.0 * i as f64 / 1000.0).sin()).collect();
        assert!((rms_amplitude(&rec(s)).unwrap()[0] - 2f64.sqrt()).abs() < 1e-3);
        assert!((rms_amplitude(&rec(vec![3.0, -4.0])).unwrap()[0] - 12.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn empty_signal_rejected() {
        let r = EmgRecording::new(Array2::zeros((1, 0)), 1000.0, vec!["m".into()], Condition::Standard, "s").unwrap();
        assert!(matches!(rms_amplitude(&r), Err(Error::EmptySignal)));
    }

    fn metrics(rms: f64, mf: f64) -> FatigueMetrics {
        FatigueMetrics { rms_per_muscle: vec![rms], median_freq_per_muscle: vec![mf] }
    }

    #[test]
    fn comparison_examples() {
        let c = fatigue_comparison(&metrics(1.0, 100.0), &metrics(2.272, 92.99)).unwrap();
        assert!((c.rms_pct[0] - 127.2).abs() < 1e-9);
        assert!((c.median_freq_pct[0] + 7.01).abs() < 1e-9);
        let same = fatigue_comparison(&metrics(1.3, 55.0), &metrics(1.3, 55.0)).unwrap();
        assert_eq!(same.rms_pct, vec![0.0]);
        assert_eq!(same.median_freq_pct, vec![0.0]);
    }

    #[test]
    fn zero_reference_rejected() {
        assert!(matches!(
            fatigue_comparison(&metrics(0.0, 50.0), &metrics(1.0, 50.0)),
            Err(Error::ZeroReference { index: 0 })
        ));
    }
}
