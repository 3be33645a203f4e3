use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::domain::{check_unique, Condition};
use crate::error::{Error, Result};
use crate::io;

/// Multichannel raw sEMG, rows = muscles, columns = samples (mV).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmgRecording {
    pub samples: Array2<f64>,
    pub sample_rate: f64,
    pub muscle_labels: Vec<String>,
    pub condition: Condition,
    pub subject_id: String,
}

impl EmgRecording {
    pub fn new(
        samples: Array2<f64>,
        sample_rate: f64,
        muscle_labels: Vec<String>,
        condition: Condition,
        subject_id: impl Into<String>,
    ) -> Result<Self> {
        if !(sample_rate > 0.0) || !sample_rate.is_finite() {
            return Err(Error::InvalidParameter(format!("sample rate {sample_rate}")));
        }
        if samples.nrows() != muscle_labels.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} rows but {} labels",
                samples.nrows(),
                muscle_labels.len()
            )));
        }
        check_unique(&muscle_labels)?;
        if let Some(((row, col), _)) = samples.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteSample { row: col, col: row + 1 });
        }
        Ok(Self { samples, sample_rate, muscle_labels, condition, subject_id: subject_id.into() })
    }

    pub fn n_muscles(&self) -> usize {
        self.samples.nrows()
    }

    pub fn len(&self) -> usize {
        self.samples.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.ncols() == 0
    }

    pub fn nyquist(&self) -> f64 {
        self.sample_rate / 2.0
    }

    pub fn channel(&self, i: usize) -> Vec<f64> {
        self.samples.row(i).to_vec()
    }

    pub fn with_samples(&self, samples: Array2<f64>) -> Self {
        Self { samples, ..self.clone() }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        io::write_time_series(path, self.sample_rate, &self.muscle_labels, &self.samples)
    }
}

/// Reads an sEMG CSV (`time_s` then one column per muscle) into a recording
/// whose channel order follows `expected_labels`.
///
/// When `expected_rate` is given, the measured rate must agree within 1%.
pub fn ingest_emg_csv(
    path: &Path,
    expected_labels: &[String],
    expected_rate: Option<f64>,
    condition: Condition,
    subject_id: &str,
) -> Result<EmgRecording> {
    check_unique(expected_labels)?;
    let table = io::read_time_series(path, expected_labels)?;
    let measured = io::sample_rate_from_time(&table.time)?;
    if let Some(expected) = expected_rate {
        if (measured - expected).abs() > 0.01 * expected {
            return Err(Error::SampleRateMismatch { expected, measured });
        }
    }
    let rate = expected_rate.unwrap_or(measured);
    EmgRecording::new(table.values, rate, expected_labels.to_vec(), condition, subject_id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::muscle_labels;
    use std::io::Write;

    fn write_file(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        std::fs::File::create(&p).unwrap().write_all(body.as_bytes()).unwrap();
        p
    }

    fn shuffled_file(n: usize, nan_at: Option<(usize, &str)>) -> String {
        let order = ["PD", "UT", "BIC", "FCR", "TRI", "AD", "BRA", "FCU"];
        let mut s = String::from("time_s");
        for l in order {
            s.push(',');
            s.push_str(l);
        }
        s.push('\n');
        for t in 0..n {
            s.push_str(&format!("{}", t as f64 / 1000.0));
            for l in order {
                let base = muscle_labels().iter().position(|m| m == l).unwrap() as f64;
                if nan_at == Some((t, l)) {
                    s.push_str(",NaN");
                } else {
                    s.push_str(&format!(",{}", base * 100.0 + t as f64));
                }
            }
            s.push('\n');
        }
        s
    }

    #[test]
    fn shuffled_columns_come_back_in_canonical_order() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_file(&dir, "emg.csv", &shuffled_file(50, None));
        let rec = ingest_emg_csv(&p, &muscle_labels(), Some(1000.0), Condition::Standard, "s1").unwrap();
        assert_eq!(rec.muscle_labels, muscle_labels());
        for (i, _) in muscle_labels().iter().enumerate() {
            assert_eq!(rec.samples[[i, 7]], i as f64 * 100.0 + 7.0);
        }
        assert!((rec.sample_rate - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn missing_channel_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let body = shuffled_file(10, None).replace(",UT", ",XX");
        let p = write_file(&dir, "emg.csv", &body);
        let err = ingest_emg_csv(&p, &muscle_labels(), None, Condition::Standard, "s1").unwrap_err();
        assert!(matches!(err, Error::MissingChannel(ref c) if c == "UT"), "{err}");
    }

    #[test]
    fn nan_cell_is_reported_with_position() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_file(&dir, "emg.csv", &shuffled_file(10, Some((4, "UT"))));
        let err = ingest_emg_csv(&p, &muscle_labels(), None, Condition::Standard, "s1").unwrap_err();
        // UT is the second data column in the shuffled file
        assert!(matches!(err, Error::NonFiniteSample { row: 4, col: 2 }), "{err}");
    }

    #[test]
    fn non_monotonic_time_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_file(&dir, "emg.csv", "time_s,A\n0.0,1\n0.001,2\n0.001,3\n");
        let err = ingest_emg_csv(&p, &["A".to_string()], None, Condition::Standard, "s").unwrap_err();
        assert!(matches!(err, Error::NonMonotonicTime { row: 2 }));
    }

    #[test]
    fn rate_mismatch_and_jitter_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_file(&dir, "emg.csv", "time_s,A\n0.0,1\n0.001,2\n0.002,3\n0.003,4\n");
        let err = ingest_emg_csv(&p, &["A".to_string()], Some(500.0), Condition::Standard, "s").unwrap_err();
        assert!(matches!(err, Error::SampleRateMismatch { .. }));
        let p = write_file(&dir, "j.csv", "time_s,A\n0.0,1\n0.001,2\n0.0025,3\n0.003,4\n");
        let err = ingest_emg_csv(&p, &["A".to_string()], None, Condition::Standard, "s").unwrap_err();
        assert!(matches!(err, Error::SampleRateJitter { .. }));
    }
}
