use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::domain::{check_unique, Condition};
use crate::error::{Error, Result};
use crate::io;
use crate::util::moving_mean;

/// Joint angles in degrees, rows = joints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointTrajectorySet {
    pub angles: Array2<f64>,
    pub sample_rate: f64,
    pub joint_labels: Vec<String>,
    pub condition: Condition,
    pub subject_id: String,
}

impl JointTrajectorySet {
    pub fn new(
        angles: Array2<f64>,
        sample_rate: f64,
        joint_labels: Vec<String>,
        condition: Condition,
        subject_id: impl Into<String>,
    ) -> Result<Self> {
        if !(sample_rate > 0.0) || !sample_rate.is_finite() {
            return Err(Error::InvalidParameter(format!("sample rate {sample_rate}")));
        }
        if angles.nrows() != joint_labels.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} rows but {} joint labels",
                angles.nrows(),
                joint_labels.len()
            )));
        }
        check_unique(&joint_labels)?;
        if let Some(((r, c), _)) = angles.indexed_iter().find(|(_, v)| !v.is_finite() || v.abs() > 360.0) {
            return Err(Error::NonFiniteSample { row: c, col: r + 1 });
        }
        Ok(Self { angles, sample_rate, joint_labels, condition, subject_id: subject_id.into() })
    }

    pub fn len(&self) -> usize {
        self.angles.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.ncols() == 0
    }

    pub fn joint_index(&self, label: &str) -> Result<usize> {
        self.joint_labels.iter().position(|l| l == label).ok_or_else(|| Error::MissingChannel(label.to_string()))
    }

    pub fn with_angles(&self, angles: Array2<f64>) -> Self {
        Self { angles, ..self.clone() }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        io::write_time_series(path, self.sample_rate, &self.joint_labels, &self.angles)
    }
}

pub fn ingest_kinematics_csv(
    path: &Path,
    expected_labels: &[String],
    expected_rate: Option<f64>,
    condition: Condition,
    subject_id: &str,
) -> Result<JointTrajectorySet> {
    check_unique(expected_labels)?;
    let table = io::read_time_series(path, expected_labels)?;
    let measured = io::sample_rate_from_time(&table.time)?;
    if let Some(expected) = expected_rate {
        if (measured - expected).abs() > 0.01 * expected {
            return Err(Error::SampleRateMismatch { expected, measured });
        }
    }
    let rate = expected_rate.unwrap_or(measured);
    JointTrajectorySet::new(table.values, rate, expected_labels.to_vec(), condition, subject_id)
}

/// Window for a trajectory of `len` samples: round(frac·len), made odd, at least 3.
pub fn smoothing_window(len: usize, frac: f64) -> usize {
    let w = ((frac * len as f64).round() as usize).max(3);
    if w % 2 == 0 {
        w + 1
    } else {
        w
    }
}

/// Centered moving mean on every joint.
pub fn smooth(traj: &JointTrajectorySet, frac: f64) -> Result<JointTrajectorySet> {
    let window = smoothing_window(traj.len(), frac);
    if traj.len() < window {
        return Err(Error::SegmentTooShort { len: traj.len(), min: window });
    }
    let mut out = traj.angles.clone();
    for (mut dst, src) in out.rows_mut().into_iter().zip(traj.angles.rows()) {
        let s = moving_mean(&src.to_vec(), window);
        dst.assign(&ndarray::ArrayView1::from(&s));
    }
    Ok(traj.with_angles(out))
}
