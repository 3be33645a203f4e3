//! Joint-angle processing: smoothing, cycle segmentation, phase
//! normalization, averaging and similarity metrics.

mod group;
mod interp;
mod segment;
mod trajectory;

pub use group::{
    average_cycles, group_average, range_of_motion, similarity_discrepancy, JointSimilarity, SimilarityTable,
};
pub use interp::{resample, time_normalize, Interpolation, NaturalSpline, NormalizedCycle};
pub use segment::{find_peaks, segment_cycles, CycleSet, SegmentConfig};
pub use trajectory::{ingest_kinematics_csv, smooth, smoothing_window, JointTrajectorySet};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KinConfig {
    /// Moving-mean window as a fraction of the trajectory length.
    pub smooth_window_frac: f64,
    /// Points on the 0-100% phase grid.
    pub ell: usize,
    pub interp: Interpolation,
    pub peak_prominence_deg: f64,
    /// Nominal repetition period in seconds.
    pub period_s: f64,
    /// Minimum boundary separation as a fraction of the period.
    pub min_separation_frac: f64,
    pub expected_cycles: usize,
}

impl Default for KinConfig {
    fn default() -> Self {
        Self {
            smooth_window_frac: 0.01,
            ell: 101,
            interp: Interpolation::Spline,
            peak_prominence_deg: 10.0,
            period_s: 4.0,
            min_separation_frac: 0.5,
            expected_cycles: 5,
        }
    }
}

impl KinConfig {
    pub fn validate(&self) -> crate::Result<()> {
        use crate::Error::InvalidParameter;
        if !(self.smooth_window_frac >= 0.0 && self.smooth_window_frac < 1.0) {
            return Err(InvalidParameter(format!("kin.smooth_window_frac {}", self.smooth_window_frac)));
        }
        if self.ell < 2 {
            return Err(InvalidParameter(format!("kin.ell {} < 2", self.ell)));
        }
        if !(self.peak_prominence_deg >= 0.0) {
            return Err(InvalidParameter(format!("kin.peak_prominence_deg {}", self.peak_prominence_deg)));
        }
        if !(self.period_s > 0.0) {
            return Err(InvalidParameter(format!("kin.period_s {}", self.period_s)));
        }
        if self.expected_cycles == 0 {
            return Err(InvalidParameter("kin.expected_cycles must be >= 1".into()));
        }
        Ok(())
    }

    pub fn segment_config(&self) -> SegmentConfig {
        SegmentConfig {
            prominence: self.peak_prominence_deg,
            period_s: self.period_s,
            min_separation_frac: self.min_separation_frac,
        }
    }
}
