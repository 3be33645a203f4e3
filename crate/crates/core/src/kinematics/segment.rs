use serde::{Deserialize, Serialize};

use super::interp::{time_normalize, Interpolation, NormalizedCycle};
use super::JointTrajectorySet;
use crate::domain::ELBOW_FLEX_EXT;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentConfig {
    pub prominence: f64,
    pub period_s: f64,
    pub min_separation_frac: f64,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        Self { prominence: 10.0, period_s: 4.0, min_separation_frac: 0.5 }
    }
}

/// Repetition boundaries found on the elbow angle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleSet {
    /// Sample indices of the boundaries; cycle k spans `boundaries[k]..=boundaries[k + 1]`.
    pub boundaries: Vec<usize>,
    pub sample_rate: f64,
    /// Phase of the deepest elbow flexion within each cycle, 0..1.
    pub flexion_phase: Vec<f64>,
    /// Cycles whose deepest flexion falls outside 40-60% of the cycle.
    pub phase_warnings: Vec<usize>,
}

impl CycleSet {
    pub fn n_cycles(&self) -> usize {
        self.boundaries.len().saturating_sub(1)
    }

    pub fn boundary_times(&self) -> Vec<f64> {
        self.boundaries.iter().map(|&b| b as f64 / self.sample_rate).collect()
    }

    /// Inclusive sample range of cycle `k`.
    pub fn span(&self, k: usize) -> (usize, usize) {
        (self.boundaries[k], self.boundaries[k + 1])
    }

    /// Phase-normalized copies of every cycle of `traj`.
    pub fn normalize(&self, traj: &JointTrajectorySet, ell: usize, method: Interpolation) -> Result<Vec<NormalizedCycle>> {
        (0..self.n_cycles())
            .map(|k| {
                let (a, b) = self.span(k);
                let seg = traj.angles.slice(ndarray::s![.., a..=b]);
                Ok(NormalizedCycle { phase_angles: time_normalize(seg, ell, method)?, cycle_index: k })
            })
            .collect()
    }
}

fn prominence_side(x: &[f64], height: f64, range: impl Iterator<Item = usize>) -> Option<f64> {
    let mut low: Option<f64> = None;
    for i in range {
        if x[i] > height {
            break;
        }
        low = Some(low.map_or(x[i], |l: f64| l.min(x[i])));
    }
    low
}

/// Local maxima with at least `min_prominence`.
///
/// Flat tops report their middle sample. An end sample counts as a
/// candidate when it is strictly above its neighbour; its prominence is
/// measured on the interior side only.
pub fn find_peaks(x: &[f64], min_prominence: f64) -> Vec<usize> {
    let n = x.len();
    let mut peaks = Vec::new();
    if n < 2 {
        return peaks;
    }
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && x[j + 1] == x[i] {
            j += 1;
        }
        let left_lower = i == 0 || x[i - 1] < x[i];
        let right_lower = j + 1 == n || x[j + 1] < x[i];
        let whole = i == 0 && j + 1 == n;
        if left_lower && right_lower && !whole {
            let h = x[i];
            let left = if i == 0 { None } else { prominence_side(x, h, (0..i).rev()) };
            let right = if j + 1 == n { None } else { prominence_side(x, h, j + 1..n) };
            let base = match (left, right) {
                (Some(l), Some(r)) => l.max(r),
                (Some(l), None) => l,
                (None, Some(r)) => r,
                (None, None) => h,
            };
            if h - base >= min_prominence {
                peaks.push((i + j) / 2);
            }
        }
        i = j + 1;
    }
    peaks
}

/// Splits a trial at the elbow-extension peaks.
pub fn segment_cycles(traj: &JointTrajectorySet, expected_cycles: usize, cfg: &SegmentConfig) -> Result<CycleSet> {
    let elbow = traj.joint_index(ELBOW_FLEX_EXT)?;
    let x = traj.angles.row(elbow).to_vec();
    let peaks = find_peaks(&x, cfg.prominence);
    let min_sep = cfg.min_separation_frac * cfg.period_s * traj.sample_rate;
    for p in peaks.windows(2) {
        if ((p[1] - p[0]) as f64) < min_sep {
            return Err(Error::PeaksTooClose { first: p[0], second: p[1], min_sep: min_sep.round() as usize });
        }
    }
    if peaks.len() < 2 {
        return Err(Error::NoCyclesDetected);
    }
    if peaks.len() - 1 != expected_cycles {
        return Err(Error::CycleCountMismatch { found: peaks.len() - 1, expected: expected_cycles });
    }
    let mut flexion_phase = Vec::with_capacity(expected_cycles);
    let mut phase_warnings = Vec::new();
    for (k, p) in peaks.windows(2).enumerate() {
        let seg = &x[p[0]..=p[1]];
        let lowest = (0..seg.len()).fold(0, |b, i| if seg[i] < seg[b] { i } else { b });
        let phase = lowest as f64 / (seg.len() - 1) as f64;
        if !(0.4..=0.6).contains(&phase) {
            phase_warnings.push(k);
        }
        flexion_phase.push(phase);
    }
    Ok(CycleSet { boundaries: peaks, sample_rate: traj.sample_rate, flexion_phase, phase_warnings })
}
