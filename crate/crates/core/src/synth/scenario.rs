use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::shapes::{bump, grid, periodic_gauss, scale_to_rms, smoothstep};
use crate::domain::{joint_labels, muscle_labels, Condition};
use crate::error::{Error, Result};

/// Target per-joint spread of subjects around the group mean (mean and
/// sample sd of the per-subject mean absolute deviation, degrees).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpreadTarget {
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSpec {
    pub condition: Condition,
    /// m×n, unit-norm columns.
    pub planted_w: Vec<Vec<f64>>,
    /// n×ℓ activation profiles over one cycle.
    pub activation_templates: Vec<Vec<f64>>,
    /// Per-muscle amplitude multipliers.
    pub rms_scale: Vec<f64>,
    /// Per-muscle median-frequency offsets in Hz.
    pub median_freq_shift_hz: Vec<f64>,
    /// j×ℓ joint-angle profiles over one cycle, degrees.
    pub kinematics_templates: Vec<Vec<f64>>,
    pub kinematic_spread: Vec<SpreadTarget>,
}

impl ConditionSpec {
    pub fn n_synergies(&self) -> usize {
        self.activation_templates.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubjectVariability {
    /// Log-sd of the per-subject EMG gain.
    pub gain_log_sd: f64,
    /// Log-sd of the multiplicative jitter on each synergy weight.
    pub w_log_sd: f64,
    /// Log-sd of the per-synergy activation amplitude.
    pub activation_log_sd: f64,
    /// Amplitude of the slow per-subject kinematic ripple, degrees.
    pub kin_ripple_deg: f64,
    /// White measurement noise on joint angles, degrees.
    pub kin_noise_deg: f64,
    /// Scales the planted kinematic offsets; 0 gives identical subjects.
    pub kin_offset_scale: f64,
}

impl SubjectVariability {
    pub fn none() -> Self {
        Self {
            gain_log_sd: 0.0,
            w_log_sd: 0.0,
            activation_log_sd: 0.0,
            kin_ripple_deg: 0.0,
            kin_noise_deg: 0.0,
            kin_offset_scale: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub n_subjects: usize,
    pub cycles_per_trial: usize,
    pub cycle_period_s: f64,
    /// Uniform relative jitter of each repetition's period.
    pub period_jitter: f64,
    /// Extra signal before the first and after the last boundary.
    pub margin_s: f64,
    pub emg_rate: f64,
    pub kin_rate: f64,
    pub carrier_low_hz: f64,
    pub carrier_high_hz: f64,
    pub muscle_labels: Vec<String>,
    pub joint_labels: Vec<String>,
    pub conditions: Vec<ConditionSpec>,
    /// Signal-to-noise ratio of the additive EMG noise; `None` is noiseless.
    pub snr_db: Option<f64>,
    pub variability: SubjectVariability,
    pub seed: u64,
}

/// Repetition timing of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct Timeline {
    /// Start time of every cycle plus the end of the last one, seconds.
    pub boundaries: Vec<f64>,
    pub duration: f64,
}

impl Timeline {
    /// Phase in cycles at time `t`; the margins continue the neighbouring cycle.
    pub fn phase(&self, t: f64) -> f64 {
        let b = &self.boundaries;
        let k = b.len() - 1;
        if t < b[0] {
            return ((t - b[0]) / (b[1] - b[0])).rem_euclid(1.0);
        }
        if t >= b[k] {
            return ((t - b[k]) / (b[k] - b[k - 1])).rem_euclid(1.0);
        }
        let i = b.partition_point(|&x| x <= t) - 1;
        (t - b[i]) / (b[i + 1] - b[i])
    }
}

pub(crate) mod purpose {
    pub const TIMING: u64 = 1;
    pub const GAIN: u64 = 2;
    pub const WEIGHTS: u64 = 3;
    pub const ACTIVATION: u64 = 4;
    pub const CARRIER: u64 = 5;
    pub const NOISE: u64 = 6;
    pub const KIN_RIPPLE: u64 = 7;
    pub const KIN_NOISE: u64 = 8;
    pub const KIN_ASSIGN: u64 = 9;
}

impl ScenarioSpec {
    pub fn n_muscles(&self) -> usize {
        self.muscle_labels.len()
    }

    pub fn n_joints(&self) -> usize {
        self.joint_labels.len()
    }

    pub fn subject_id(k: usize) -> String {
        format!("subject_{:02}", k + 1)
    }

    pub fn condition(&self, c: Condition) -> Result<&ConditionSpec> {
        self.conditions
            .iter()
            .find(|s| s.condition == c)
            .ok_or_else(|| Error::InvalidScenario(format!("no {c} condition in scenario")))
    }

    pub fn condition_mut(&mut self, c: Condition) -> Result<&mut ConditionSpec> {
        self.conditions
            .iter_mut()
            .find(|s| s.condition == c)
            .ok_or_else(|| Error::InvalidScenario(format!("no {c} condition in scenario")))
    }

    pub(crate) fn rng(&self, subject: usize, condition: Condition, what: u64, channel: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let cond = Condition::ALL.iter().position(|&c| c == condition).unwrap_or(0) as u64;
        rng.set_stream((((subject as u64 * 4 + cond) * 16 + what) << 8) + channel as u64);
        rng
    }

    pub fn timeline(&self, subject: usize, condition: Condition) -> Timeline {
        let mut rng = self.rng(subject, condition, purpose::TIMING, 0);
        let mut boundaries = vec![self.margin_s];
        for _ in 0..self.cycles_per_trial {
            let jitter = if self.period_jitter > 0.0 { rng.random_range(-self.period_jitter..self.period_jitter) } else { 0.0 };
            let last = *boundaries.last().unwrap();
            boundaries.push(last + self.cycle_period_s * (1.0 + jitter));
        }
        let duration = boundaries.last().unwrap() + self.margin_s;
        Timeline { boundaries, duration }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        if self.n_subjects == 0 || self.cycles_per_trial == 0 {
            return bad("need at least one subject and one cycle".into());
        }
        if !(self.cycle_period_s > 0.0) || !(self.emg_rate > 0.0) || !(self.kin_rate > 0.0) {
            return bad("period and sample rates must be positive".into());
        }
        if !(0.0..0.5).contains(&self.period_jitter) || !(self.margin_s >= 0.0) {
            return bad("period_jitter must lie in [0, 0.5) and margin_s must be >= 0".into());
        }
        if let Some(snr) = self.snr_db {
            if !(snr > 0.0) {
                return bad(format!("snr_db {snr} must be positive"));
            }
        }
        if !(self.carrier_low_hz > 0.0 && self.carrier_low_hz < self.carrier_high_hz && self.carrier_high_hz < self.emg_rate / 2.0) {
            return bad("carrier band must satisfy 0 < low < high < emg_rate/2".into());
        }
        if self.conditions.is_empty() {
            return bad("no conditions".into());
        }
        let (m, j) = (self.n_muscles(), self.n_joints());
        for c in &self.conditions {
            let n = c.n_synergies();
            if n == 0 || c.planted_w.len() != m || c.planted_w.iter().any(|r| r.len() != n) {
                return bad(format!("{}: planted_w must be {m}x{n}", c.condition));
            }
            for k in 0..n {
                let norm: f64 = c.planted_w.iter().map(|r| r[k] * r[k]).sum::<f64>().sqrt();
                if (norm - 1.0).abs() > 1e-6 {
                    return bad(format!("{}: planted_w column {k} has norm {norm}", c.condition));
                }
            }
            if c.planted_w.iter().flatten().chain(c.activation_templates.iter().flatten()).any(|&v| !(v >= 0.0)) {
                return bad(format!("{}: weights and activations must be non-negative", c.condition));
            }
            let ell = c.activation_templates[0].len();
            if ell < 2 || c.activation_templates.iter().any(|r| r.len() != ell) {
                return bad(format!("{}: ragged activation templates", c.condition));
            }
            if c.rms_scale.len() != m || c.rms_scale.iter().any(|&v| !(v >= 0.0)) {
                return bad(format!("{}: rms_scale needs {m} non-negative entries", c.condition));
            }
            if c.median_freq_shift_hz.len() != m {
                return bad(format!("{}: median_freq_shift_hz needs {m} entries", c.condition));
            }
            for &d in &c.median_freq_shift_hz {
                let hi = self.carrier_high_hz + 2.0 * d;
                if !(hi > self.carrier_low_hz + 1.0 && hi < self.emg_rate / 2.0) {
                    return bad(format!("{}: median shift {d} Hz collapses the carrier band", c.condition));
                }
            }
            if c.kinematics_templates.len() != j || c.kinematics_templates.iter().any(|r| r.len() < 2) {
                return bad(format!("{}: kinematics_templates must have {j} rows", c.condition));
            }
            if c.kinematic_spread.len() != j || c.kinematic_spread.iter().any(|s| !(s.mean >= 0.0 && s.sd >= 0.0)) {
                return bad(format!("{}: kinematic_spread needs {j} non-negative targets", c.condition));
            }
        }
        Ok(())
    }
}

const ELL: usize = 101;

/// Column from the stated entries; the rest share the remaining norm in
/// the given proportions.
fn fill_column(stated: &[(usize, f64)], rest: &[(usize, f64)]) -> Vec<f64> {
    let mut col = vec![0.0; 8];
    let used: f64 = stated.iter().map(|(_, v)| v * v).sum();
    for &(i, v) in stated {
        col[i] = v;
    }
    let weight: f64 = rest.iter().map(|(_, p)| p * p).sum();
    let k = ((1.0 - used).max(0.0) / weight).sqrt();
    for &(i, p) in rest {
        col[i] = k * p;
    }
    col
}

// muscle indices in canonical order
const BIC: usize = 0;
const BRA: usize = 1;
const UT: usize = 2;
const TRI: usize = 3;
const FCU: usize = 4;
const FCR: usize = 5;
const AD: usize = 6;
const PD: usize = 7;

fn columns_to_rows(cols: [Vec<f64>; 2]) -> Vec<Vec<f64>> {
    (0..8).map(|i| vec![cols[0][i], cols[1][i]]).collect()
}

fn synergy_weights(condition: Condition) -> Vec<Vec<f64>> {
    let (bic, tri) = match condition {
        Condition::WeightFree => (0.86, 0.0625),
        Condition::Standard => (0.80, 0.0456),
        Condition::Fatigue => (0.78, 0.0456),
    };
    let one = fill_column(
        &[(BIC, bic), (TRI, tri), (UT, 0.02), (PD, 0.02)],
        &[(BRA, 1.0), (FCU, 0.4), (FCR, 0.4), (AD, 0.35)],
    );
    let two = match condition {
        Condition::WeightFree => fill_column(
            &[(UT, 0.199), (AD, 0.333), (FCR, 0.362), (BRA, 0.275), (BIC, 0.05), (FCU, 0.15)],
            &[(TRI, 1.0), (PD, 1.0)],
        ),
        Condition::Standard => fill_column(
            &[(UT, 0.112), (AD, 0.138), (FCR, 0.466), (BRA, 0.481), (FCU, 0.143), (BIC, 0.05)],
            &[(TRI, 1.0), (PD, 1.0)],
        ),
        Condition::Fatigue => fill_column(
            &[(UT, 0.182), (AD, 0.183), (FCR, 0.447), (FCU, 0.0906), (BIC, 0.05), (BRA, 0.45)],
            &[(TRI, 1.0), (PD, 1.0)],
        ),
    };
    columns_to_rows([one, two])
}

fn activations(condition: Condition) -> Vec<Vec<f64>> {
    let (mut one, mut two, r1, r2) = match condition {
        Condition::WeightFree => (
            grid(ELL, |p| 0.3 + periodic_gauss(p, 0.2, 0.08)),
            grid(ELL, |p| 0.3 + periodic_gauss(p, 0.65, 0.08)),
            0.19,
            0.19,
        ),
        Condition::Standard => (
            grid(ELL, |p| 0.12 + 0.88 * smoothstep(p, 0.0, 0.08) * (1.0 - smoothstep(p, 0.42, 0.55))),
            grid(ELL, |p| 0.05 + smoothstep(p, 0.3, 0.5) * (1.0 - smoothstep(p, 0.8, 0.95))),
            0.86,
            0.88,
        ),
        Condition::Fatigue => (
            grid(ELL, |p| 0.1 + periodic_gauss(p, 0.1, 0.09) + 0.5 * periodic_gauss(p, 0.7, 0.09)),
            grid(ELL, |p| 0.1 + periodic_gauss(p, 0.3, 0.09) + 0.5 * periodic_gauss(p, 0.9, 0.07)),
            1.3,
            1.3,
        ),
    };
    scale_to_rms(&mut one, r1);
    scale_to_rms(&mut two, r2);
    vec![one, two]
}

fn kinematics(condition: Condition) -> Vec<Vec<f64>> {
    use std::f64::consts::PI;
    let elbow = grid(ELL, |p| 100.0 + 50.0 * (2.0 * PI * p).cos());
    let ripple = |p: f64| (2.0 * PI * p).sin();
    let (sh_fe, sh_ed, wrist) = match condition {
        Condition::WeightFree => (
            grid(ELL, |p| 2.0 * bump(p, 0.2, 0.35, 0.6)),
            grid(ELL, |p| 15.0 + 10.0 * bump(p, 0.3, 0.4, 0.7)),
            grid(ELL, |p| -17.0 + 0.5 * ripple(p)),
        ),
        Condition::Standard => (
            grid(ELL, |p| -10.0 + 10.0 * bump(p, 0.05, 0.3, 0.6)),
            grid(ELL, |p| 19.5 + 0.8 * ripple(p)),
            grid(ELL, |p| -21.0 + 0.5 * ripple(p)),
        ),
        Condition::Fatigue => (
            grid(ELL, |p| -6.0 + 18.0 * bump(p, 0.02, 0.2, 0.8)),
            grid(ELL, |p| 17.0 + 13.0 * bump(p, 0.02, 0.2, 0.7)),
            grid(ELL, |p| -29.0 + 0.5 * ripple(p)),
        ),
    };
    vec![elbow, sh_fe, sh_ed, wrist]
}

fn spread(condition: Condition) -> Vec<SpreadTarget> {
    let t = |mean, sd| SpreadTarget { mean, sd };
    match condition {
        Condition::WeightFree => vec![t(14.2, 18.2), t(8.60, 11.7), t(7.61, 9.51), t(5.17, 6.67)],
        Condition::Standard => vec![t(9.39, 11.8), t(6.38, 8.71), t(6.47, 7.85), t(10.51, 12.8)],
        Condition::Fatigue => vec![t(11.8, 14.8), t(10.7, 13.4), t(5.32, 6.45), t(10.2, 13.2)],
    }
}

fn median_shift(condition: Condition) -> Vec<f64> {
    match condition {
        Condition::WeightFree | Condition::Standard => vec![0.0; 8],
        // percent drops of the 55 Hz carrier median, order BIC..PD
        Condition::Fatigue => [-5.2, -4.1, -7.01, -0.5, -3.5, -2.8, -6.0, -1.5].iter().map(|p| p / 100.0 * 55.0).collect(),
    }
}

fn condition_spec(condition: Condition) -> ConditionSpec {
    ConditionSpec {
        condition,
        planted_w: synergy_weights(condition),
        activation_templates: activations(condition),
        rms_scale: vec![1.0; 8],
        median_freq_shift_hz: median_shift(condition),
        kinematics_templates: kinematics(condition),
        kinematic_spread: spread(condition),
    }
}

/// Twelve subjects, five 4 s curls per trial, three conditions shaped by
/// the reported group results.
pub fn default_paper_scenario() -> ScenarioSpec {
    ScenarioSpec {
        n_subjects: 12,
        cycles_per_trial: 5,
        cycle_period_s: 4.0,
        period_jitter: 0.03,
        margin_s: 0.5,
        emg_rate: 1000.0,
        kin_rate: 100.0,
        carrier_low_hz: 30.0,
        carrier_high_hz: 80.0,
        muscle_labels: muscle_labels(),
        joint_labels: joint_labels(),
        conditions: Condition::ALL.iter().map(|&c| condition_spec(c)).collect(),
        snr_db: Some(20.0),
        variability: SubjectVariability {
            gain_log_sd: 0.25,
            w_log_sd: 0.05,
            activation_log_sd: 0.10,
            kin_ripple_deg: 0.3,
            kin_noise_deg: 0.3,
            kin_offset_scale: 1.0,
        },
        seed: 20_240_501,
    }
}

fn fatigue_like_standard(mut spec: ScenarioSpec) -> ScenarioSpec {
    let mut fat = spec.condition(Condition::Standard).expect("standard present").clone();
    fat.condition = Condition::Fatigue;
    *spec.condition_mut(Condition::Fatigue).expect("fatigue present") = fat;
    spec
}

/// Fatigue identical in distribution to Standard.
pub fn null_scenario(seed: u64) -> ScenarioSpec {
    let mut spec = fatigue_like_standard(default_paper_scenario());
    spec.seed = seed;
    spec
}

/// Fatigue equal to Standard except for the upper trapezius: amplitude
/// ×2.272 and a 7.01% lower median frequency.
pub fn fatigue_shift_scenario(seed: u64) -> ScenarioSpec {
    let mut spec = null_scenario(seed);
    let fat = spec.condition_mut(Condition::Fatigue).expect("fatigue present");
    fat.rms_scale[UT] = 2.272;
    fat.median_freq_shift_hz[UT] = -0.0701 * 55.0;
    spec
}

/// Fatigue equal to Standard except a 12° larger shoulder flexion bump.
pub fn flexion_only_scenario(seed: u64) -> ScenarioSpec {
    let mut spec = null_scenario(seed);
    let fat = spec.condition_mut(Condition::Fatigue).expect("fatigue present");
    fat.kinematics_templates[1] = grid(ELL, |p| -10.0 + 22.0 * bump(p, 0.05, 0.3, 0.6));
    spec
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_scenario_headline_numbers() {
        let s = default_paper_scenario();
        s.validate().unwrap();
        assert_eq!(s.n_subjects, 12);
        assert_eq!(s.cycles_per_trial, 5);
        let std = s.condition(Condition::Standard).unwrap();
        assert_eq!(std.planted_w[UT][1], 0.112);
        assert_eq!(std.planted_w[BIC][0], 0.80);
    }

    #[test]
    fn timeline_phase_is_continuous() {
        let s = default_paper_scenario();
        let tl = s.timeline(3, Condition::Fatigue);
        assert_eq!(tl.boundaries.len(), 6);
        assert!((tl.phase(0.0) - (1.0 - 0.5 / (tl.boundaries[1] - tl.boundaries[0]))).abs() < 1e-12);
        for &b in &tl.boundaries[..5] {
            assert!(tl.phase(b).abs() < 1e-12);
        }
        assert!(tl.phase(tl.duration - 1e-9) > 0.0);
    }

    #[test]
    fn validation_catches_bad_specs() {
        let mut s = default_paper_scenario();
        s.conditions[0].planted_w[0][0] = 2.0;
        assert!(matches!(s.validate(), Err(Error::InvalidScenario(_))));
        let mut s = default_paper_scenario();
        s.snr_db = Some(-3.0);
        assert!(s.validate().is_err());
        let mut s = default_paper_scenario();
        s.cycle_period_s = 0.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn targeted_scenarios() {
        let f = fatigue_shift_scenario(1);
        f.validate().unwrap();
        let fat = f.condition(Condition::Fatigue).unwrap();
        let std = f.condition(Condition::Standard).unwrap();
        assert_eq!(fat.rms_scale[UT], 2.272);
        assert_eq!(fat.planted_w, std.planted_w);
        flexion_only_scenario(1).validate().unwrap();
    }
}
