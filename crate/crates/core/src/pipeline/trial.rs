use ndarray::{s, Array2};

use super::{StudyConfig, Trial};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::kinematics::{average_cycles, segment_cycles, smooth, time_normalize, CycleSet};
use crate::nnmf::{scan_ranks, RankScan};
use crate::signal::{bandpass_filter, extract_envelope, fatigue_metrics, EnvelopeMatrix, FatigueMetrics, MetricSource};

/// Everything derived from one subject × condition.
#[derive(Debug, Clone)]
pub struct TrialAnalysis {
    pub fatigue: FatigueMetrics,
    /// Cycle-averaged envelope, muscles × ℓ.
    pub envelope_cycle: Array2<f64>,
    /// Cycle-averaged joint angles, joints × ℓ.
    pub kin_cycle: Array2<f64>,
    pub cycles: CycleSet,
    pub scan: Option<RankScan>,
}

/// Envelope cut at the kinematic cycle boundaries, phase-normalized and averaged.
pub fn cycle_envelope(env: &EnvelopeMatrix, cycles: &CycleSet, ell: usize, cfg: &StudyConfig) -> Result<Array2<f64>> {
    let ratio = env.sample_rate / cycles.sample_rate;
    let last = env.len().saturating_sub(1);
    let mut acc = Array2::<f64>::zeros((env.n_muscles(), ell));
    for k in 0..cycles.n_cycles() {
        let (a, b) = cycles.span(k);
        let ea = ((a as f64 * ratio).round() as usize).min(last);
        let eb = ((b as f64 * ratio).round() as usize).min(last);
        if eb <= ea {
            return Err(Error::SegmentTooShort { len: eb.saturating_sub(ea) + 1, min: 4 });
        }
        acc += &time_normalize(env.values.slice(s![.., ea..=eb]), ell, cfg.kin.interp)?;
    }
    let n = cycles.n_cycles() as f64;
    Ok(acc.mapv(|v| (v / n).max(0.0)))
}

pub fn analyze_trial(trial: &Trial, cfg: &StudyConfig) -> Result<TrialAnalysis> {
    let inner = Execution::Sequential;
    let emg_dur = trial.emg.len() as f64 / trial.emg.sample_rate;
    let kin_dur = trial.kinematics.len() as f64 / trial.kinematics.sample_rate;
    if (emg_dur - kin_dur).abs() > 0.05 * emg_dur.max(kin_dur) {
        return Err(Error::ShapeMismatch(format!("EMG lasts {emg_dur:.3} s but kinematics {kin_dur:.3} s")));
    }
    let filtered = bandpass_filter(&trial.emg, &cfg.filter, inner)?;
    let fatigue = match cfg.fatigue.source {
        MetricSource::Raw => fatigue_metrics(&trial.emg, &cfg.psd, inner)?,
        MetricSource::Filtered => fatigue_metrics(&filtered, &cfg.psd, inner)?,
    };

    let kin = smooth(&trial.kinematics, cfg.kin.smooth_window_frac)?;
    let cycles = segment_cycles(&kin, cfg.kin.expected_cycles, &cfg.kin.segment_config())?;
    let kin_cycle = average_cycles(&cycles.normalize(&kin, cfg.kin.ell, cfg.kin.interp)?)?.phase_angles;

    let (envelope_cycle, scan) = if cfg.synergies {
        let env = extract_envelope(&filtered, &cfg.envelope, inner)?;
        let e = cycle_envelope(&env, &cycles, cfg.kin.ell, cfg)?;
        let scan = scan_ranks(e.view(), &cfg.nnmf, inner)?;
        (e, Some(scan))
    } else {
        (Array2::zeros((0, 0)), None)
    };
    Ok(TrialAnalysis { fatigue, envelope_cycle, kin_cycle, cycles, scan })
}
