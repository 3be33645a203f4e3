use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use statrs::distribution::{ContinuousCDF, Normal as StdNormal};

use super::scenario::purpose;
use super::shapes::sample_template;
use super::{ScenarioSpec, SpreadTarget};
use crate::domain::Condition;
use crate::error::{Error, Result};
use crate::kinematics::JointTrajectorySet;
use crate::util::{mean, sample_std};

fn cv_of(sigma: f64, z: &[f64]) -> f64 {
    let vals: Vec<f64> = z.iter().flat_map(|&q| [(sigma * q).exp(); 2]).collect();
    sample_std(&vals) / mean(&vals)
}

/// `n_pairs` lognormal quantile magnitudes whose doubled set has the target
/// mean and sample sd.
pub fn spread_magnitudes(target: SpreadTarget, n_pairs: usize) -> Vec<f64> {
    if n_pairs == 0 || target.mean == 0.0 {
        return vec![0.0; n_pairs];
    }
    let normal = StdNormal::standard();
    let z: Vec<f64> = (0..n_pairs).map(|k| normal.inverse_cdf((k as f64 + 0.5) / n_pairs as f64)).collect();
    let cv = target.sd / target.mean;
    let (mut lo, mut hi) = (0.0, 10.0);
    if n_pairs > 1 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if cv_of(mid, &z) < cv {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let sigma = 0.5 * (lo + hi);
    let raw: Vec<f64> = z.iter().map(|&q| (sigma * q).exp()).collect();
    let m = raw.iter().sum::<f64>() / n_pairs as f64;
    raw.into_iter().map(|v| v * target.mean / m).collect()
}

/// Constant per-subject offsets for one joint: ± pairs that cancel in the
/// group mean, randomly assigned to subjects.
pub fn kinematic_offsets(spec: &ScenarioSpec, condition: Condition, joint: usize) -> Result<Vec<f64>> {
    let c = spec.condition(condition)?;
    let target = *c.kinematic_spread.get(joint).ok_or_else(|| Error::InvalidScenario(format!("joint {joint}")))?;
    let s = spec.n_subjects;
    let mags = spread_magnitudes(target, s / 2);
    let mut offsets: Vec<f64> = mags.iter().flat_map(|&q| [q, -q]).collect();
    offsets.resize(s, 0.0);
    let mut rng = spec.rng(0, condition, purpose::KIN_ASSIGN, joint);
    offsets.shuffle(&mut rng);
    let k = spec.variability.kin_offset_scale;
    Ok(offsets.into_iter().map(|v| v * k).collect())
}

/// Joint angles for one trial.
pub fn generate_kinematics(spec: &ScenarioSpec, subject: usize, condition: Condition) -> Result<JointTrajectorySet> {
    spec.validate()?;
    if subject >= spec.n_subjects {
        return Err(Error::InvalidScenario(format!("subject {subject} out of range 0..{}", spec.n_subjects)));
    }
    let c = spec.condition(condition)?;
    let tl = spec.timeline(subject, condition);
    let len = (tl.duration * spec.kin_rate).round() as usize;
    let j = spec.n_joints();
    let v = spec.variability;
    let mut angles = Array2::zeros((j, len));
    for joint in 0..j {
        let offset = kinematic_offsets(spec, condition, joint)?[subject];
        let mut rng = spec.rng(subject, condition, purpose::KIN_RIPPLE, joint);
        let ripple_period = rng.random_range(3.0..8.0);
        let ripple_phase = rng.random::<f64>() * std::f64::consts::TAU;
        let noise = if v.kin_noise_deg > 0.0 { Some(Normal::new(0.0, v.kin_noise_deg).expect("finite sd")) } else { None };
        let mut noise_rng = spec.rng(subject, condition, purpose::KIN_NOISE, joint);
        for s in 0..len {
            let t = s as f64 / spec.kin_rate;
            let mut a = sample_template(&c.kinematics_templates[joint], tl.phase(t)) + offset;
            if v.kin_ripple_deg > 0.0 {
                a += v.kin_ripple_deg * (std::f64::consts::TAU * t / ripple_period + ripple_phase).sin();
            }
            if let Some(nd) = &noise {
                a += nd.sample(&mut noise_rng);
            }
            angles[[joint, s]] = a;
        }
    }
    JointTrajectorySet::new(angles, spec.kin_rate, spec.joint_labels.clone(), condition, ScenarioSpec::subject_id(subject))
}
