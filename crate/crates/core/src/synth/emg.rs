use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rustfft::FftPlanner;

use super::scenario::purpose;
use super::shapes::sample_template;
use super::ScenarioSpec;
use crate::domain::Condition;
use crate::error::{Error, Result};
use crate::signal::EmgRecording;

/// Unit-power noise with a flat spectrum on [low_hz, high_hz] and random phases.
pub fn carrier(n: usize, sample_rate: f64, low_hz: f64, high_hz: f64, rng: &mut impl Rng) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    let mut spec = vec![Complex64::new(0.0, 0.0); n];
    for (k, slot) in spec.iter_mut().enumerate().take(n / 2 + 1).skip(1) {
        let f = k as f64 * sample_rate / n as f64;
        let phase = rng.random::<f64>() * std::f64::consts::TAU;
        if f >= low_hz && f <= high_hz {
            *slot = Complex64::from_polar(1.0, phase);
        }
    }
    for k in 1..n.div_ceil(2) {
        spec[n - k] = spec[k].conj();
    }
    FftPlanner::<f64>::new().plan_fft_inverse(n).process(&mut spec);
    let x: Vec<f64> = spec.iter().map(|c| c.re).collect();
    let power = x.iter().map(|v| v * v).sum::<f64>() / n as f64;
    if power == 0.0 {
        return x;
    }
    let s = power.sqrt();
    x.into_iter().map(|v| v / s).collect()
}

fn lognormal_factor(rng: &mut impl Rng, log_sd: f64) -> f64 {
    if log_sd == 0.0 {
        return 1.0;
    }
    let z: f64 = StandardNormal.sample(rng);
    (log_sd * z).exp()
}

/// Subject-level synergy weights before amplitude scaling (m×n, unit columns).
/// The jitter belongs to the subject, so every condition sees the same draws.
fn subject_weights(spec: &ScenarioSpec, subject: usize, condition: Condition) -> Result<Array2<f64>> {
    let c = spec.condition(condition)?;
    let (m, n) = (spec.n_muscles(), c.n_synergies());
    let mut rng = spec.rng(subject, Condition::Standard, purpose::WEIGHTS, 0);
    let mut w = Array2::from_shape_fn((m, n), |(i, k)| c.planted_w[i][k]);
    w.mapv_inplace(|v| v * lognormal_factor(&mut rng, spec.variability.w_log_sd));
    normalize_columns(&mut w);
    Ok(w)
}

fn normalize_columns(w: &mut Array2<f64>) {
    for mut col in w.columns_mut() {
        let norm = col.dot(&col).sqrt();
        if norm > 0.0 {
            col.mapv_inplace(|v| v / norm);
        }
    }
}

/// Ground-truth synergy vectors as they appear in the recorded amplitudes:
/// the subject's weights with per-muscle scaling applied, unit columns.
pub fn planted_synergies(spec: &ScenarioSpec, subject: usize, condition: Condition) -> Result<Array2<f64>> {
    let c = spec.condition(condition)?;
    let mut w = subject_weights(spec, subject, condition)?;
    for (i, mut row) in w.rows_mut().into_iter().enumerate() {
        row.mapv_inplace(|v| v * c.rms_scale[i]);
    }
    normalize_columns(&mut w);
    Ok(w)
}

fn check_subject(spec: &ScenarioSpec, subject: usize) -> Result<()> {
    spec.validate()?;
    if subject >= spec.n_subjects {
        return Err(Error::InvalidScenario(format!("subject {subject} out of range 0..{}", spec.n_subjects)));
    }
    Ok(())
}

/// The subject's carrier for one muscle. Phases are shared by every
/// condition, so conditions differ only through the band edges.
fn subject_carrier(spec: &ScenarioSpec, subject: usize, muscle: usize, len: usize, high_hz: f64) -> Result<Vec<f64>> {
    let longest = spec
        .conditions
        .iter()
        .map(|c| (spec.timeline(subject, c.condition).duration * spec.emg_rate).round() as usize)
        .max()
        .unwrap_or(len)
        .max(len);
    let mut rng = spec.rng(subject, Condition::Standard, purpose::CARRIER, muscle);
    let mut x = carrier(longest, spec.emg_rate, spec.carrier_low_hz, high_hz, &mut rng);
    x.truncate(len);
    let power = x.iter().map(|v| v * v).sum::<f64>() / len.max(1) as f64;
    if power > 0.0 {
        let s = power.sqrt();
        x.iter_mut().for_each(|v| *v /= s);
    }
    Ok(x)
}

/// Raw multichannel sEMG for one trial.
pub fn generate_emg(spec: &ScenarioSpec, subject: usize, condition: Condition) -> Result<EmgRecording> {
    check_subject(spec, subject)?;
    let c = spec.condition(condition)?;
    let (m, n) = (spec.n_muscles(), c.n_synergies());
    let tl = spec.timeline(subject, condition);
    let len = (tl.duration * spec.emg_rate).round() as usize;

    let gain = lognormal_factor(&mut spec.rng(subject, Condition::Standard, purpose::GAIN, 0), spec.variability.gain_log_sd);
    let w = subject_weights(spec, subject, condition)?;
    let mut act_rng = spec.rng(subject, Condition::Standard, purpose::ACTIVATION, 0);
    let amp: Vec<f64> = (0..n).map(|_| lognormal_factor(&mut act_rng, spec.variability.activation_log_sd)).collect();

    let phases: Vec<f64> = (0..len).map(|s| tl.phase(s as f64 / spec.emg_rate)).collect();
    let acts: Vec<Vec<f64>> = (0..n)
        .map(|k| phases.iter().map(|&p| amp[k] * sample_template(&c.activation_templates[k], p)).collect())
        .collect();

    let mut samples = Array2::zeros((m, len));
    for i in 0..m {
        let high = spec.carrier_high_hz + 2.0 * c.median_freq_shift_hz[i];
        let car = subject_carrier(spec, subject, i, len, high)?;
        let scale = gain * c.rms_scale[i];
        let mut row = samples.row_mut(i);
        for s in 0..len {
            let envelope: f64 = (0..n).map(|k| w[[i, k]] * acts[k][s]).sum();
            row[s] = scale * envelope * car[s];
        }
        if let Some(snr) = spec.snr_db {
            let power = row.iter().map(|v| v * v).sum::<f64>() / len.max(1) as f64;
            let sd = (power / 10f64.powf(snr / 10.0)).sqrt();
            if sd > 0.0 {
                let normal = Normal::new(0.0, sd).expect("finite sd");
                let mut rng = spec.rng(subject, condition, purpose::NOISE, i);
                row.iter_mut().for_each(|v| *v += normal.sample(&mut rng));
            }
        }
    }
    EmgRecording::new(samples, spec.emg_rate, spec.muscle_labels.clone(), condition, ScenarioSpec::subject_id(subject))
}
