//! Welch power spectral density and median frequency.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::EmgRecording;
use crate::error::{Error, Result};
use crate::exec::{try_map_range, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsdConfig {
    pub segment_len: usize,
    /// Fraction of each segment shared with the next, in [0, 1).
    pub overlap: f64,
}

impl Default for PsdConfig {
    fn default() -> Self {
        Self { segment_len: 1024, overlap: 0.5 }
    }
}

impl PsdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.segment_len < 8 {
            return Err(Error::InvalidParameter(format!("psd.segment_len {} < 8", self.segment_len)));
        }
        if !(0.0..1.0).contains(&self.overlap) {
            return Err(Error::InvalidParameter(format!("psd.overlap {} outside [0, 1)", self.overlap)));
        }
        Ok(())
    }

    fn step(&self) -> usize {
        let overlap = (self.overlap * self.segment_len as f64).floor() as usize;
        (self.segment_len - overlap).max(1)
    }
}

/// One-sided power spectral density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub freqs: Vec<f64>,
    pub psd: Vec<f64>,
}

impl Spectrum {
    pub fn bin_width(&self) -> f64 {
        if self.freqs.len() > 1 {
            self.freqs[1] - self.freqs[0]
        } else {
            0.0
        }
    }
}

/// Welch estimate with a periodic Hann window and per-segment mean removal.
///
/// Needs at least two full segments of data.
pub fn welch_psd(x: &[f64], sample_rate: f64, cfg: &PsdConfig) -> Result<Spectrum> {
    cfg.validate()?;
    let seg = cfg.segment_len;
    if x.len() < 2 * seg {
        return Err(Error::SignalTooShort { len: x.len(), needed: 2 * seg });
    }
    let window: Vec<f64> = (0..seg).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / seg as f64).cos()).collect();
    let win_power: f64 = window.iter().map(|w| w * w).sum();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(seg);
    let n_bins = seg / 2 + 1;
    let mut acc = vec![0.0; n_bins];
    let mut count = 0usize;
    let mut buf = vec![Complex64::new(0.0, 0.0); seg];
    let mut start = 0;
    while start + seg <= x.len() {
        let chunk = &x[start..start + seg];
        let m = chunk.iter().sum::<f64>() / seg as f64;
        for ((b, &v), &w) in buf.iter_mut().zip(chunk).zip(&window) {
            *b = Complex64::new((v - m) * w, 0.0);
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        count += 1;
        start += cfg.step();
    }
    let scale = 1.0 / (sample_rate * win_power * count as f64);
    let psd: Vec<f64> = acc
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let one_sided = if k == 0 || (seg % 2 == 0 && k == seg / 2) { 1.0 } else { 2.0 };
            p * scale * one_sided
        })
        .collect();
    let freqs = (0..n_bins).map(|k| k as f64 * sample_rate / seg as f64).collect();
    Ok(Spectrum { freqs, psd })
}

/// Frequency where cumulative power first reaches half of the total,
/// with linear interpolation inside the crossing bin.
///
/// Returns `None` for a spectrum without power.
pub fn median_frequency_of(spec: &Spectrum) -> Option<f64> {
    let total: f64 = spec.psd.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let half = total / 2.0;
    let df = spec.bin_width();
    let mut cum = 0.0;
    for (k, &p) in spec.psd.iter().enumerate() {
        if cum + p >= half {
            // bin k covers [f_k - df/2, f_k + df/2]
            let frac = if p > 0.0 { (half - cum) / p } else { 0.5 };
            let f = spec.freqs[k] - df / 2.0 + frac * df;
            return Some(f.max(0.0));
        }
        cum += p;
    }
    spec.freqs.last().copied()
}

/// Per-muscle median frequency of a recording.
pub fn median_frequency(rec: &EmgRecording, cfg: &PsdConfig, exec: Execution) -> Result<Vec<f64>> {
    try_map_range(rec.n_muscles(), exec, |i| {
        let spec = welch_psd(&rec.channel(i), rec.sample_rate, cfg)?;
        median_frequency_of(&spec).ok_or(Error::ZeroVariance)
    })
}
