//! Butterworth band-pass design (bilinear transform) and zero-phase
//! forward-backward filtering over second-order sections.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::EmgRecording;
use crate::error::{Error, Result};
use crate::exec::{map_range, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    pub low_hz: f64,
    pub high_hz: f64,
    /// Order of the low-pass prototype; the band-pass has twice as many poles.
    pub order: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self { low_hz: 30.0, high_hz: 80.0, order: 4 }
    }
}

/// One second-order section in transposed direct form II, `a0 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    fn response(&self, z_inv: Complex64) -> Complex64 {
        let z2 = z_inv * z_inv;
        let num = self.b[0] + self.b[1] * z_inv + self.b[2] * z2;
        let den = 1.0 + self.a[0] * z_inv + self.a[1] * z2;
        num / den
    }

    fn dc_gain(&self) -> f64 {
        (self.b[0] + self.b[1] + self.b[2]) / (1.0 + self.a[0] + self.a[1])
    }

    /// State that makes a constant input of 1 a steady state.
    fn step_state(&self) -> [f64; 2] {
        let g = self.dc_gain();
        [g - self.b[0], self.b[2] - self.a[1] * g]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandPass {
    pub sections: Vec<Biquad>,
}

impl BandPass {
    pub fn butterworth(order: usize, low_hz: f64, high_hz: f64, sample_rate: f64) -> Result<Self> {
        let nyquist = sample_rate / 2.0;
        if !(low_hz > 0.0 && low_hz < high_hz && high_hz < nyquist) {
            return Err(Error::InvalidBand { low_hz, high_hz, nyquist });
        }
        if order == 0 {
            return Err(Error::InvalidParameter("filter order must be >= 1".into()));
        }
        let fs2 = 2.0 * sample_rate;
        let w1 = fs2 * (PI * low_hz / sample_rate).tan();
        let w2 = fs2 * (PI * high_hz / sample_rate).tan();
        let w0 = (w1 * w2).sqrt();
        let bw = w2 - w1;

        let mut poles = Vec::with_capacity(2 * order);
        for k in 0..order {
            let theta = PI * (2 * k + 1) as f64 / (2 * order) as f64;
            let p = Complex64::new(-theta.sin(), theta.cos());
            let half = p * (bw / 2.0);
            let disc = (half * half - w0 * w0).sqrt();
            for s in [half + disc, half - disc] {
                poles.push((fs2 + s) / (fs2 - s));
            }
        }

        let mut complex: Vec<Complex64> = poles.iter().copied().filter(|p| p.im > 1e-12).collect();
        let mut real: Vec<f64> = poles.iter().filter(|p| p.im.abs() <= 1e-12).map(|p| p.re).collect();
        complex.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        real.sort_by(f64::total_cmp);

        let mut sections = Vec::with_capacity(order);
        for p in complex {
            sections.push(Biquad { b: [1.0, 0.0, -1.0], a: [-2.0 * p.re, p.norm_sqr()] });
        }
        for pair in real.chunks(2) {
            let (r1, r2) = (pair[0], pair.get(1).copied().unwrap_or(0.0));
            sections.push(Biquad { b: [1.0, 0.0, -1.0], a: [-(r1 + r2), r1 * r2] });
        }

        // unity gain at the band center
        let center = 2.0 * (w0 / fs2).atan();
        let mut filt = BandPass { sections };
        let g = filt.response_at(center).norm();
        let per_section = g.powf(-1.0 / filt.sections.len() as f64);
        for s in &mut filt.sections {
            for b in &mut s.b {
                *b *= per_section;
            }
        }
        Ok(filt)
    }

    /// Number of poles of the realized filter.
    pub fn order(&self) -> usize {
        2 * self.sections.len()
    }

    fn response_at(&self, omega: f64) -> Complex64 {
        let z_inv = Complex64::from_polar(1.0, -omega);
        self.sections.iter().map(|s| s.response(z_inv)).product()
    }

    /// Magnitude response of a single pass at `freq_hz`.
    pub fn magnitude(&self, freq_hz: f64, sample_rate: f64) -> f64 {
        self.response_at(2.0 * PI * freq_hz / sample_rate).norm()
    }

    /// Magnitude response of the forward-backward filter (squared single pass).
    pub fn zero_phase_magnitude(&self, freq_hz: f64, sample_rate: f64) -> f64 {
        self.magnitude(freq_hz, sample_rate).powi(2)
    }

    fn run(&self, x: &mut [f64]) {
        let Some(&x0) = x.first() else { return };
        let mut level = x0;
        for s in &self.sections {
            let zi = s.step_state();
            let (mut z1, mut z2) = (zi[0] * level, zi[1] * level);
            level *= s.dc_gain();
            for v in x.iter_mut() {
                let xin = *v;
                let y = s.b[0] * xin + z1;
                z1 = s.b[1] * xin - s.a[0] * y + z2;
                z2 = s.b[2] * xin - s.a[1] * y;
                *v = y;
            }
        }
    }

    /// Odd-reflection padding length.
    pub fn pad_len(&self) -> usize {
        3 * (self.order() + 1)
    }

    /// Forward-backward filtering with odd-reflection padding and
    /// steady-state initial conditions.
    pub fn filtfilt(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        if n < 2 {
            return x.to_vec();
        }
        let pad = self.pad_len().min(n - 1);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        let (first, last) = (x[0], x[n - 1]);
        ext.extend((1..=pad).rev().map(|i| 2.0 * first - x[i]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|i| 2.0 * last - x[n - 1 - i]));
        self.run(&mut ext);
        ext.reverse();
        self.run(&mut ext);
        ext.reverse();
        ext[pad..pad + n].to_vec()
    }
}

/// Zero-phase Butterworth band-pass applied to every channel.
pub fn bandpass_filter(rec: &EmgRecording, cfg: &FilterConfig, exec: Execution) -> Result<EmgRecording> {
    let filt = BandPass::butterworth(cfg.order, cfg.low_hz, cfg.high_hz, rec.sample_rate)?;
    let rows = map_range(rec.n_muscles(), exec, |i| filt.filtfilt(&rec.channel(i)));
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    let samples = Array2::from_shape_vec(rec.samples.raw_dim(), flat).expect("shape preserved");
    Ok(rec.with_samples(samples))
}
