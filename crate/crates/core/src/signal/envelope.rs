//! Amplitude envelope: analytic-signal magnitude followed by a moving mean.

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::EmgRecording;
use crate::error::Result;
use crate::exec::{map_range, Execution};
use crate::util::moving_mean;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvelopeConfig {
    /// Moving-mean window applied to the analytic magnitude, in samples.
    pub smooth_samples: usize,
}

impl Default for EnvelopeConfig {
    fn default() -> Self {
        Self { smooth_samples: 250 }
    }
}

/// Non-negative envelopes, rows in the same order as the source recording.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeMatrix {
    pub values: Array2<f64>,
    pub sample_rate: f64,
}

impl EnvelopeMatrix {
    pub fn n_muscles(&self) -> usize {
        self.values.nrows()
    }

    pub fn len(&self) -> usize {
        self.values.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.values.ncols() == 0
    }
}

/// |x + i·H{x}| computed with a frequency-domain Hilbert transform.
pub fn analytic_magnitude(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    // keep DC (and Nyquist for even n), double positive frequencies, drop negative ones
    let half = n / 2;
    for (k, v) in buf.iter_mut().enumerate() {
        let h = if k == 0 || (n % 2 == 0 && k == half) {
            1.0
        } else if k < n.div_ceil(2) {
            2.0
        } else {
            0.0
        };
        *v *= h;
    }
    inv.process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter().map(|c| c.norm() * scale).collect()
}

/// Envelope of every channel of a (band-pass filtered) recording.
pub fn extract_envelope(rec: &EmgRecording, cfg: &EnvelopeConfig, exec: Execution) -> Result<EnvelopeMatrix> {
    let rows = map_range(rec.n_muscles(), exec, |i| {
        let mag = analytic_magnitude(&rec.channel(i));
        // the moving mean of non-negative values is non-negative, but rounding
        // in the prefix sums can leave tiny negatives
        moving_mean(&mag, cfg.smooth_samples).into_iter().map(|v| v.max(0.0)).collect::<Vec<_>>()
    });
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    let values = Array2::from_shape_vec(rec.samples.raw_dim(), flat).expect("shape preserved");
    Ok(EnvelopeMatrix { values, sample_rate: rec.sample_rate })
}
