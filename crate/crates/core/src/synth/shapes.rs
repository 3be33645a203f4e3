//! Parametric waveform pieces on a 0..1 phase axis.

use std::f64::consts::PI;

/// Cubic smoothstep from 0 at `a` to 1 at `b`.
pub fn smoothstep(x: f64, a: f64, b: f64) -> f64 {
    let u = ((x - a) / (b - a)).clamp(0.0, 1.0);
    u * u * (3.0 - 2.0 * u)
}

/// Raised-cosine bump: 0 before `start`, 1 at `peak`, back to 0 at `end`.
pub fn bump(x: f64, start: f64, peak: f64, end: f64) -> f64 {
    if x <= start || x >= end {
        0.0
    } else if x <= peak {
        0.5 * (1.0 - (PI * (x - start) / (peak - start)).cos())
    } else {
        0.5 * (1.0 + (PI * (x - peak) / (end - peak)).cos())
    }
}

/// Gaussian wrapped onto the unit circle.
pub fn periodic_gauss(x: f64, center: f64, width: f64) -> f64 {
    (-1..=1).map(|k| (-(x - center + k as f64).powi(2) / (2.0 * width * width)).exp()).sum()
}

pub(crate) fn grid(ell: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
    (0..ell).map(|k| f(k as f64 / (ell - 1) as f64)).collect()
}

pub(crate) fn scale_to_rms(v: &mut [f64], target: f64) {
    // the last grid point duplicates phase 0
    let body = &v[..v.len() - 1];
    let r = (body.iter().map(|x| x * x).sum::<f64>() / body.len() as f64).sqrt();
    if r > 0.0 {
        v.iter_mut().for_each(|x| *x *= target / r);
    }
}

/// Linear interpolation of a phase template at phase `phi` (wrapped).
pub(crate) fn sample_template(template: &[f64], phi: f64) -> f64 {
    let n = template.len() - 1;
    let p = phi.rem_euclid(1.0) * n as f64;
    let i = (p.floor() as usize).min(n - 1);
    let t = p - i as f64;
    template[i] + t * (template[i + 1] - template[i])
}
