use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    #[default]
    Spline,
    Linear,
}

/// One repetition resampled onto a uniform 0-100% phase grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedCycle {
    /// Rows = channels, columns = phase points.
    pub phase_angles: Array2<f64>,
    pub cycle_index: usize,
}

impl NormalizedCycle {
    pub fn ell(&self) -> usize {
        self.phase_angles.ncols()
    }
}

/// Natural cubic spline through (i, y_i) for unit-spaced knots.
#[derive(Debug, Clone)]
pub struct NaturalSpline {
    y: Vec<f64>,
    m: Vec<f64>,
}

impl NaturalSpline {
    pub fn new(y: &[f64]) -> Self {
        let n = y.len();
        let mut m = vec![0.0; n];
        if n >= 3 {
            // tridiagonal system for interior second derivatives:
            // m[i-1] + 4 m[i] + m[i+1] = 6 (y[i+1] - 2 y[i] + y[i-1])
            let k = n - 2;
            let mut c = vec![0.0; k];
            let mut d = vec![0.0; k];
            for i in 0..k {
                let rhs = 6.0 * (y[i + 2] - 2.0 * y[i + 1] + y[i]);
                let denom = 4.0 - if i > 0 { c[i - 1] } else { 0.0 };
                c[i] = 1.0 / denom;
                d[i] = (rhs - if i > 0 { d[i - 1] } else { 0.0 }) / denom;
            }
            for i in (0..k).rev() {
                let next = if i + 1 < k { m[i + 2] } else { 0.0 };
                m[i + 1] = d[i] - c[i] * next;
            }
        }
        Self { y: y.to_vec(), m }
    }

    /// Value at position `x` in knot units, clamped to [0, n-1].
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.y.len();
        let x = x.clamp(0.0, (n - 1) as f64);
        let i = (x.floor() as usize).min(n.saturating_sub(2));
        let t = x - i as f64;
        if t == 0.0 {
            return self.y[i];
        }
        if n == 1 {
            return self.y[0];
        }
        let (y0, y1, m0, m1) = (self.y[i], self.y[i + 1], self.m[i], self.m[i + 1]);
        let a = 1.0 - t;
        a * y0 + t * y1 + ((a * a * a - a) * m0 + (t * t * t - t) * m1) / 6.0
    }
}

fn linear_eval(y: &[f64], x: f64) -> f64 {
    let n = y.len();
    let x = x.clamp(0.0, (n - 1) as f64);
    let i = (x.floor() as usize).min(n.saturating_sub(2));
    let t = x - i as f64;
    if t == 0.0 || n == 1 {
        return y[i];
    }
    y[i] + t * (y[i + 1] - y[i])
}

/// Resamples one series onto `ell` evenly spaced points spanning it.
/// The end points are returned exactly.
pub fn resample(y: &[f64], ell: usize, method: Interpolation) -> Vec<f64> {
    let n = y.len();
    let spline = match method {
        Interpolation::Spline => Some(NaturalSpline::new(y)),
        Interpolation::Linear => None,
    };
    (0..ell)
        .map(|k| {
            if k + 1 == ell {
                return y[n - 1];
            }
            let x = k as f64 * (n - 1) as f64 / (ell - 1) as f64;
            match &spline {
                Some(s) => s.eval(x),
                None => linear_eval(y, x),
            }
        })
        .collect()
}

/// Phase-normalizes a segment (rows = channels) onto `ell` points.
pub fn time_normalize(segment: ArrayView2<f64>, ell: usize, method: Interpolation) -> Result<Array2<f64>> {
    let len = segment.ncols();
    if len < 4 {
        return Err(Error::SegmentTooShort { len, min: 4 });
    }
    if ell < 2 {
        return Err(Error::InvalidParameter(format!("ell {ell} < 2")));
    }
    let mut out = Array2::zeros((segment.nrows(), ell));
    for (r, row) in segment.rows().into_iter().enumerate() {
        let vals = resample(&row.to_vec(), ell, method);
        out.row_mut(r).assign(&ndarray::ArrayView1::from(&vals));
    }
    Ok(out)
}
