use statrs::distribution::{ContinuousCDF, Normal};

use super::{PairedTestResult, TestMethod};
use crate::error::{Error, Result};

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * x + v)
}

/// Coefficients for the largest values, `a[0]` pairs with the extreme order statistics.
fn coefficients(n: usize, normal: &Normal) -> Vec<f64> {
    const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056];
    const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
    let half = n / 2;
    if n == 3 {
        return vec![std::f64::consts::FRAC_1_SQRT_2];
    }
    let an25 = n as f64 + 0.25;
    let m: Vec<f64> = (1..=half).map(|i| normal.inverse_cdf((i as f64 - 0.375) / an25)).collect();
    let summ2 = 2.0 * m.iter().map(|v| v * v).sum::<f64>();
    let ssumm2 = summ2.sqrt();
    let rsn = 1.0 / (n as f64).sqrt();
    let a1 = poly(&C1, rsn) - m[0] / ssumm2;
    let mut a = vec![0.0; half];
    a[0] = a1;
    let (first, fac) = if n > 5 {
        let a2 = -m[1] / ssumm2 + poly(&C2, rsn);
        a[1] = a2;
        let fac = ((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2)).sqrt();
        (2, fac)
    } else {
        (1, ((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1)).sqrt())
    };
    for i in first..half {
        a[i] = -m[i] / fac;
    }
    a
}

/// Shapiro-Wilk W with Royston's p-value approximation, 3 ≤ n ≤ 5000.
pub fn shapiro_wilk(x: &[f64]) -> Result<PairedTestResult> {
    let n = x.len();
    if !(3..=5000).contains(&n) {
        return Err(Error::SizeOutOfRange { what: "shapiro-wilk sample", n, min: 3, max: 5000 });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("shapiro-wilk sample contains non-finite values".into()));
    }
    let mut xs = x.to_vec();
    xs.sort_by(f64::total_cmp);
    let range = xs[n - 1] - xs[0];
    if !(range > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let normal = Normal::standard();
    let a = coefficients(n, &normal);
    let xm = xs.iter().sum::<f64>() / n as f64;
    let ss: f64 = xs.iter().map(|v| (v - xm) * (v - xm)).sum();
    let num: f64 = a.iter().enumerate().map(|(k, &ak)| ak * (xs[n - 1 - k] - xs[k])).sum();
    let w = (num * num / ss).min(1.0);

    let p = if n == 3 {
        const PI6: f64 = 6.0 / std::f64::consts::PI;
        const STQR: f64 = std::f64::consts::FRAC_PI_3;
        (PI6 * (w.sqrt().asin() - STQR)).clamp(0.0, 1.0)
    } else {
        let w1 = (1.0 - w).ln();
        let nf = n as f64;
        let (y, mu, sigma) = if n <= 11 {
            let gamma = poly(&[-2.273, 0.459], nf);
            if w1 >= gamma {
                return Ok(PairedTestResult { statistic: w, p_value: 0.0, method: TestMethod::ShapiroWilk, n_effective: n });
            }
            let y = -(gamma - w1).ln();
            let mu = poly(&[0.5440, -0.39978, 0.025054, -6.714e-4], nf);
            let sigma = poly(&[1.3822, -0.77857, 0.062767, -0.0020322], nf).exp();
            (y, mu, sigma)
        } else {
            let ln_n = nf.ln();
            let mu = poly(&[-1.5861, -0.31082, -0.083751, 0.0038915], ln_n);
            let sigma = poly(&[-0.4803, -0.082676, 0.0030302], ln_n).exp();
            (w1, mu, sigma)
        };
        normal.sf((y - mu) / sigma)
    };
    Ok(PairedTestResult { statistic: w, p_value: p.clamp(0.0, 1.0), method: TestMethod::ShapiroWilk, n_effective: n })
}
