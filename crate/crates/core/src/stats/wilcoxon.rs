use statrs::function::erf::erfc;

use super::{PairedSample, PairedTestResult, TestMethod};
use crate::error::{Error, Result};

/// Largest tie-free sample size that gets the exact null distribution.
const EXACT_MAX_N: usize = 25;

/// Ranks of the non-zero differences.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedRanks {
    pub w_plus: f64,
    pub w_minus: f64,
    pub n: usize,
    /// Sizes of tied groups among |d|.
    pub tie_groups: Vec<usize>,
}

impl SignedRanks {
    pub fn from_differences(d: &[f64]) -> Self {
        let mut nz: Vec<f64> = d.iter().copied().filter(|&v| v != 0.0).collect();
        nz.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
        let n = nz.len();
        let (mut w_plus, mut w_minus) = (0.0, 0.0);
        let mut tie_groups = Vec::new();
        let mut i = 0;
        while i < n {
            let mut j = i;
            while j + 1 < n && nz[j + 1].abs() == nz[i].abs() {
                j += 1;
            }
            let rank = (i + j) as f64 / 2.0 + 1.0;
            for v in &nz[i..=j] {
                if *v > 0.0 {
                    w_plus += rank;
                } else {
                    w_minus += rank;
                }
            }
            if j > i {
                tie_groups.push(j - i + 1);
            }
            i = j + 1;
        }
        Self { w_plus, w_minus, n, tie_groups }
    }

    pub fn statistic(&self) -> f64 {
        self.w_plus.min(self.w_minus)
    }

    pub fn has_ties(&self) -> bool {
        !self.tie_groups.is_empty()
    }
}

/// Number of sign patterns of ranks 1..=n giving each rank sum 0..=n(n+1)/2.
pub fn signed_rank_distribution(n: usize) -> Vec<u128> {
    let max = n * (n + 1) / 2;
    let mut counts = vec![0u128; max + 1];
    counts[0] = 1;
    for k in 1..=n {
        let top = k * (k + 1) / 2;
        for s in (k..=top).rev() {
            counts[s] += counts[s - k];
        }
    }
    counts
}

/// Two-sided exact p for statistic `t = min(W+, W-)` without ties.
pub fn wilcoxon_exact_p(t: f64, n: usize) -> f64 {
    let counts = signed_rank_distribution(n);
    let limit = t.floor() as usize;
    let tail: u128 = counts.iter().take(limit + 1).sum();
    let total = 2f64.powi(n as i32);
    ((2 * tail) as f64 / total).min(1.0)
}

/// Two-sided normal approximation with tie and continuity corrections.
pub fn wilcoxon_normal_p(ranks: &SignedRanks) -> f64 {
    let n = ranks.n as f64;
    let mu = n * (n + 1.0) / 4.0;
    let ties: f64 = ranks.tie_groups.iter().map(|&t| (t * t * t - t) as f64).sum();
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - ties / 48.0;
    if !(var > 0.0) {
        return 1.0;
    }
    let z = ((ranks.statistic() - mu).abs() - 0.5).max(0.0) / var.sqrt();
    erfc(z / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
}

pub fn wilcoxon_signed_rank(s: &PairedSample) -> Result<PairedTestResult> {
    if s.a.len() != s.b.len() {
        return Err(Error::ShapeMismatch(format!("paired sample lengths {} and {}", s.a.len(), s.b.len())));
    }
    let ranks = SignedRanks::from_differences(&s.differences());
    if ranks.n == 0 {
        return Err(Error::AllZeroDifferences);
    }
    let statistic = ranks.statistic();
    let (p_value, method) = if ranks.n <= EXACT_MAX_N && !ranks.has_ties() {
        (wilcoxon_exact_p(statistic, ranks.n), TestMethod::WilcoxonExact)
    } else {
        (wilcoxon_normal_p(&ranks), TestMethod::WilcoxonNormalApprox)
    };
    Ok(PairedTestResult { statistic, p_value, method, n_effective: ranks.n })
}
