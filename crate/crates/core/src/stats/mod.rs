//! Paired condition comparisons: Wilcoxon signed-rank, Shapiro-Wilk and
//! Levene.

mod batch;
mod levene;
mod shapiro;
mod wilcoxon;

pub use batch::{compare_paired, write_stats_csv, PairedComparison, StatsRow, SIGNIFICANCE_LEVEL};
pub use levene::levene;
pub use shapiro::shapiro_wilk;
pub use wilcoxon::{signed_rank_distribution, wilcoxon_exact_p, wilcoxon_normal_p, wilcoxon_signed_rank, SignedRanks};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two measurements per subject.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedSample {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub label: String,
}

impl PairedSample {
    pub fn new(a: Vec<f64>, b: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::ShapeMismatch(format!("paired sample lengths {} and {}", a.len(), b.len())));
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("paired sample contains non-finite values".into()));
        }
        Ok(Self { a, b, label: label.into() })
    }

    pub fn differences(&self) -> Vec<f64> {
        self.a.iter().zip(&self.b).map(|(x, y)| x - y).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    WilcoxonExact,
    WilcoxonNormalApprox,
    ShapiroWilk,
    Levene,
}

impl TestMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            TestMethod::WilcoxonExact => "wilcoxon_exact",
            TestMethod::WilcoxonNormalApprox => "wilcoxon_normal_approx",
            TestMethod::ShapiroWilk => "shapiro_wilk",
            TestMethod::Levene => "levene",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedTestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub method: TestMethod,
    pub n_effective: usize,
}

impl PairedTestResult {
    pub fn significant(&self) -> bool {
        self.p_value < SIGNIFICANCE_LEVEL
    }
}
