//! Non-negative matrix factorization by multiplicative updates, VAF and
//! synergy-count selection.

use std::collections::BTreeMap;
use std::path::Path;

use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_range, try_map_range, Execution};
use crate::io::write_matrix_csv;

const EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NnmfConfig {
    pub restarts: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub vaf_threshold: f64,
    /// Largest VAF gain to the next rank that still counts as a plateau.
    pub growth_threshold: f64,
    /// Highest rank scanned; `None` means the number of muscles.
    pub max_rank: Option<usize>,
}

impl Default for NnmfConfig {
    fn default() -> Self {
        Self {
            restarts: 20,
            tol: 1e-6,
            max_iter: 1000,
            seed: 2024,
            vaf_threshold: 0.90,
            growth_threshold: 0.03,
            max_rank: None,
        }
    }
}

impl NnmfConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidParameter("nnmf.restarts must be >= 1".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("nnmf.max_iter must be >= 1".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::InvalidParameter(format!("nnmf.tol {}", self.tol)));
        }
        if !(0.0..=1.0).contains(&self.vaf_threshold) {
            return Err(Error::InvalidParameter(format!("nnmf.vaf_threshold {}", self.vaf_threshold)));
        }
        if !(self.growth_threshold >= 0.0) {
            return Err(Error::InvalidParameter(format!("nnmf.growth_threshold {}", self.growth_threshold)));
        }
        Ok(())
    }
}

/// E ≈ W·C with W (m×n) and C (n×t) non-negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factorization {
    pub w: Array2<f64>,
    pub c: Array2<f64>,
    pub rank: usize,
    /// Frobenius norm of the residual of the stored factors.
    pub objective: f64,
    pub restarts_used: usize,
    pub best_restart: usize,
    pub iterations: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationSummary {
    pub rank: usize,
    pub vaf: f64,
    pub objective: f64,
    pub seed: u64,
    pub restarts_used: usize,
    pub best_restart: usize,
}

impl Factorization {
    pub fn reconstruction(&self) -> Array2<f64> {
        self.w.dot(&self.c)
    }

    pub fn summary(&self, e: ArrayView2<f64>) -> Result<FactorizationSummary> {
        Ok(FactorizationSummary {
            rank: self.rank,
            vaf: vaf(e, self.w.view(), self.c.view())?,
            objective: self.objective,
            seed: self.seed,
            restarts_used: self.restarts_used,
            best_restart: self.best_restart,
        })
    }

    pub fn write_csv(&self, w_path: &Path, c_path: &Path) -> Result<()> {
        write_matrix_csv(w_path, &self.w)?;
        write_matrix_csv(c_path, &self.c)
    }
}

/// Output of one multiplicative-update run.
#[derive(Debug, Clone)]
pub struct UpdateRun {
    pub w: Array2<f64>,
    pub c: Array2<f64>,
    /// Objective before the first update and after every iteration.
    pub history: Vec<f64>,
}

pub fn frobenius_residual(e: ArrayView2<f64>, w: ArrayView2<f64>, c: ArrayView2<f64>) -> f64 {
    let wc = w.dot(&c);
    e.iter().zip(wc.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            acc[l] += x[l] * y[l];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn axpy(dst: &mut [f64], a: f64, x: &[f64]) {
    for (d, &v) in dst.iter_mut().zip(x) {
        *d += a * v;
    }
}

/// Row-major scratch state for the update loop.
struct Work {
    m: usize,
    n: usize,
    t: usize,
    e: Vec<f64>,
    e_sq: f64,
    w: Vec<f64>,
    c: Vec<f64>,
    wte: Vec<f64>,
    wtw: Vec<f64>,
    den: Vec<f64>,
    ect: Vec<f64>,
    cct: Vec<f64>,
}

impl Work {
    fn new(e: ArrayView2<f64>, w: &Array2<f64>, c: &Array2<f64>) -> Self {
        let (m, t) = e.dim();
        let n = w.ncols();
        let e: Vec<f64> = e.iter().copied().collect();
        Self {
            m,
            n,
            t,
            e_sq: dot(&e, &e),
            e,
            w: w.iter().copied().collect(),
            c: c.iter().copied().collect(),
            wte: vec![0.0; n * t],
            wtw: vec![0.0; n * n],
            den: vec![0.0; n * t],
            ect: vec![0.0; m * n],
            cct: vec![0.0; n * n],
        }
    }

    fn residual(&self) -> f64 {
        let (m, n, t) = (self.m, self.n, self.t);
        let mut row = vec![0.0; t];
        let mut total = 0.0;
        for i in 0..m {
            row.copy_from_slice(&self.e[i * t..(i + 1) * t]);
            for k in 0..n {
                axpy(&mut row, -self.w[i * n + k], &self.c[k * t..(k + 1) * t]);
            }
            total += dot(&row, &row);
        }
        total.sqrt()
    }

    fn gram_w(&mut self) {
        let (m, n) = (self.m, self.n);
        for a in 0..n {
            for b in a..n {
                let v: f64 = (0..m).map(|i| self.w[i * n + a] * self.w[i * n + b]).sum();
                self.wtw[a * n + b] = v;
                self.wtw[b * n + a] = v;
            }
        }
    }

    fn update_c(&mut self) {
        let (m, n, t) = (self.m, self.n, self.t);
        self.wte.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..m {
            for k in 0..n {
                axpy(&mut self.wte[k * t..(k + 1) * t], self.w[i * n + k], &self.e[i * t..(i + 1) * t]);
            }
        }
        self.gram_w();
        self.den.iter_mut().for_each(|v| *v = 0.0);
        for k in 0..n {
            for l in 0..n {
                axpy(&mut self.den[k * t..(k + 1) * t], self.wtw[k * n + l], &self.c[l * t..(l + 1) * t]);
            }
        }
        for ((c, &num), &den) in self.c.iter_mut().zip(&self.wte).zip(&self.den) {
            *c *= num / den.max(EPS);
        }
    }

    fn update_w(&mut self) {
        let (m, n, t) = (self.m, self.n, self.t);
        for i in 0..m {
            let ei = &self.e[i * t..(i + 1) * t];
            for k in 0..n {
                self.ect[i * n + k] = dot(ei, &self.c[k * t..(k + 1) * t]);
            }
        }
        for a in 0..n {
            for b in a..n {
                let v = dot(&self.c[a * t..(a + 1) * t], &self.c[b * t..(b + 1) * t]);
                self.cct[a * n + b] = v;
                self.cct[b * n + a] = v;
            }
        }
        let mut row = vec![0.0; n];
        for i in 0..m {
            row.copy_from_slice(&self.w[i * n..(i + 1) * n]);
            for k in 0..n {
                let den: f64 = (0..n).map(|l| row[l] * self.cct[l * n + k]).sum();
                self.w[i * n + k] *= self.ect[i * n + k] / den.max(EPS);
            }
        }
    }

    /// ‖E − WC‖ from the products left by `update_w`, falling back to the
    /// direct sum when cancellation would dominate.
    fn objective_after_update(&mut self) -> f64 {
        self.gram_w();
        let cross = dot(&self.w, &self.ect);
        let quad = dot(&self.wtw, &self.cct);
        let sq = self.e_sq - 2.0 * cross + quad;
        if sq > 1e-8 * self.e_sq {
            sq.sqrt()
        } else {
            self.residual()
        }
    }
}

/// Lee-Seung updates for the Frobenius loss from the given start point.
pub fn multiplicative_updates(
    e: ArrayView2<f64>,
    w: Array2<f64>,
    c: Array2<f64>,
    tol: f64,
    max_iter: usize,
) -> UpdateRun {
    let (m, t) = e.dim();
    let n = w.ncols();
    let mut work = Work::new(e, &w, &c);
    let mut history = Vec::with_capacity(max_iter.min(4096) + 1);
    let mut prev = work.residual();
    history.push(prev);
    for _ in 0..max_iter {
        work.update_c();
        work.update_w();
        let obj = work.objective_after_update();
        history.push(obj);
        let rel = if prev > 0.0 { (prev - obj).abs() / prev } else { 0.0 };
        prev = obj;
        if rel < tol {
            break;
        }
    }
    UpdateRun {
        w: Array2::from_shape_vec((m, n), work.w).expect("shape"),
        c: Array2::from_shape_vec((n, t), work.c).expect("shape"),
        history,
    }
}

fn check_input(e: ArrayView2<f64>, n: usize) -> Result<()> {
    let max = e.nrows().min(e.ncols());
    if n == 0 || n > max {
        return Err(Error::RankOutOfRange { rank: n, max });
    }
    if e.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("envelope matrix contains non-finite values".into()));
    }
    if e.iter().any(|&v| v < 0.0) {
        return Err(Error::NegativeEntries);
    }
    Ok(())
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

/// Random start in (0, 1] scaled by sqrt(mean(E) / n).
pub fn random_init(e: ArrayView2<f64>, n: usize, rng: &mut impl Rng) -> (Array2<f64>, Array2<f64>) {
    let (m, t) = e.dim();
    let scale = (e.mean().unwrap_or(0.0) / n as f64).sqrt();
    let w = Array2::from_shape_simple_fn((m, n), || (1.0 - rng.random::<f64>()) * scale);
    let c = Array2::from_shape_simple_fn((n, t), || (1.0 - rng.random::<f64>()) * scale);
    (w, c)
}

/// Single restart `restart` of the seeded sequence.
pub fn factorize_restart(e: ArrayView2<f64>, n: usize, cfg: &NnmfConfig, restart: usize) -> Result<UpdateRun> {
    check_input(e, n)?;
    let mut rng = restart_rng(cfg.seed, restart);
    let (w0, c0) = random_init(e, n, &mut rng);
    Ok(multiplicative_updates(e, w0, c0, cfg.tol, cfg.max_iter))
}

/// Best of `cfg.restarts` seeded runs (lowest objective, ties to the lowest
/// restart index).
pub fn factorize(e: ArrayView2<f64>, n: usize, cfg: &NnmfConfig, exec: Execution) -> Result<Factorization> {
    cfg.validate()?;
    check_input(e, n)?;
    let (m, t) = e.dim();
    if e.iter().all(|&v| v == 0.0) {
        return Ok(Factorization {
            w: Array2::zeros((m, n)),
            c: Array2::zeros((n, t)),
            rank: n,
            objective: 0.0,
            restarts_used: cfg.restarts,
            best_restart: 0,
            iterations: 0,
            seed: cfg.seed,
        });
    }
    let runs = map_range(cfg.restarts, exec, |r| {
        let mut rng = restart_rng(cfg.seed, r);
        let (w0, c0) = random_init(e, n, &mut rng);
        multiplicative_updates(e, w0, c0, cfg.tol, cfg.max_iter)
    });
    let (best, run) = runs
        .into_iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| {
            a.history.last().unwrap().total_cmp(b.history.last().unwrap()).then(i.cmp(j))
        })
        .expect("at least one restart");
    let objective = frobenius_residual(e, run.w.view(), run.c.view());
    Ok(Factorization {
        iterations: run.history.len() - 1,
        w: run.w,
        c: run.c,
        rank: n,
        objective,
        restarts_used: cfg.restarts,
        best_restart: best,
        seed: cfg.seed,
    })
}

/// 1 − ‖E − W·C‖² / ‖E‖².
pub fn vaf(e: ArrayView2<f64>, w: ArrayView2<f64>, c: ArrayView2<f64>) -> Result<f64> {
    let wc = w.dot(&c);
    if wc.dim() != e.dim() {
        return Err(Error::ShapeMismatch(format!("E is {:?} but W·C is {:?}", e.dim(), wc.dim())));
    }
    let total: f64 = e.iter().map(|v| v * v).sum();
    if total == 0.0 {
        return Err(Error::UndefinedVaf);
    }
    let resid: f64 = e.iter().zip(wc.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(1.0 - resid / total)
}

/// VAF per rank and the selected synergy count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VafCurve {
    pub vaf_by_rank: BTreeMap<usize, f64>,
    pub selected_rank: usize,
    /// Set when no rank met both the threshold and the plateau rule.
    pub flagged: bool,
}

impl VafCurve {
    pub fn values(&self) -> Vec<f64> {
        self.vaf_by_rank.values().copied().collect()
    }
}

/// Applies the selection rule to VAF values for ranks 1..=len.
///
/// Picks the smallest n with VAF(n) ≥ `threshold` and VAF(n+1) − VAF(n) <
/// `growth`; the last scanned rank passes the growth test trivially. Falls
/// back to the smallest rank above threshold (or the last rank), flagged.
pub fn select_from_curve(vafs: &[f64], threshold: f64, growth: f64) -> (usize, bool) {
    let k = vafs.len();
    for n in 0..k {
        let plateau = n + 1 == k || vafs[n + 1] - vafs[n] < growth;
        if vafs[n] >= threshold && plateau {
            return (n + 1, false);
        }
    }
    match vafs.iter().position(|&v| v >= threshold) {
        Some(n) => (n + 1, true),
        None => (k.max(1), true),
    }
}

pub fn curve_from_values(vafs: &[f64], cfg: &NnmfConfig) -> VafCurve {
    let (selected_rank, flagged) = select_from_curve(vafs, cfg.vaf_threshold, cfg.growth_threshold);
    VafCurve { vaf_by_rank: vafs.iter().enumerate().map(|(i, &v)| (i + 1, v)).collect(), selected_rank, flagged }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankScan {
    pub curve: VafCurve,
    /// Best factorization per rank, index 0 is rank 1.
    pub factorizations: Vec<Factorization>,
}

impl RankScan {
    pub fn at_rank(&self, n: usize) -> Option<&Factorization> {
        n.checked_sub(1).and_then(|i| self.factorizations.get(i))
    }
}

fn resolve_max_rank(e: ArrayView2<f64>, max_rank: Option<usize>) -> Result<usize> {
    let limit = e.nrows().min(e.ncols());
    let k = max_rank.unwrap_or(e.nrows()).min(limit.max(1));
    if k == 0 || max_rank.is_some_and(|r| r > limit) {
        return Err(Error::RankOutOfRange { rank: max_rank.unwrap_or(0), max: limit });
    }
    Ok(k)
}

/// Factorizes at every rank 1..=max_rank and selects the synergy count.
pub fn scan_ranks(e: ArrayView2<f64>, cfg: &NnmfConfig, exec: Execution) -> Result<RankScan> {
    cfg.validate()?;
    let k = resolve_max_rank(e, cfg.max_rank)?;
    let factorizations = try_map_range(k, exec, |i| factorize(e, i + 1, cfg, exec))?;
    let vafs = factorizations.iter().map(|f| vaf(e, f.w.view(), f.c.view())).collect::<Result<Vec<_>>>()?;
    Ok(RankScan { curve: curve_from_values(&vafs, cfg), factorizations })
}

pub fn select_rank(e: ArrayView2<f64>, cfg: &NnmfConfig, exec: Execution) -> Result<VafCurve> {
    scan_ranks(e, cfg, exec).map(|s| s.curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    fn planted(m: usize, n: usize, t: usize, seed: u64) -> (Array2<f64>, Array2<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = Array2::from_shape_simple_fn((m, n), || rng.random::<f64>());
        let c = Array2::from_shape_simple_fn((n, t), || rng.random::<f64>());
        (w, c)
    }

    fn quick() -> NnmfConfig {
        NnmfConfig { restarts: 5, max_iter: 3000, tol: 1e-9, ..Default::default() }
    }

    #[test]
    fn planted_rank_two_recovered() {
        let (w, c) = planted(8, 2, 500, 1);
        let e = w.dot(&c);
        let f = factorize(e.view(), 2, &quick(), Execution::Sequential).unwrap();
        assert!(vaf(e.view(), f.w.view(), f.c.view()).unwrap() >= 0.999);
        assert!(f.w.iter().chain(f.c.iter()).all(|&v| v >= 0.0));
    }

    #[test]
    fn planted_rank_one_reconstructs() {
        let (w, c) = planted(8, 1, 300, 2);
        let e = w.dot(&c);
        let f = factorize(e.view(), 1, &quick(), Execution::Sequential).unwrap();
        let rel = f.objective / e.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(rel < 1e-3, "{rel}");
    }

    #[test]
    fn zero_matrix_gives_zero_factors() {
        let e = Array2::<f64>::zeros((8, 50));
        let f = factorize(e.view(), 2, &quick(), Execution::Sequential).unwrap();
        assert_eq!(f.objective, 0.0);
        assert!(f.reconstruction().iter().all(|&v| v == 0.0));
        assert!(matches!(vaf(e.view(), f.w.view(), f.c.view()), Err(Error::UndefinedVaf)));
    }

    #[test]
    fn stored_objective_matches_factors() {
        let (w, c) = planted(6, 3, 80, 3);
        let e = w.dot(&c) + 0.05;
        let f = factorize(e.view(), 2, &quick(), Execution::Sequential).unwrap();
        let direct = frobenius_residual(e.view(), f.w.view(), f.c.view());
        assert!((f.objective - direct).abs() <= 1e-9 * direct);
    }

    #[test]
    fn invalid_inputs() {
        let e = Array2::<f64>::ones((3, 4));
        assert!(matches!(factorize(e.view(), 4, &quick(), Execution::Sequential), Err(Error::RankOutOfRange { .. })));
        assert!(matches!(factorize(e.view(), 0, &quick(), Execution::Sequential), Err(Error::RankOutOfRange { .. })));
        let mut neg = e.clone();
        neg[[1, 1]] = -0.1;
        assert!(matches!(factorize(neg.view(), 1, &quick(), Execution::Sequential), Err(Error::NegativeEntries)));
    }

    #[test]
    fn vaf_examples() {
        let e = Array2::from_elem((1, 1), 2.0);
        let w = Array2::from_elem((1, 1), 1.0);
        assert!((vaf(e.view(), w.view(), w.view()).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(vaf(e.view(), Array2::zeros((1, 1)).view(), w.view()).unwrap(), 0.0);
        let (pw, pc) = planted(4, 2, 10, 9);
        assert_eq!(vaf(pw.dot(&pc).view(), pw.view(), pc.view()).unwrap(), 1.0);
    }

    #[test]
    fn selection_rule_examples() {
        assert_eq!(select_from_curve(&[0.85, 0.94, 0.95], 0.9, 0.03), (2, false));
        assert_eq!(select_from_curve(&[0.91, 0.95, 0.96], 0.9, 0.03), (2, false));
        // every step still grows by more than 3 points
        assert_eq!(select_from_curve(&[0.80, 0.91, 0.95], 0.9, 0.03), (3, false));
        assert_eq!(select_from_curve(&[0.5, 0.6, 0.7], 0.9, 0.03), (3, true));
    }

    #[test]
    fn rank_one_matrix_selects_one() {
        let (w, c) = planted(8, 1, 101, 4);
        let e = w.dot(&c);
        let cfg = NnmfConfig { restarts: 3, max_rank: Some(3), ..Default::default() };
        assert_eq!(select_rank(e.view(), &cfg, Execution::Sequential).unwrap().selected_rank, 1);
    }

    #[test]
    fn noisy_two_synergy_selects_two() {
        let mut w = Array2::zeros((8, 2));
        for i in 0..8 {
            w[[i, 0]] = if i < 4 { 1.0 - 0.1 * i as f64 } else { 0.02 };
            w[[i, 1]] = if i >= 4 { 0.5 + 0.1 * (i - 4) as f64 } else { 0.03 };
        }
        let c = Array2::from_shape_fn((2, 101), |(k, j)| {
            let phase = j as f64 / 100.0;
            let center = if k == 0 { 0.25 } else { 0.7 };
            (-(phase - center).powi(2) / 0.01).exp() + 0.05
        });
        let clean = w.dot(&c);
        let power = clean.iter().map(|v| v * v).sum::<f64>() / clean.len() as f64;
        let sd = (power / 100.0).sqrt();
        let normal = Normal::new(0.0, sd).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let e = clean.mapv(|v| (v + normal.sample(&mut rng)).abs());
        let cfg = NnmfConfig { restarts: 5, ..Default::default() };
        assert_eq!(select_rank(e.view(), &cfg, Execution::Sequential).unwrap().selected_rank, 2);
    }

    #[test]
    fn parallel_and_sequential_agree_bitwise() {
        let (w, c) = planted(8, 2, 101, 6);
        let e = w.dot(&c) + 0.01;
        let a = factorize(e.view(), 3, &quick(), Execution::Sequential).unwrap();
        let b = factorize(e.view(), 3, &quick(), Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
