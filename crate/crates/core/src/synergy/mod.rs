//! L2 normalization of synergy factors, cosine matching and group statistics.

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nnmf::Factorization;
use crate::util::{mean, sample_std};

/// Unit-norm synergy vectors `w` with activations `c` rescaled so that
/// `w·c` equals the original product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedSynergy {
    pub w: Array2<f64>,
    pub c: Array2<f64>,
    /// Column norms of the raw W.
    pub d: Vec<f64>,
}

impl NormalizedSynergy {
    pub fn rank(&self) -> usize {
        self.w.ncols()
    }

    /// Columns of `w` (and rows of `c`) taken in `order`.
    pub fn reordered(&self, order: &[usize]) -> Self {
        Self {
            w: self.w.select(Axis(1), order),
            c: self.c.select(Axis(0), order),
            d: order.iter().map(|&k| self.d[k]).collect(),
        }
    }

    /// Contributions as shares of each column's L1 sum.
    pub fn l1_shares(&self) -> Array2<f64> {
        l1_shares(self.w.view())
    }
}

pub fn normalize_factors(w: ArrayView2<f64>, c: ArrayView2<f64>) -> Result<NormalizedSynergy> {
    if w.ncols() != c.nrows() {
        return Err(Error::ShapeMismatch(format!("W has {} columns but C has {} rows", w.ncols(), c.nrows())));
    }
    let d: Vec<f64> = w.columns().into_iter().map(|col| col.dot(&col).sqrt()).collect();
    if let Some(column) = d.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::DegenerateSynergy { column });
    }
    let mut wn = w.to_owned();
    let mut cn = c.to_owned();
    for (k, &dk) in d.iter().enumerate() {
        wn.column_mut(k).mapv_inplace(|v| v / dk);
        cn.row_mut(k).mapv_inplace(|v| v * dk);
    }
    Ok(NormalizedSynergy { w: wn, c: cn, d })
}

pub fn normalize(f: &Factorization) -> Result<NormalizedSynergy> {
    normalize_factors(f.w.view(), f.c.view())
}

pub fn l1_shares(w: ArrayView2<f64>) -> Array2<f64> {
    let mut out = w.to_owned();
    for mut col in out.columns_mut() {
        let s: f64 = col.iter().map(|v| v.abs()).sum();
        if s > 0.0 {
            col.mapv_inplace(|v| v / s);
        }
    }
    out
}

pub fn cosine_similarity(a: ArrayView1<f64>, b: ArrayView1<f64>) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch(format!("vectors of length {} and {}", a.len(), b.len())));
    }
    let na = a.dot(&a).sqrt();
    let nb = b.dot(&b).sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((a.dot(&b) / (na * nb)).clamp(-1.0, 1.0))
}

/// Assignment of candidate columns to reference slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynergyLabeling {
    /// `order[k]` is the candidate column placed in slot k (Synergy I first).
    pub order: Vec<usize>,
    /// Cosine similarity of each slot to the reference column.
    pub similarity: Vec<f64>,
    /// True when the BIC rule overrode the best cosine assignment.
    pub relabeled: bool,
}

fn similarity_matrix(reference: ArrayView2<f64>, candidate: ArrayView2<f64>) -> Result<Array2<f64>> {
    let n = reference.ncols();
    let mut s = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            s[[i, j]] = cosine_similarity(reference.column(i), candidate.column(j))?;
        }
    }
    Ok(s)
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let Some(i) = (0..n - 1).rev().find(|&i| p[i] < p[i + 1]) else { return false };
    let j = (i + 1..n).rev().find(|&j| p[j] > p[i]).expect("successor exists");
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

/// Permutation of candidate columns maximizing total cosine similarity to
/// the reference columns.
///
/// Exhaustive up to 8 synergies, lexicographically first on ties; greedy
/// beyond that.
pub fn best_permutation(reference: ArrayView2<f64>, candidate: ArrayView2<f64>) -> Result<(Vec<usize>, Vec<f64>)> {
    if reference.dim() != candidate.dim() {
        return Err(Error::ShapeMismatch(format!(
            "reference {:?} vs candidate {:?}",
            reference.dim(),
            candidate.dim()
        )));
    }
    let n = reference.ncols();
    let s = similarity_matrix(reference, candidate)?;
    let order = if n <= 8 {
        let mut p: Vec<usize> = (0..n).collect();
        let mut best = p.clone();
        let mut best_score = f64::NEG_INFINITY;
        loop {
            let score: f64 = p.iter().enumerate().map(|(i, &j)| s[[i, j]]).sum();
            if score > best_score + 1e-15 {
                best_score = score;
                best.clone_from(&p);
            }
            if !next_permutation(&mut p) {
                break;
            }
        }
        best
    } else {
        let mut used = vec![false; n];
        let mut filled = vec![false; n];
        let mut order = vec![0; n];
        for _ in 0..n {
            let (mut bi, mut bj, mut bv) = (0, 0, f64::NEG_INFINITY);
            for i in (0..n).filter(|&i| !filled[i]) {
                for j in (0..n).filter(|&j| !used[j]) {
                    if s[[i, j]] > bv {
                        (bi, bj, bv) = (i, j, s[[i, j]]);
                    }
                }
            }
            used[bj] = true;
            filled[bi] = true;
            order[bi] = bj;
        }
        order
    };
    let sims = order.iter().enumerate().map(|(i, &j)| s[[i, j]]).collect();
    Ok((order, sims))
}

fn argmax_row(w: ArrayView2<f64>, row: usize) -> usize {
    let r = w.row(row);
    (0..r.len()).fold(0, |best, k| if r[k] > r[best] { k } else { best })
}

/// Order that puts the column with the largest `bic_row` weight first and
/// keeps the rest in their current order.
pub fn label_by_bic(s: &NormalizedSynergy, bic_row: usize) -> SynergyLabeling {
    let first = argmax_row(s.w.view(), bic_row);
    let mut order = vec![first];
    order.extend((0..s.rank()).filter(|&k| k != first));
    SynergyLabeling { similarity: vec![1.0; order.len()], relabeled: first != 0, order }
}

/// Matches candidate columns to an already labeled reference, then enforces
/// that Synergy I is the candidate's highest-BIC column.
pub fn match_synergies(
    reference: &NormalizedSynergy,
    candidate: &NormalizedSynergy,
    bic_row: usize,
) -> Result<SynergyLabeling> {
    if reference.rank() != candidate.rank() {
        return Err(Error::ShapeMismatch(format!(
            "synergy counts differ: {} vs {}",
            reference.rank(),
            candidate.rank()
        )));
    }
    let (mut order, _) = best_permutation(reference.w.view(), candidate.w.view())?;
    let top = argmax_row(candidate.w.view(), bic_row);
    let relabeled = order[0] != top;
    if relabeled {
        let pos = order.iter().position(|&k| k == top).expect("permutation");
        order.swap(0, pos);
    }
    let similarity = order
        .iter()
        .enumerate()
        .map(|(i, &j)| cosine_similarity(reference.w.column(i), candidate.w.column(j)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SynergyLabeling { order, similarity, relabeled })
}

/// Elementwise mean and sample standard deviation of labeled `w` matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSynergyStats {
    pub mean: Array2<f64>,
    pub std: Array2<f64>,
    pub n_subjects: usize,
}

pub fn group_synergy_stats(labeled: &[NormalizedSynergy]) -> Result<GroupSynergyStats> {
    if labeled.len() < 2 {
        return Err(Error::InsufficientSubjects { needed: 2, found: labeled.len() });
    }
    let dim = labeled[0].w.dim();
    if let Some(bad) = labeled.iter().find(|s| s.w.dim() != dim) {
        return Err(Error::ShapeMismatch(format!("w shapes {:?} and {:?}", dim, bad.w.dim())));
    }
    let mut m = Array2::zeros(dim);
    let mut sd = Array2::zeros(dim);
    for ((i, j), v) in m.indexed_iter_mut() {
        let vals: Vec<f64> = labeled.iter().map(|s| s.w[[i, j]]).collect();
        *v = mean(&vals);
        sd[[i, j]] = sample_std(&vals);
    }
    Ok(GroupSynergyStats { mean: m, std: sd, n_subjects: labeled.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array1};

    fn synergy(w: Array2<f64>) -> NormalizedSynergy {
        let c = Array2::ones((w.ncols(), 5));
        normalize_factors(w.view(), c.view()).unwrap()
    }

    #[test]
    fn three_four_five() {
        let mut w = Array2::zeros((8, 1));
        w[[0, 0]] = 3.0;
        w[[1, 0]] = 4.0;
        let s = synergy(w);
        assert!((s.w[[0, 0]] - 0.6).abs() < 1e-15 && (s.w[[1, 0]] - 0.8).abs() < 1e-15);
        assert_eq!(s.d, vec![5.0]);
        assert!(s.c.iter().all(|&v| v == 5.0));
    }

    #[test]
    fn unit_columns_untouched() {
        let w = array![[1.0, 0.0], [0.0, 1.0]];
        let s = synergy(w.clone());
        assert_eq!(s.d, vec![1.0, 1.0]);
        assert_eq!(s.w, w);
    }

    #[test]
    fn zero_column_is_degenerate() {
        let w = array![[1.0, 0.0], [2.0, 0.0]];
        let c = Array2::ones((2, 3));
        assert!(matches!(normalize_factors(w.view(), c.view()), Err(Error::DegenerateSynergy { column: 1 })));
    }

    #[test]
    fn cosine_examples() {
        let v = |x: &[f64]| Array1::from(x.to_vec());
        assert!((cosine_similarity(v(&[1.0, 2.0]).view(), v(&[1.0, 2.0]).view()).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine_similarity(v(&[1.0, 0.0]).view(), v(&[0.0, 1.0]).view()).unwrap(), 0.0);
        let c = cosine_similarity(v(&[1.0, 1.0]).view(), v(&[1.0, 0.0]).view()).unwrap();
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(matches!(cosine_similarity(v(&[0.0, 0.0]).view(), v(&[1.0, 0.0]).view()), Err(Error::ZeroVector)));
    }

    #[test]
    fn swapped_columns_unswapped() {
        let r = synergy(array![[0.9, 0.1], [0.3, 0.2], [0.1, 0.9]]);
        let c = r.reordered(&[1, 0]);
        let lab = match_synergies(&r, &c, 0).unwrap();
        assert_eq!(lab.order, vec![1, 0]);
        assert!(lab.similarity.iter().all(|&s| (s - 1.0).abs() < 1e-12));
        assert!(!lab.relabeled);
    }

    #[test]
    fn bic_rule_picks_synergy_one() {
        let s = synergy(array![[0.2, 0.9], [0.9, 0.1], [0.3, 0.3]]);
        assert_eq!(label_by_bic(&s, 0).order, vec![1, 0]);
    }

    #[test]
    fn group_stats_two_point() {
        let a = NormalizedSynergy { w: array![[0.8]], c: array![[1.0]], d: vec![1.0] };
        let b = NormalizedSynergy { w: array![[0.9]], c: array![[1.0]], d: vec![1.0] };
        let g = group_synergy_stats(&[a.clone(), b]).unwrap();
        assert!((g.mean[[0, 0]] - 0.85).abs() < 1e-12);
        assert!((g.std[[0, 0]] - 0.070_710_678_118_654_76).abs() < 1e-12);
        assert!(matches!(group_synergy_stats(&[a]), Err(Error::InsufficientSubjects { .. })));
    }

    #[test]
    fn identical_subjects_zero_std() {
        let s = synergy(array![[0.8, 0.1], [0.2, 0.5], [0.1, 0.7]]);
        let g = group_synergy_stats(&vec![s; 12]).unwrap();
        assert!(g.std.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn shares_sum_to_one() {
        let s = synergy(array![[0.8, 0.1], [0.2, 0.5], [0.1, 0.7]]);
        for col in s.l1_shares().columns() {
            assert!((col.sum() - 1.0).abs() < 1e-12);
        }
    }
}
