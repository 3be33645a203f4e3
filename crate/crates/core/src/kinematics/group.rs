use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::NormalizedCycle;
use crate::error::{Error, Result};
use crate::util::{mean, sample_std};

fn elementwise_mean(items: &[&Array2<f64>]) -> Result<Array2<f64>> {
    let first = items.first().ok_or(Error::InsufficientSubjects { needed: 1, found: 0 })?;
    let dim = first.dim();
    if let Some(bad) = items.iter().find(|a| a.dim() != dim) {
        return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", dim, bad.dim())));
    }
    let mut buf = vec![0.0; items.len()];
    Ok(Array2::from_shape_fn(dim, |ix| {
        for (b, a) in buf.iter_mut().zip(items) {
            *b = a[ix];
        }
        mean(&buf)
    }))
}

/// Pointwise mean of the repetitions of one trial.
pub fn average_cycles(cycles: &[NormalizedCycle]) -> Result<NormalizedCycle> {
    let refs: Vec<&Array2<f64>> = cycles.iter().map(|c| &c.phase_angles).collect();
    Ok(NormalizedCycle { phase_angles: elementwise_mean(&refs)?, cycle_index: 0 })
}

/// Pointwise mean across subjects.
pub fn group_average(subjects: &[Array2<f64>]) -> Result<Array2<f64>> {
    elementwise_mean(&subjects.iter().collect::<Vec<_>>())
}

/// Per-joint agreement of subjects with the group mean trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointSimilarity {
    pub joint: String,
    /// mean(J̄ − J_i) per subject.
    pub signed: Vec<f64>,
    pub signed_mean: f64,
    pub signed_sd: f64,
    /// mean|J̄ − J_i| per subject.
    pub absolute: Vec<f64>,
    pub absolute_mean: f64,
    pub absolute_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityTable {
    pub joints: Vec<JointSimilarity>,
}

impl SimilarityTable {
    pub fn joint(&self, label: &str) -> Option<&JointSimilarity> {
        self.joints.iter().find(|j| j.joint == label)
    }
}

pub fn similarity_discrepancy(
    subjects: &[Array2<f64>],
    group_mean: &Array2<f64>,
    joint_labels: &[String],
) -> Result<SimilarityTable> {
    if subjects.len() < 2 {
        return Err(Error::InsufficientSubjects { needed: 2, found: subjects.len() });
    }
    if joint_labels.len() != group_mean.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "{} joint labels for {} rows",
            joint_labels.len(),
            group_mean.nrows()
        )));
    }
    if let Some(bad) = subjects.iter().find(|s| s.dim() != group_mean.dim()) {
        return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", group_mean.dim(), bad.dim())));
    }
    let ell = group_mean.ncols() as f64;
    let joints = joint_labels
        .iter()
        .enumerate()
        .map(|(j, label)| {
            let m = group_mean.row(j);
            let signed: Vec<f64> =
                subjects.iter().map(|s| m.iter().zip(s.row(j)).map(|(a, b)| a - b).sum::<f64>() / ell).collect();
            let absolute: Vec<f64> = subjects
                .iter()
                .map(|s| m.iter().zip(s.row(j)).map(|(a, b)| (a - b).abs()).sum::<f64>() / ell)
                .collect();
            JointSimilarity {
                joint: label.clone(),
                signed_mean: mean(&signed),
                signed_sd: sample_std(&signed),
                absolute_mean: mean(&absolute),
                absolute_sd: sample_std(&absolute),
                signed,
                absolute,
            }
        })
        .collect();
    Ok(SimilarityTable { joints })
}

/// max − min per row.
pub fn range_of_motion(traj: &Array2<f64>) -> Vec<f64> {
    traj.rows()
        .into_iter()
        .map(|r| {
            let (lo, hi) = r.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
            hi - lo
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant(v: f64) -> Array2<f64> {
        Array2::from_elem((1, 101), v)
    }

    #[test]
    fn identical_cycles_average_to_themselves() {
        let c = NormalizedCycle { phase_angles: Array2::from_shape_fn((2, 101), |(r, k)| (r * k) as f64 * 0.37), cycle_index: 0 };
        let avg = average_cycles(&vec![c.clone(); 5]).unwrap();
        assert_eq!(avg.phase_angles, c.phase_angles);
    }

    #[test]
    fn offsets_average_to_midline() {
        let a = NormalizedCycle { phase_angles: constant(12.0), cycle_index: 0 };
        let b = NormalizedCycle { phase_angles: constant(8.0), cycle_index: 1 };
        assert!(average_cycles(&[a, b]).unwrap().phase_angles.iter().all(|&v| v == 10.0));
        assert!(average_cycles(&[]).is_err());
    }

    #[test]
    fn single_subject_group_is_itself() {
        let s = Array2::from_shape_fn((4, 101), |(r, k)| r as f64 - k as f64);
        assert_eq!(group_average(std::slice::from_ref(&s)).unwrap(), s);
    }

    #[test]
    fn plus_minus_three() {
        let subjects = vec![constant(13.0), constant(7.0)];
        let m = group_average(&subjects).unwrap();
        let t = similarity_discrepancy(&subjects, &m, &["j".to_string()]).unwrap();
        let j = &t.joints[0];
        let mut signed = j.signed.clone();
        signed.sort_by(f64::total_cmp);
        assert_eq!(signed, vec![-3.0, 3.0]);
        assert_eq!(j.signed_mean, 0.0);
        assert!((j.signed_sd - 3.0 * 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(j.absolute, vec![3.0, 3.0]);
    }

    #[test]
    fn identical_subjects_zero() {
        let s = Array2::from_shape_fn((2, 101), |(r, k)| (r as f64 + 0.1) * (k as f64 * 0.07).sin());
        let subjects = vec![s; 12];
        let m = group_average(&subjects).unwrap();
        let t = similarity_discrepancy(&subjects, &m, &["a".into(), "b".into()]).unwrap();
        for j in &t.joints {
            assert_eq!((j.signed_mean, j.signed_sd, j.absolute_mean, j.absolute_sd), (0.0, 0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn rom_is_span() {
        let t = Array2::from_shape_vec((1, 4), vec![3.0, -2.0, 7.5, 1.0]).unwrap();
        assert_eq!(range_of_motion(&t), vec![9.5]);
    }
}
