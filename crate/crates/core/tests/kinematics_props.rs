use curlsyn::domain::joint_labels;
use curlsyn::kinematics::*;
use curlsyn::Condition;
use ndarray::{s, Array2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use std::f64::consts::TAU;

fn subjects(n_subj: usize, j: usize, ell: usize, seed: u64) -> Vec<Array2<f64>> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n_subj).map(|_| Array2::from_shape_simple_fn((j, ell), || rng.random_range(-90.0..150.0))).collect()
}

/// Elbow-like curl trajectory sampled at 100 Hz with per-cycle periods.
fn curl_trial(periods: &[f64], rate: f64) -> JointTrajectorySet {
    let mut elbow = Vec::new();
    for &p in periods {
        let n = (p * rate).round() as usize;
        elbow.extend((0..n).map(|i| 100.0 + 50.0 * (TAU * i as f64 / n as f64).cos()));
    }
    elbow.push(150.0);
    elbow.extend(std::iter::repeat(120.0).take(10));
    let len = elbow.len();
    let mut angles = Array2::zeros((4, len));
    angles.row_mut(0).assign(&ndarray::Array1::from(elbow));
    JointTrajectorySet::new(angles, rate, joint_labels(), Condition::Standard, "s").unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn deviations_from_group_mean_sum_to_zero(n in 2usize..15, j in 1usize..5, ell in 2usize..60, seed in any::<u64>()) {
        let subs = subjects(n, j, ell, seed);
        let m = group_average(&subs).unwrap();
        let mut total = Array2::<f64>::zeros((j, ell));
        for s in &subs {
            total += &(s - &m);
        }
        prop_assert!(total.iter().all(|v| v.abs() < 1e-9), "{:?}", total.iter().fold(0.0f64, |a, b| a.max(b.abs())));
    }

    #[test]
    fn normalizing_commutes_with_averaging(k in 2usize..6, len in 4usize..200, ell in 2usize..120, seed in any::<u64>(),
                                           linear in any::<bool>()) {
        let method = if linear { Interpolation::Linear } else { Interpolation::Spline };
        let cycles = subjects(k, 3, len, seed);
        let normalized: Vec<NormalizedCycle> = cycles
            .iter()
            .map(|c| NormalizedCycle { phase_angles: time_normalize(c.view(), ell, method).unwrap(), cycle_index: 0 })
            .collect();
        let a = average_cycles(&normalized).unwrap().phase_angles;
        let b = time_normalize(group_average(&cycles).unwrap().view(), ell, method).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            prop_assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn group_mean_has_zero_signed_similarity(j in 1usize..5, ell in 2usize..60, seed in any::<u64>()) {
        let m = subjects(1, j, ell, seed).remove(0);
        let labels: Vec<String> = (0..j).map(|i| format!("j{i}")).collect();
        let t = similarity_discrepancy(&[m.clone(), m.clone(), m.clone()], &m, &labels).unwrap();
        for js in &t.joints {
            prop_assert!(js.signed.iter().all(|&v| v == 0.0));
            prop_assert_eq!(js.signed_mean, 0.0);
        }
    }

    #[test]
    fn common_offset_leaves_metrics_unchanged(n in 2usize..12, ell in 2usize..40, seed in any::<u64>(), offset in -90.0f64..90.0) {
        let subs = subjects(n, 4, ell, seed);
        let shifted: Vec<Array2<f64>> = subs.iter().map(|s| s + offset).collect();
        let labels = joint_labels();
        let (m, ms) = (group_average(&subs).unwrap(), group_average(&shifted).unwrap());
        let (a, b) = (similarity_discrepancy(&subs, &m, &labels).unwrap(), similarity_discrepancy(&shifted, &ms, &labels).unwrap());
        for (x, y) in a.joints.iter().zip(&b.joints) {
            for (p, q) in [(x.signed_mean, y.signed_mean), (x.signed_sd, y.signed_sd), (x.absolute_mean, y.absolute_mean), (x.absolute_sd, y.absolute_sd)] {
                prop_assert!((p - q).abs() < 1e-9, "{p} vs {q}");
            }
        }
        for (p, q) in range_of_motion(&m).iter().zip(range_of_motion(&ms)) {
            prop_assert!((p - q).abs() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn reversed_signal_gives_mirrored_boundaries(periods in prop::collection::vec(3.6f64..4.4, 5)) {
        let traj = curl_trial(&periods, 100.0);
        let cfg = KinConfig::default().segment_config();
        let fwd = segment_cycles(&traj, 5, &cfg).unwrap();
        let rev = traj.with_angles(traj.angles.slice(s![.., ..;-1]).to_owned());
        let back = segment_cycles(&rev, 5, &cfg).unwrap();
        let last = traj.len() - 1;
        for (a, b) in fwd.boundaries.iter().zip(back.boundaries.iter().rev()) {
            prop_assert!((*a as i64 - (last - b) as i64).abs() <= 1, "{a} vs {}", last - b);
        }
    }
}
