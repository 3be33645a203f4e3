//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use curlsyn::domain::{muscle_labels, SHOULDER_ELEV_DEP};
use curlsyn::kinematics::{group_average, similarity_discrepancy};
use curlsyn::nnmf::{scan_ranks, NnmfConfig};
use curlsyn::pipeline::*;
use curlsyn::signal::{median_frequency_of, rms_amplitude, welch_psd, BandPass, EmgRecording, PsdConfig};
use curlsyn::stats::{signed_rank_distribution, wilcoxon_signed_rank, PairedSample, TestMethod};
use curlsyn::synergy::{best_permutation, normalize_factors};
use curlsyn::synth::*;
use curlsyn::{Condition, Execution};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

const FS: f64 = 1000.0;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn kinematics_only(conditions: &[Condition]) -> StudyConfig {
    let mut cfg = StudyConfig::default();
    cfg.synergies = false;
    cfg.conditions = conditions.to_vec();
    cfg
}

fn planted_recovery() -> Outcome {
    let spec = default_paper_scenario();
    let src = SyntheticSource::new(spec.clone());
    let start = Instant::now();
    let report = analyze_study(&StudyConfig::default(), &src, &src.subjects()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let sec = report.synergy.as_ref().ok_or("no synergy section")?;

    let ranks: Vec<usize> = sec.vaf_curves.iter().flat_map(|c| c.subject_ranks.iter().copied()).collect();
    let hits = ranks.iter().filter(|&&r| r == 2).count();
    let share = hits as f64 / ranks.len() as f64;

    let mut worst = f64::INFINITY;
    for cs in &sec.conditions {
        for (k, s) in cs.subjects.iter().enumerate() {
            let planted = planted_synergies(&spec, k, cs.condition).map_err(|e| e.to_string())?;
            if s.w.len() != planted.ncols() {
                worst = worst.min(0.0);
                continue;
            }
            let recovered = Array2::from_shape_fn((planted.nrows(), s.w.len()), |(i, j)| s.w[j][i]);
            let (_, sims) = best_permutation(planted.view(), recovered.view()).map_err(|e| e.to_string())?;
            worst = sims.iter().copied().fold(worst, f64::min);
        }
    }
    check(
        share >= 0.95 && worst >= 0.95 && elapsed < Duration::from_secs(60),
        format!("rank 2 in {hits}/{} fits, min cosine {worst:.4}, {:.1} s", ranks.len(), elapsed.as_secs_f64()),
    )
}

fn vaf_correctness() -> Outcome {
    let spec = default_paper_scenario();
    let cfg = NnmfConfig { max_rank: Some(6), ..NnmfConfig::default() };
    let mut min_vaf2 = f64::INFINITY;
    let mut worst_drop = 0.0f64;
    for c in &spec.conditions {
        let w = Array2::from_shape_fn((spec.n_muscles(), c.n_synergies()), |(i, k)| c.planted_w[i][k]);
        let h = &c.activation_templates;
        let act = Array2::from_shape_fn((h.len(), h[0].len()), |(k, t)| h[k][t]);
        let e = w.dot(&act);
        let scan = scan_ranks(e.view(), &cfg, Execution::Sequential).map_err(|e| e.to_string())?;
        let vafs = scan.curve.values();
        min_vaf2 = min_vaf2.min(vafs[1]);
        for pair in vafs.windows(2) {
            worst_drop = worst_drop.max(pair[0] - pair[1]);
        }
    }
    check(min_vaf2 >= 0.999 && worst_drop <= 1e-3, format!("min VAF(2) {min_vaf2:.6}, largest drop {worst_drop:.2e}"))
}

/// p from counting every sign assignment of ranks 1..=n.
fn brute_force_p(t: f64, n: usize) -> f64 {
    let total: u32 = (n * (n + 1) / 2) as u32;
    let mut extreme = 0u64;
    for mask in 0u32..(1 << n) {
        let w_plus: u32 = (0..n).filter(|&i| mask & (1 << i) != 0).map(|i| i as u32 + 1).sum();
        if (w_plus.min(total - w_plus) as f64) <= t {
            extreme += 1;
        }
    }
    extreme as f64 / (1u64 << n) as f64
}

fn wilcoxon_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut mismatches = 0;
    for _ in 0..100 {
        let shift = rng.random_range(-1.0..1.0);
        let a: Vec<f64> = (0..12).map(|_| rng.random_range(0.0..10.0)).collect();
        let b: Vec<f64> = a.iter().map(|x| x + shift + rng.random_range(-2.0..2.0)).collect();
        let r = wilcoxon_signed_rank(&PairedSample::new(a, b, "x").map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        if r.method != TestMethod::WilcoxonExact || r.n_effective != 12 || r.p_value != brute_force_p(r.statistic, 12) {
            mismatches += 1;
        }
    }
    check(mismatches == 0, format!("{mismatches}/100 mismatches against 4096-pattern enumeration"))
}

fn one_channel(x: Vec<f64>) -> EmgRecording {
    let n = x.len();
    EmgRecording::new(Array2::from_shape_vec((1, n), x).unwrap(), FS, vec![muscle_labels()[0].clone()], Condition::Standard, "s")
        .unwrap()
}

fn spectral_metrics() -> Outcome {
    let tone: Vec<f64> = (0..10_000).map(|i| (TAU * 50.0 * i as f64 / FS).sin()).collect();
    let spec = welch_psd(&tone, FS, &PsdConfig::default()).map_err(|e| e.to_string())?;
    let mf = median_frequency_of(&spec).ok_or("no median frequency")?;
    let sine: Vec<f64> = (0..10_000).map(|i| 2.0 * (TAU * 10.0 * i as f64 / FS).sin()).collect();
    let r = rms_amplitude(&one_channel(sine)).map_err(|e| e.to_string())?[0];
    check(
        (mf - 50.0).abs() <= spec.bin_width() && (r - 2f64.sqrt()).abs() <= 1e-3,
        format!("tone median {mf:.3} Hz (bin {:.3} Hz), sine RMS {r:.6}", spec.bin_width()),
    )
}

fn fatigue_shift() -> Outcome {
    let spec = fatigue_shift_scenario(701);
    let ut = spec.muscle_labels.iter().position(|m| m == "UT").ok_or("no UT")?;
    let src = SyntheticSource::new(spec);
    let report = analyze_study(&kinematics_only(&[Condition::Standard, Condition::Fatigue]), &src, &src.subjects())
        .map_err(|e| e.to_string())?;
    let change = report.fatigue.change.as_ref().ok_or("no fatigue change")?;
    let ratio = 1.0 + change.rms_pct_mean[ut] / 100.0;
    let std_mf = report.fatigue_for(Condition::Standard).ok_or("no standard")?.median_freq_mean[ut];
    let expected_shift = -0.0701 * std_mf;
    let shift = change.median_freq_shift_hz_mean[ut];
    let test = report.statistics.test("rms:UT").ok_or("no rms:UT test")?;
    let p = test.wilcoxon.as_ref().map(|w| w.p_value).unwrap_or(1.0);
    check(
        (ratio / 2.272 - 1.0).abs() <= 0.03 && (shift - expected_shift).abs() <= 0.5 && p < 0.05,
        format!("UT RMS ratio {ratio:.4}, median shift {shift:.3} Hz vs {expected_shift:.3} Hz, Wilcoxon p {p:.2e}"),
    )
}

fn kinematics_table() -> Outcome {
    let src = SyntheticSource::new(default_paper_scenario());
    let report = analyze_study(&kinematics_only(&[Condition::Fatigue]), &src, &src.subjects()).map_err(|e| e.to_string())?;
    let table = report.kinematics_for(Condition::Fatigue).and_then(|k| k.table.as_ref()).ok_or("no table")?;
    let ed = table.joint(SHOULDER_ELEV_DEP).ok_or("no elevation row")?;
    let (m, s) = (ed.absolute_mean, ed.absolute_sd);

    let mut same = default_paper_scenario();
    same.n_subjects = 4;
    same.period_jitter = 0.0;
    same.variability = SubjectVariability::none();
    let src = SyntheticSource::new(same);
    let cfg = kinematics_only(&[Condition::Fatigue]);
    let mats = src
        .subjects()
        .iter()
        .map(|sub| analyze_trial(&src.load(sub, Condition::Fatigue)?, &cfg).map(|a| a.kin_cycle))
        .collect::<curlsyn::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    let mean = group_average(&mats).map_err(|e| e.to_string())?;
    let labels: Vec<String> = curlsyn::JOINTS.iter().map(|j| j.to_string()).collect();
    let zero = similarity_discrepancy(&mats, &mean, &labels).map_err(|e| e.to_string())?;
    let exact_zero = zero.joints.iter().all(|j| j.absolute_mean == 0.0 && j.absolute_sd == 0.0);
    check(
        (m / 5.32 - 1.0).abs() <= 0.15 && (s / 6.45 - 1.0).abs() <= 0.15 && exact_zero,
        format!("Fatigue elevation row {m:.3}/{s:.3}, identical cohort exactly zero: {exact_zero}"),
    )
}

fn detection_verdicts() -> Outcome {
    let cfg = kinematics_only(&[Condition::Standard, Condition::Fatigue]);
    let (mut planted_hits, mut false_positives) = (0, 0);
    for k in 0..20u64 {
        let mut planted = default_paper_scenario();
        planted.seed = 5_000 + k;
        let src = SyntheticSource::new(planted);
        let r = analyze_study(&cfg, &src, &src.subjects()).map_err(|e| e.to_string())?;
        let v = &r.detection.as_ref().ok_or("no detection")?.group;
        if v.compensation && v.criteria == [Criterion::UtRms, Criterion::ElevationRom] {
            planted_hits += 1;
        }
        let src = SyntheticSource::new(null_scenario(9_000 + k));
        let r = analyze_study(&cfg, &src, &src.subjects()).map_err(|e| e.to_string())?;
        if r.detection.as_ref().ok_or("no detection")?.group.compensation {
            false_positives += 1;
        }
    }
    check(
        planted_hits == 20 && false_positives == 0,
        format!("planted {{a, b}} in {planted_hits}/20 seeds, null false positives {false_positives}/20"),
    )
}

fn read_tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut spec = default_paper_scenario();
    spec.n_subjects = 3;
    write_dataset(&spec, &dir.path().join("data"), Execution::Parallel).map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for (run, exec) in [Execution::Parallel, Execution::Sequential].into_iter().enumerate() {
        let mut cfg = StudyConfig::default();
        cfg.data_root = dir.path().join("data");
        cfg.output_dir = dir.path().join(format!("out{run}"));
        cfg.execution = exec;
        cfg.nnmf.restarts = 3;
        cfg.nnmf.max_rank = Some(4);
        run_study(&cfg).map_err(|e| e.to_string())?;
        outputs.push(read_tree(&cfg.output_dir));
    }
    let files = outputs[0].len();
    check(
        files == 2 + 6 && outputs[0] == outputs[1],
        format!("{files} output files, identical across runs: {}", outputs[0] == outputs[1]),
    )
}

fn invariant_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut failures = Vec::new();
    let mut cases = 0;

    for _ in 0..20 {
        cases += 1;
        let (m, n, t) = (rng.random_range(2..9), rng.random_range(1..4), rng.random_range(5..40));
        let w = Array2::from_shape_fn((m, n), |_| rng.random_range(0.01..1.0));
        let c = Array2::from_shape_fn((n, t), |_| rng.random_range(0.0..1.0));
        let d: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..10.0)).collect();
        let ws = Array2::from_shape_fn((m, n), |(i, k)| w[[i, k]] * d[k]);
        let cs = Array2::from_shape_fn((n, t), |(k, j)| c[[k, j]] / d[k]);
        let (a, b) = (normalize_factors(w.view(), c.view()).unwrap(), normalize_factors(ws.view(), cs.view()).unwrap());
        if (&a.w - &b.w).iter().any(|v| v.abs() > 1e-12) || (&a.c - &b.c).iter().any(|v| v.abs() > 1e-9) {
            failures.push("normalization gauge");
        }
    }

    let bp = BandPass::butterworth(4, 30.0, 80.0, FS).unwrap();
    for _ in 0..10 {
        cases += 1;
        let f = rng.random_range(45.0..62.0);
        let x: Vec<f64> = (0..4000).map(|i| (TAU * f * i as f64 / FS).sin()).collect();
        let y = bp.filtfilt(&x);
        let xcorr = |lag: i64| -> f64 {
            (1000..3000).map(|i| x[i] * y[(i as i64 + lag) as usize]).sum()
        };
        let best = (-5..=5).max_by(|&a, &b| xcorr(a).total_cmp(&xcorr(b))).unwrap();
        if best != 0 {
            failures.push("zero-phase filtering");
        }
    }

    for _ in 0..20 {
        cases += 1;
        let (s, j, ell) = (rng.random_range(2..12), rng.random_range(1..5), rng.random_range(2..60));
        let subs: Vec<Array2<f64>> = (0..s).map(|_| Array2::from_shape_fn((j, ell), |_| rng.random_range(-90.0..90.0))).collect();
        let mean = group_average(&subs).unwrap();
        let total = subs.iter().fold(Array2::<f64>::zeros((j, ell)), |acc, x| acc + (x - &mean));
        if total.iter().any(|v| v.abs() > 1e-9) {
            failures.push("mean-deviation identity");
        }
    }

    for _ in 0..50 {
        cases += 1;
        let n = rng.random_range(2..30);
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..5.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..5.0)).collect();
        let fwd = wilcoxon_signed_rank(&PairedSample::new(a.clone(), b.clone(), "x").unwrap());
        let rev = wilcoxon_signed_rank(&PairedSample::new(b, a, "x").unwrap());
        if fwd.map(|r| (r.statistic, r.p_value)).ok() != rev.map(|r| (r.statistic, r.p_value)).ok() {
            failures.push("Wilcoxon symmetry");
        }
    }

    for n in 0..=40 {
        cases += 1;
        if signed_rank_distribution(n).iter().sum::<u128>() != 1u128 << n {
            failures.push("signed-rank distribution normalization");
        }
    }

    failures.dedup();
    check(
        failures.is_empty(),
        if failures.is_empty() { format!("{cases} cases across five invariants") } else { format!("broken: {}", failures.join(", ")) },
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("planted-synergy recovery", planted_recovery),
        ("VAF correctness", vaf_correctness),
        ("Wilcoxon exactness", wilcoxon_exactness),
        ("spectral metrics", spectral_metrics),
        ("fatigue-shift reproduction", fatigue_shift),
        ("kinematics table reproduction", kinematics_table),
        ("detection verdicts", detection_verdicts),
        ("determinism", determinism),
        ("invariant suites", invariant_suite),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (status, detail) = match f() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{status} {}. {name}: {detail}", i + 1);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
