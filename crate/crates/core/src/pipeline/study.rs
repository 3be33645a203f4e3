use std::fs;
use std::path::Path;

use ndarray::Array2;

use super::report::{columns_of, rows_of, synergy_label};
use super::*;
use crate::domain::Condition;
use crate::error::{Error, Result};
use crate::exec::try_map_range;
use crate::kinematics::{group_average, range_of_motion, similarity_discrepancy};
use crate::nnmf::curve_from_values;
use crate::signal::fatigue_comparison;
use crate::stats::{compare_paired, write_stats_csv, PairedSample, StatsRow};
use crate::synergy::{label_by_bic, match_synergies, normalize, NormalizedSynergy};
use crate::util::{mean, sample_std};

/// Paired statistics need at least this many subjects.
pub const MIN_SUBJECTS_FOR_STATS: usize = 3;

pub const REPORT_FILE: &str = "report.json";
pub const STATS_FILE: &str = "stats.csv";
pub const PLOTS_DIR: &str = "plots";

fn mean_sd_rows(rows: &[Vec<f64>]) -> (Vec<f64>, Option<Vec<f64>>) {
    let width = rows.first().map_or(0, Vec::len);
    let col = |i: usize| rows.iter().map(|r| r[i]).collect::<Vec<f64>>();
    let m = (0..width).map(|i| mean(&col(i))).collect();
    let sd = (rows.len() >= 2).then(|| (0..width).map(|i| sample_std(&col(i))).collect());
    (m, sd)
}

fn mean_sd_mats(mats: &[Array2<f64>]) -> Result<(Array2<f64>, Option<Array2<f64>>)> {
    let m = group_average(mats)?;
    let sd = (mats.len() >= 2).then(|| {
        Array2::from_shape_fn(m.dim(), |(i, j)| sample_std(&mats.iter().map(|a| a[[i, j]]).collect::<Vec<_>>()))
    });
    Ok((m, sd))
}

fn standard_error(sd: Option<Array2<f64>>, n: usize) -> Option<Vec<Vec<f64>>> {
    sd.map(|sd| rows_of(&sd.mapv(|v| v / (n as f64).sqrt())))
}

/// Runs the whole chain on trials from `source` without writing anything.
pub fn analyze_study(cfg: &StudyConfig, source: &dyn TrialSource, subjects: &[String]) -> Result<StudyReport> {
    cfg.validate()?;
    if subjects.is_empty() {
        return Err(Error::InsufficientSubjects { needed: 1, found: 0 });
    }
    crate::domain::check_unique(subjects)?;
    let conds = &cfg.conditions;
    let nc = conds.len();
    let trials = try_map_range(subjects.len() * nc, cfg.execution, |job| {
        let (s, c) = (&subjects[job / nc], conds[job % nc]);
        let trial = source.load(s, c).map_err(|e| e.at(s, c))?;
        analyze_trial(&trial, cfg).map_err(|e| e.at(s, c))
    })?;
    let at = |si: usize, ci: usize| &trials[si * nc + ci];
    let ns = subjects.len();
    let pos = |c: Condition| conds.iter().position(|&x| x == c);
    let pair = pos(Condition::Standard).zip(pos(Condition::Fatigue));

    // fatigue metrics
    let by_condition = (0..nc)
        .map(|ci| {
            let metrics: Vec<_> = (0..ns).map(|si| at(si, ci).fatigue.clone()).collect();
            let (rms_mean, rms_sd) = mean_sd_rows(&metrics.iter().map(|m| m.rms_per_muscle.clone()).collect::<Vec<_>>());
            let (median_freq_mean, median_freq_sd) =
                mean_sd_rows(&metrics.iter().map(|m| m.median_freq_per_muscle.clone()).collect::<Vec<_>>());
            ConditionFatigue { condition: conds[ci], rms_mean, rms_sd, median_freq_mean, median_freq_sd, subjects: metrics }
        })
        .collect();
    let change = match pair {
        Some((a, b)) => {
            let changes: Vec<_> = (0..ns)
                .map(|si| fatigue_comparison(&at(si, a).fatigue, &at(si, b).fatigue).map_err(|e| e.at(&subjects[si], conds[b])))
                .collect::<Result<_>>()?;
            let shifts: Vec<Vec<f64>> = (0..ns)
                .map(|si| {
                    let (x, y) = (&at(si, a).fatigue.median_freq_per_muscle, &at(si, b).fatigue.median_freq_per_muscle);
                    x.iter().zip(y).map(|(p, q)| q - p).collect()
                })
                .collect();
            let (rms_pct_mean, rms_pct_sd) = mean_sd_rows(&changes.iter().map(|c| c.rms_pct.clone()).collect::<Vec<_>>());
            let (median_freq_pct_mean, median_freq_pct_sd) =
                mean_sd_rows(&changes.iter().map(|c| c.median_freq_pct.clone()).collect::<Vec<_>>());
            Some(FatigueChangeSummary {
                rms_pct_mean,
                rms_pct_sd,
                median_freq_pct_mean,
                median_freq_pct_sd,
                median_freq_shift_hz_mean: mean_sd_rows(&shifts).0,
                subjects: changes,
            })
        }
        None => None,
    };
    let fatigue = FatigueSection { by_condition, change };

    // kinematics
    let kin_conditions = (0..nc)
        .map(|ci| {
            let mats: Vec<Array2<f64>> = (0..ns).map(|si| at(si, ci).kin_cycle.clone()).collect();
            let (m, sd) = mean_sd_mats(&mats)?;
            let table = if ns >= 2 { Some(similarity_discrepancy(&mats, &m, &cfg.joints)?) } else { None };
            let phase_warnings = (0..ns)
                .flat_map(|si| at(si, ci).cycles.phase_warnings.iter().map(move |k| format!("{} cycle {}", subjects[si], k + 1)))
                .collect();
            Ok(ConditionKinematics {
                condition: conds[ci],
                rom: range_of_motion(&m),
                subject_rom: mats.iter().map(range_of_motion).collect(),
                mean: rows_of(&m),
                se: standard_error(sd, ns),
                table,
                phase_warnings,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let kinematics = KinematicsSection { ell: cfg.kin.ell, conditions: kin_conditions };

    let mut synergy = if cfg.synergies { Some(synergy_section(cfg, subjects, &trials)?) } else { None };

    let statistics = match pair {
        None => StatisticsSection::NotApplicable { reason: "needs both Standard and Fatigue".into() },
        Some(_) if ns < MIN_SUBJECTS_FOR_STATS => {
            StatisticsSection::InsufficientN { n_subjects: ns, needed: MIN_SUBJECTS_FOR_STATS }
        }
        Some((a, b)) => {
            let mut samples = Vec::new();
            for (i, m) in cfg.muscles.iter().enumerate() {
                let pick = |ci: usize, f: &dyn Fn(&TrialAnalysis) -> f64| (0..ns).map(|si| f(at(si, ci))).collect::<Vec<_>>();
                let rms = |t: &TrialAnalysis| t.fatigue.rms_per_muscle[i];
                let mf = |t: &TrialAnalysis| t.fatigue.median_freq_per_muscle[i];
                samples.push(PairedSample::new(pick(a, &rms), pick(b, &rms), format!("rms:{m}"))?);
                samples.push(PairedSample::new(pick(a, &mf), pick(b, &mf), format!("median_freq:{m}"))?);
            }
            if let Some(sec) = &synergy {
                let (sa, sb) = (&sec.conditions[a], &sec.conditions[b]);
                for (k, label) in sec.labels.iter().enumerate() {
                    for (i, m) in cfg.muscles.iter().enumerate() {
                        let w = |c: &ConditionSynergies| c.subjects.iter().map(|s| s.w[k][i]).collect::<Vec<_>>();
                        samples.push(PairedSample::new(w(sa), w(sb), format!("w:{label}:{m}"))?);
                    }
                }
            }
            for (j, joint) in cfg.joints.iter().enumerate() {
                let rom = |ci: usize| kinematics.conditions[ci].subject_rom.iter().map(|r| r[j]).collect::<Vec<_>>();
                samples.push(PairedSample::new(rom(a), rom(b), format!("rom:{joint}"))?);
            }
            let tests = samples.iter().map(compare_paired).collect::<Result<Vec<_>>>()?;
            StatisticsSection::Computed { reference: conds[a], comparison: conds[b], tests }
        }
    };
    if let Some(sec) = synergy.as_mut() {
        sec.weight_flags = sec
            .labels
            .iter()
            .flat_map(|label| cfg.muscles.iter().map(move |m| (label, m)))
            .filter_map(|(label, m)| {
                let test = format!("w:{label}:{m}");
                let significant = statistics.test(&test)?.significant();
                Some(SignificanceFlag { synergy: label.clone(), muscle: m.clone(), test, significant })
            })
            .collect();
    }

    let mut report = StudyReport {
        subjects: subjects.to_vec(),
        conditions: conds.clone(),
        muscles: cfg.muscles.clone(),
        joints: cfg.joints.clone(),
        settings: AnalysisSettings {
            synergies: cfg.synergies,
            filter: cfg.filter,
            envelope: cfg.envelope,
            psd: cfg.psd,
            fatigue: cfg.fatigue,
            nnmf: cfg.nnmf,
            kin: cfg.kin,
            detection: cfg.detection,
        },
        fatigue,
        synergy,
        kinematics,
        statistics,
        detection: None,
    };
    if pair.is_some() {
        report.detection = Some(detect_compensation(&report, &cfg.detection)?);
    }
    Ok(report)
}

fn synergy_section(cfg: &StudyConfig, subjects: &[String], trials: &[TrialAnalysis]) -> Result<SynergySection> {
    let conds = &cfg.conditions;
    let (nc, ns) = (conds.len(), subjects.len());
    let at = |si: usize, ci: usize| &trials[si * nc + ci];
    let scan = |si: usize, ci: usize| at(si, ci).scan.as_ref().expect("synergies enabled");

    let vaf_curves: Vec<GroupVafCurve> = (0..nc)
        .map(|ci| {
            let curves: Vec<Vec<f64>> = (0..ns).map(|si| scan(si, ci).curve.values()).collect();
            let (m, sd) = mean_sd_rows(&curves);
            let group = curve_from_values(&m, &cfg.nnmf);
            GroupVafCurve {
                condition: conds[ci],
                ranks: (1..=m.len()).collect(),
                mean: m,
                sd,
                selected_rank: group.selected_rank,
                flagged: group.flagged,
                subject_ranks: (0..ns).map(|si| scan(si, ci).curve.selected_rank).collect(),
                subject_flagged: (0..ns).map(|si| scan(si, ci).curve.flagged).collect(),
            }
        })
        .collect();
    let rank = vaf_curves.iter().map(|c| c.selected_rank).max().unwrap_or(1);
    let bic = cfg.muscles.iter().position(|m| m == "BIC").ok_or_else(|| Error::MissingChannel("BIC".into()))?;
    let ref_ci = conds.iter().position(|&c| c == Condition::Standard).unwrap_or(0);

    let decomposition = |si: usize, ci: usize| -> Result<NormalizedSynergy> {
        let f = scan(si, ci).at_rank(rank).ok_or(Error::RankOutOfRange { rank, max: cfg.muscles.len() })?;
        normalize(f).map_err(|e| e.at(&subjects[si], conds[ci]))
    };
    let mut per_condition: Vec<Vec<SubjectSynergy>> = vec![Vec::with_capacity(ns); nc];
    let mut labeled: Vec<Vec<NormalizedSynergy>> = vec![Vec::with_capacity(ns); nc];
    for si in 0..ns {
        let raw_ref = decomposition(si, ref_ci)?;
        let ref_label = label_by_bic(&raw_ref, bic);
        let reference = raw_ref.reordered(&ref_label.order);
        for ci in 0..nc {
            let (syn, similarity, relabeled) = if ci == ref_ci {
                (reference.clone(), vec![1.0; rank], ref_label.relabeled)
            } else {
                let cand = decomposition(si, ci)?;
                let l = match_synergies(&reference, &cand, bic).map_err(|e| e.at(&subjects[si], conds[ci]))?;
                (cand.reordered(&l.order), l.similarity, l.relabeled)
            };
            let f = scan(si, ci).at_rank(rank).expect("checked above");
            per_condition[ci].push(SubjectSynergy {
                subject: subjects[si].clone(),
                w: columns_of(&syn.w),
                c: rows_of(&syn.c),
                vaf: crate::nnmf::vaf(at(si, ci).envelope_cycle.view(), f.w.view(), f.c.view())
                    .map_err(|e| e.at(&subjects[si], conds[ci]))?,
                similarity_to_reference: similarity,
                relabeled,
            });
            labeled[ci].push(syn);
        }
    }
    let conditions = (0..nc)
        .map(|ci| {
            let ws: Vec<Array2<f64>> = labeled[ci].iter().map(|s| s.w.clone()).collect();
            let cs: Vec<Array2<f64>> = labeled[ci].iter().map(|s| s.c.clone()).collect();
            let (wm, wsd) = mean_sd_mats(&ws)?;
            let (cm, csd) = mean_sd_mats(&cs)?;
            Ok(ConditionSynergies {
                condition: conds[ci],
                weights_mean: columns_of(&wm),
                weights_sd: wsd.as_ref().map(columns_of),
                activation_mean: rows_of(&cm),
                activation_se: standard_error(csd, ns),
                subjects: std::mem::take(&mut per_condition[ci]),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SynergySection {
        extraction_rank: rank,
        reference_condition: conds[ref_ci],
        labels: (0..rank).map(synergy_label).collect(),
        vaf_curves,
        conditions,
        weight_flags: Vec::new(),
    })
}

/// Writes `report.json`, `stats.csv` and the plot series below `dir`.
pub fn write_report(report: &StudyReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(REPORT_FILE);
    fs::write(&path, report.to_json()).map_err(|e| Error::io(&path, e))?;
    let rows: Vec<StatsRow> = report.statistics.tests().iter().flat_map(StatsRow::rows).collect();
    write_stats_csv(&dir.join(STATS_FILE), &rows)?;
    emit_plot_series(report, &dir.join(PLOTS_DIR))?;
    Ok(())
}

/// Full study from the data tree in `cfg`, writing results to `cfg.output_dir`.
pub fn run_study(cfg: &StudyConfig) -> Result<StudyReport> {
    cfg.validate()?;
    if !cfg.data_root.is_dir() {
        return Err(Error::InvalidConfig(format!("data_root {} is not a directory", cfg.data_root.display())));
    }
    let subjects = cfg.resolve_subjects()?;
    let report = analyze_study(cfg, &FileTree::from_config(cfg), &subjects)?;
    write_report(&report, &cfg.output_dir)?;
    Ok(report)
}
