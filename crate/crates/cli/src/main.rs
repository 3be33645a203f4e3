//! Command-line front end for the curl synergy pipeline.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use curlsyn::domain::Condition;
use curlsyn::io::{write_matrix_csv, write_time_series};
use curlsyn::kinematics::{ingest_kinematics_csv, range_of_motion};
use curlsyn::pipeline::{
    analyze_study, analyze_trial, detect_compensation, emit_plot_series, run_study, synergy_label, StudyConfig,
    StudyReport, Trial, MANIFEST_FILE, PLOTS_DIR, REPORT_FILE,
};
use curlsyn::signal::{bandpass_filter, extract_envelope, fatigue_metrics, ingest_emg_csv};
use curlsyn::stats::{compare_paired, write_stats_csv, PairedSample, StatsRow};
use curlsyn::synergy::{label_by_bic, normalize};
use curlsyn::synth::{
    default_paper_scenario, fatigue_shift_scenario, flexion_only_scenario, null_scenario, write_dataset, ScenarioSpec,
};
use curlsyn::{Error, Result};

#[derive(Parser)]
#[command(name = "curlsyn", version, about = "sEMG synergy and kinematics analysis for bicep curls")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Global {
    /// Study config (TOML); for `synth`, a scenario JSON
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scenario {
    Paper,
    Null,
    FatigueShift,
    FlexionOnly,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic data tree
    Synth {
        #[arg(long, value_enum, default_value_t = Scenario::Paper)]
        scenario: Scenario,
        #[arg(long)]
        subjects: Option<usize>,
    },
    /// Band-pass filter one EMG file and compute its envelope and fatigue metrics
    Filter {
        #[arg(long)]
        input: PathBuf,
    },
    /// Rank scan and synergy extraction for one trial
    Synergy {
        #[arg(long)]
        emg: PathBuf,
        #[arg(long)]
        kinematics: PathBuf,
    },
    /// Segment, normalize and average one kinematics file
    Kinematics {
        #[arg(long)]
        input: PathBuf,
    },
    /// Paired tests on a `metric,a,b` CSV
    Stats {
        #[arg(long)]
        input: PathBuf,
    },
    /// Full study
    Run {
        /// Data tree, overriding `data_root`
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Compensation verdicts from a saved report, or from a fresh analysis
    Detect {
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Plot-series CSVs from a saved report
    Plots {
        #[arg(long)]
        report: PathBuf,
    },
}

fn study_config(g: &Global) -> Result<StudyConfig> {
    let mut cfg = match &g.config {
        Some(p) => StudyConfig::load(p)?,
        None => StudyConfig::default(),
    };
    if let Some(seed) = g.seed {
        cfg.nnmf.seed = seed;
    }
    if let Some(out) = &g.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn out_dir(g: &Global) -> Result<Option<&Path>> {
    match &g.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.clone(), source: e })?;
            Ok(Some(dir.as_path()))
        }
        None => Ok(None),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })
}

fn to_json(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

/// Prints a table in the chosen format and mirrors it to `<out>/<stem>.{json,csv}`.
fn emit(g: &Global, stem: &str, json_value: &Value, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let text = match g.format {
        Format::Json => to_json(json_value),
        Format::Csv => csv_text(header, rows),
    };
    if let Some(dir) = out_dir(g)? {
        let ext = if g.format == Format::Json { "json" } else { "csv" };
        write_text(&dir.join(format!("{stem}.{ext}")), &text)?;
    }
    print!("{text}");
    Ok(())
}

fn read_report(path: &Path) -> Result<StudyReport> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
    Ok(serde_json::from_str(&text)?)
}

fn cmd_synth(g: &Global, scenario: Scenario, subjects: Option<usize>) -> Result<()> {
    let mut spec = match &g.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::Io { path: p.clone(), source: e })?;
            serde_json::from_str::<ScenarioSpec>(&text).map_err(|e| Error::InvalidScenario(e.to_string()))?
        }
        None => {
            let seed = g.seed.unwrap_or(default_paper_scenario().seed);
            match scenario {
                Scenario::Paper => default_paper_scenario(),
                Scenario::Null => null_scenario(seed),
                Scenario::FatigueShift => fatigue_shift_scenario(seed),
                Scenario::FlexionOnly => flexion_only_scenario(seed),
            }
        }
    };
    if let Some(seed) = g.seed {
        spec.seed = seed;
    }
    if let Some(n) = subjects {
        spec.n_subjects = n;
    }
    let dir = g.out.clone().ok_or_else(|| Error::InvalidParameter("synth needs --out".into()))?;
    write_dataset(&spec, &dir, curlsyn::Execution::default())?;
    let summary = json!({ "out": dir, "subjects": spec.n_subjects, "conditions": spec.conditions.len(), "seed": spec.seed });
    let rows = vec![vec![dir.display().to_string(), spec.n_subjects.to_string(), spec.seed.to_string()]];
    let text = match g.format {
        Format::Json => to_json(&summary),
        Format::Csv => csv_text(&["out", "subjects", "seed"], &rows),
    };
    print!("{text}");
    Ok(())
}

fn cmd_filter(g: &Global, input: &Path) -> Result<()> {
    let cfg = study_config(g)?;
    let rec = ingest_emg_csv(input, &cfg.muscles, cfg.emg_rate, Condition::Standard, "input")?;
    let filtered = bandpass_filter(&rec, &cfg.filter, cfg.execution)?;
    let env = extract_envelope(&filtered, &cfg.envelope, cfg.execution)?;
    let source = match cfg.fatigue.source {
        curlsyn::signal::MetricSource::Raw => &rec,
        curlsyn::signal::MetricSource::Filtered => &filtered,
    };
    let metrics = fatigue_metrics(source, &cfg.psd, cfg.execution)?;
    if let Some(dir) = out_dir(g)? {
        write_time_series(&dir.join("filtered.csv"), rec.sample_rate, &rec.muscle_labels, &filtered.samples)?;
        write_time_series(&dir.join("envelope.csv"), env.sample_rate, &rec.muscle_labels, &env.values)?;
    }
    let rows: Vec<Vec<String>> = cfg
        .muscles
        .iter()
        .enumerate()
        .map(|(i, m)| vec![m.clone(), metrics.rms_per_muscle[i].to_string(), metrics.median_freq_per_muscle[i].to_string()])
        .collect();
    let value = json!({ "muscles": cfg.muscles, "metrics": metrics });
    emit(g, "fatigue_metrics", &value, &["muscle", "rms", "median_freq_hz"], &rows)
}

fn cmd_synergy(g: &Global, emg: &Path, kinematics: &Path) -> Result<()> {
    let mut cfg = study_config(g)?;
    cfg.synergies = true;
    let trial = Trial {
        emg: ingest_emg_csv(emg, &cfg.muscles, cfg.emg_rate, Condition::Standard, "input")?,
        kinematics: ingest_kinematics_csv(kinematics, &cfg.joints, cfg.kin_rate, Condition::Standard, "input")?,
    };
    let analysis = analyze_trial(&trial, &cfg)?;
    let scan = analysis.scan.as_ref().expect("synergies enabled");
    let rank = scan.curve.selected_rank;
    let f = scan.at_rank(rank).expect("selected rank scanned");
    let raw = normalize(f)?;
    let bic = cfg.muscles.iter().position(|m| m == "BIC").unwrap_or(0);
    let syn = raw.reordered(&label_by_bic(&raw, bic).order);
    if let Some(dir) = out_dir(g)? {
        write_matrix_csv(&dir.join("w.csv"), &syn.w)?;
        write_matrix_csv(&dir.join("c.csv"), &syn.c)?;
        write_matrix_csv(&dir.join("envelope_cycle.csv"), &analysis.envelope_cycle)?;
    }
    let summary = f.summary(analysis.envelope_cycle.view())?;
    let rows: Vec<Vec<String>> = scan
        .curve
        .vaf_by_rank
        .iter()
        .map(|(r, v)| vec![r.to_string(), v.to_string(), (*r == rank).to_string()])
        .collect();
    let weights: Vec<Value> = (0..rank)
        .map(|k| json!({ "synergy": synergy_label(k), "w": syn.w.column(k).to_vec() }))
        .collect();
    let value = json!({
        "selected_rank": rank,
        "flagged": scan.curve.flagged,
        "vaf_by_rank": scan.curve.values(),
        "summary": summary,
        "synergies": weights,
    });
    emit(g, "synergy", &value, &["rank", "vaf", "selected"], &rows)
}

fn cmd_kinematics(g: &Global, input: &Path) -> Result<()> {
    let cfg = study_config(g)?;
    let traj = ingest_kinematics_csv(input, &cfg.joints, cfg.kin_rate, Condition::Standard, "input")?;
    let smooth = curlsyn::kinematics::smooth(&traj, cfg.kin.smooth_window_frac)?;
    let cycles = curlsyn::kinematics::segment_cycles(&smooth, cfg.kin.expected_cycles, &cfg.kin.segment_config())?;
    let mean = curlsyn::kinematics::average_cycles(&cycles.normalize(&smooth, cfg.kin.ell, cfg.kin.interp)?)?.phase_angles;
    if let Some(dir) = out_dir(g)? {
        let path = dir.join("mean_cycle.csv");
        let mut rows = Vec::with_capacity(mean.ncols());
        for p in 0..mean.ncols() {
            let mut r = vec![(100.0 * p as f64 / (mean.ncols() - 1) as f64).to_string()];
            r.extend(mean.column(p).iter().map(|v| v.to_string()));
            rows.push(r);
        }
        let mut header = vec!["phase_pct"];
        header.extend(cfg.joints.iter().map(String::as_str));
        write_text(&path, &csv_text(&header, &rows))?;
    }
    let rom = range_of_motion(&mean);
    let rows: Vec<Vec<String>> =
        cfg.joints.iter().zip(&rom).map(|(j, r)| vec![j.clone(), r.to_string()]).collect();
    let value = json!({
        "cycles": cycles.n_cycles(),
        "boundary_times_s": cycles.boundary_times(),
        "phase_warnings": cycles.phase_warnings,
        "rom_deg": cfg.joints.iter().cloned().zip(rom.iter().copied()).collect::<std::collections::BTreeMap<_, _>>(),
    });
    emit(g, "kinematics", &value, &["joint", "rom_deg"], &rows)
}

fn cmd_stats(g: &Global, input: &Path) -> Result<()> {
    let text = fs::read_to_string(input).map_err(|e| Error::Io { path: input.to_path_buf(), source: e })?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines.next().ok_or(Error::EmptySignal)?.split(',').map(str::trim).collect();
    if header != ["metric", "a", "b"] {
        return Err(Error::Csv(format!("{}: header must be metric,a,b", input.display())));
    }
    let mut metrics: Vec<(String, Vec<f64>, Vec<f64>)> = Vec::new();
    for (row, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != 3 {
            return Err(Error::Csv(format!("row {row}: expected 3 fields")));
        }
        let num = |s: &str| -> Result<f64> {
            let v: f64 = s.parse().map_err(|_| Error::Csv(format!("row {row}: cannot parse {s:?}")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFiniteSample { row, col: 1 })
            }
        };
        let (a, b) = (num(cells[1])?, num(cells[2])?);
        match metrics.iter_mut().find(|(m, _, _)| m == cells[0]) {
            Some((_, xa, xb)) => {
                xa.push(a);
                xb.push(b);
            }
            None => metrics.push((cells[0].to_string(), vec![a], vec![b])),
        }
    }
    let comparisons = metrics
        .into_iter()
        .map(|(m, a, b)| compare_paired(&PairedSample::new(a, b, m)?))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<StatsRow> = comparisons.iter().flat_map(StatsRow::rows).collect();
    if g.format == Format::Csv {
        if let Some(dir) = out_dir(g)? {
            write_stats_csv(&dir.join("stats.csv"), &rows)?;
        }
        let table: Vec<Vec<String>> = rows
            .iter()
            .map(|r| vec![r.metric.clone(), r.statistic.to_string(), r.p.to_string(), r.method.clone(), r.significant.to_string()])
            .collect();
        print!("{}", csv_text(&["metric", "statistic", "p", "method", "significant"], &table));
        return Ok(());
    }
    let text = to_json(&comparisons);
    if let Some(dir) = out_dir(g)? {
        write_text(&dir.join("stats.json"), &text)?;
    }
    print!("{text}");
    Ok(())
}

fn detection_output(g: &Global, report: &StudyReport, cfg: &StudyConfig) -> Result<()> {
    let d = detect_compensation(report, &cfg.detection)?;
    let mut rows = vec![vec![
        "group".to_string(),
        d.group.compensation.to_string(),
        d.group.letters(),
        d.group.ut_rms_change_pct.to_string(),
        d.group.elev_rom_change_deg.to_string(),
        d.group.flex_rom_change_deg.to_string(),
    ]];
    for s in &d.subjects {
        let v = &s.verdict;
        rows.push(vec![
            s.subject.clone(),
            v.compensation.to_string(),
            v.letters(),
            v.ut_rms_change_pct.to_string(),
            v.elev_rom_change_deg.to_string(),
            v.flex_rom_change_deg.to_string(),
        ]);
    }
    let header = ["subject", "compensation", "criteria", "ut_rms_change_pct", "elev_rom_change_deg", "flex_rom_change_deg"];
    emit(g, "detection", &serde_json::to_value(&d)?, &header, &rows)
}

fn cmd_run(g: &Global, data: Option<&Path>) -> Result<()> {
    let mut cfg = study_config(g)?;
    if let Some(d) = data {
        cfg.data_root = d.to_path_buf();
    }
    let report = run_study(&cfg)?;
    let dir = &cfg.output_dir;
    let mut summary = json!({
        "report": dir.join(REPORT_FILE),
        "plots": dir.join(PLOTS_DIR).join(MANIFEST_FILE),
        "subjects": report.subjects.len(),
    });
    if let Some(sec) = &report.synergy {
        summary["extraction_rank"] = json!(sec.extraction_rank);
    }
    if let Some(d) = &report.detection {
        summary["compensation"] = json!(d.group.compensation);
        summary["criteria"] = json!(d.group.letters());
    }
    let text = match g.format {
        Format::Json => to_json(&summary),
        Format::Csv => {
            let criteria = report.detection.as_ref().map(|d| d.group.letters()).unwrap_or_default();
            csv_text(&["report", "subjects", "criteria"], &[vec![
                dir.join(REPORT_FILE).display().to_string(),
                report.subjects.len().to_string(),
                criteria,
            ]])
        }
    };
    print!("{text}");
    Ok(())
}

fn cmd_detect(g: &Global, report: Option<&Path>, data: Option<&Path>) -> Result<()> {
    let mut cfg = study_config(g)?;
    let report = match report {
        Some(p) => read_report(p)?,
        None => {
            if let Some(d) = data {
                cfg.data_root = d.to_path_buf();
            }
            let subjects = cfg.resolve_subjects()?;
            analyze_study(&cfg, &curlsyn::pipeline::FileTree::from_config(&cfg), &subjects)?
        }
    };
    detection_output(g, &report, &cfg)
}

fn cmd_plots(g: &Global, report: &Path) -> Result<()> {
    let report = read_report(report)?;
    let dir = g.out.clone().ok_or_else(|| Error::InvalidParameter("plots needs --out".into()))?;
    let manifest = emit_plot_series(&report, &dir)?;
    let rows: Vec<Vec<String>> =
        manifest.files.iter().map(|f| vec![f.file.clone(), f.rows.to_string(), f.sha256.clone()]).collect();
    let text = match g.format {
        Format::Json => to_json(&manifest),
        Format::Csv => csv_text(&["file", "rows", "sha256"], &rows),
    };
    print!("{text}");
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Synth { scenario, subjects } => cmd_synth(g, *scenario, *subjects),
        Command::Filter { input } => cmd_filter(g, input),
        Command::Synergy { emg, kinematics } => cmd_synergy(g, emg, kinematics),
        Command::Kinematics { input } => cmd_kinematics(g, input),
        Command::Stats { input } => cmd_stats(g, input),
        Command::Run { data } => cmd_run(g, data.as_deref()),
        Command::Detect { report, data } => cmd_detect(g, report.as_deref(), data.as_deref()),
        Command::Plots { report } => cmd_plots(g, report),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
