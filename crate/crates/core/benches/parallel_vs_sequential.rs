use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use curlsyn::nnmf::{scan_ranks, NnmfConfig};
use curlsyn::pipeline::{analyze_study, analyze_trial, StudyConfig, SyntheticSource, TrialSource};
use curlsyn::signal::{bandpass_filter, fatigue_metrics, FilterConfig, PsdConfig};
use curlsyn::synth::{default_paper_scenario, generate_emg};
use curlsyn::{Condition, Execution};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn signal(c: &mut Criterion) {
    let rec = generate_emg(&default_paper_scenario(), 0, Condition::Standard).unwrap();
    let mut g = c.benchmark_group("signal");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new("filter", name), |b| {
            b.iter(|| bandpass_filter(&rec, &FilterConfig::default(), exec).unwrap())
        });
        g.bench_function(BenchmarkId::new("fatigue_metrics", name), |b| {
            b.iter(|| fatigue_metrics(&rec, &PsdConfig::default(), exec).unwrap())
        });
    }
    g.finish();
}

fn nnmf(c: &mut Criterion) {
    let src = SyntheticSource::new(default_paper_scenario());
    let mut cfg = StudyConfig::default();
    cfg.synergies = true;
    let trial = src.load(&src.subjects()[0], Condition::Standard).unwrap();
    let e = analyze_trial(&trial, &cfg).unwrap().envelope_cycle;
    let nn = NnmfConfig::default();
    let mut g = c.benchmark_group("nnmf");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new("scan_ranks", name), |b| b.iter(|| scan_ranks(e.view(), &nn, exec).unwrap()));
    }
    g.finish();
}

fn study(c: &mut Criterion) {
    let mut spec = default_paper_scenario();
    spec.n_subjects = 4;
    let src = SyntheticSource::new(spec);
    let subjects = src.subjects();
    let mut g = c.benchmark_group("study");
    g.sample_size(10).measurement_time(Duration::from_secs(20));
    for (name, exec) in MODES {
        let mut cfg = StudyConfig::default();
        cfg.execution = exec;
        cfg.nnmf.restarts = 3;
        g.bench_function(BenchmarkId::new("four_subjects", name), |b| {
            b.iter(|| analyze_study(&cfg, &src, &subjects).unwrap())
        });
    }
    g.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10).warm_up_time(Duration::from_secs(1)).measurement_time(Duration::from_secs(3));
    targets = signal, nnmf, study
}
criterion_main!(benches);
