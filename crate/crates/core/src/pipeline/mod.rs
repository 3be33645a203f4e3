//! Study orchestration: configuration, per-trial analysis, group report,
//! compensation verdicts and plot series.

mod config;
mod detect;
mod plots;
mod report;
mod source;
mod study;
mod trial;

pub use config::{DetectionConfig, StudyConfig};
pub use detect::{detect_compensation, Criterion, DetectionReport, SubjectVerdict, Verdict};
pub use plots::{emit_plot_series, ManifestEntry, PlotManifest, MANIFEST_FILE};
pub use report::{
    synergy_label, AnalysisSettings, ConditionFatigue, ConditionKinematics, ConditionSynergies, FatigueChangeSummary,
    FatigueSection, GroupVafCurve, KinematicsSection, SignificanceFlag, StatisticsSection, StudyReport, SubjectSynergy,
    SynergySection,
};
pub use source::{FileTree, SyntheticSource, Trial, TrialSource};
pub use study::{analyze_study, run_study, write_report, MIN_SUBJECTS_FOR_STATS, PLOTS_DIR, REPORT_FILE, STATS_FILE};
pub use trial::{analyze_trial, cycle_envelope, TrialAnalysis};
