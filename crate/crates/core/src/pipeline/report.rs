use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{DetectionConfig, DetectionReport};
use crate::domain::Condition;
use crate::kinematics::{KinConfig, SimilarityTable};
use crate::nnmf::NnmfConfig;
use crate::signal::{EnvelopeConfig, FatigueChange, FatigueConfig, FatigueMetrics, FilterConfig, PsdConfig};
use crate::stats::PairedComparison;

/// Analysis parameters echoed into the report (paths left out so reports
/// compare equal across output locations).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSettings {
    pub synergies: bool,
    pub filter: FilterConfig,
    pub envelope: EnvelopeConfig,
    pub psd: PsdConfig,
    pub fatigue: FatigueConfig,
    pub nnmf: NnmfConfig,
    pub kin: KinConfig,
    pub detection: DetectionConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionFatigue {
    pub condition: Condition,
    pub rms_mean: Vec<f64>,
    pub rms_sd: Option<Vec<f64>>,
    pub median_freq_mean: Vec<f64>,
    pub median_freq_sd: Option<Vec<f64>>,
    /// In subject order.
    pub subjects: Vec<FatigueMetrics>,
}

/// Standard → Fatigue changes, per muscle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FatigueChangeSummary {
    pub rms_pct_mean: Vec<f64>,
    pub rms_pct_sd: Option<Vec<f64>>,
    pub median_freq_pct_mean: Vec<f64>,
    pub median_freq_pct_sd: Option<Vec<f64>>,
    pub median_freq_shift_hz_mean: Vec<f64>,
    pub subjects: Vec<FatigueChange>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FatigueSection {
    pub by_condition: Vec<ConditionFatigue>,
    pub change: Option<FatigueChangeSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupVafCurve {
    pub condition: Condition,
    pub ranks: Vec<usize>,
    pub mean: Vec<f64>,
    pub sd: Option<Vec<f64>>,
    /// Rank chosen on the group mean curve.
    pub selected_rank: usize,
    pub flagged: bool,
    pub subject_ranks: Vec<usize>,
    pub subject_flagged: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectSynergy {
    pub subject: String,
    /// `w[k]` is synergy k over muscles.
    pub w: Vec<Vec<f64>>,
    /// `c[k]` is synergy k's activation over phase.
    pub c: Vec<Vec<f64>>,
    pub vaf: f64,
    /// Cosine similarity of each slot to the same subject's reference decomposition.
    pub similarity_to_reference: Vec<f64>,
    pub relabeled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSynergies {
    pub condition: Condition,
    pub weights_mean: Vec<Vec<f64>>,
    pub weights_sd: Option<Vec<Vec<f64>>>,
    pub activation_mean: Vec<Vec<f64>>,
    pub activation_se: Option<Vec<Vec<f64>>>,
    pub subjects: Vec<SubjectSynergy>,
}

/// Points at the paired test behind a flag by its label in the statistics section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceFlag {
    pub synergy: String,
    pub muscle: String,
    pub test: String,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynergySection {
    /// Common rank used for labeling and group statistics.
    pub extraction_rank: usize,
    pub reference_condition: Condition,
    pub labels: Vec<String>,
    pub vaf_curves: Vec<GroupVafCurve>,
    pub conditions: Vec<ConditionSynergies>,
    pub weight_flags: Vec<SignificanceFlag>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionKinematics {
    pub condition: Condition,
    /// Group mean, joints × ℓ.
    pub mean: Vec<Vec<f64>>,
    pub se: Option<Vec<Vec<f64>>>,
    /// Range of motion of the group mean trajectory per joint.
    pub rom: Vec<f64>,
    /// `subject_rom[s][j]`.
    pub subject_rom: Vec<Vec<f64>>,
    /// Similarity and discrepancy; `absolute_*` fields are the table values.
    pub table: Option<SimilarityTable>,
    pub phase_warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KinematicsSection {
    pub ell: usize,
    pub conditions: Vec<ConditionKinematics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum StatisticsSection {
    Computed { reference: Condition, comparison: Condition, tests: Vec<PairedComparison> },
    InsufficientN { n_subjects: usize, needed: usize },
    NotApplicable { reason: String },
}

impl StatisticsSection {
    pub fn tests(&self) -> &[PairedComparison] {
        match self {
            StatisticsSection::Computed { tests, .. } => tests,
            _ => &[],
        }
    }

    pub fn test(&self, label: &str) -> Option<&PairedComparison> {
        self.tests().iter().find(|t| t.label == label)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub subjects: Vec<String>,
    pub conditions: Vec<Condition>,
    pub muscles: Vec<String>,
    pub joints: Vec<String>,
    pub settings: AnalysisSettings,
    pub fatigue: FatigueSection,
    pub synergy: Option<SynergySection>,
    pub kinematics: KinematicsSection,
    pub statistics: StatisticsSection,
    pub detection: Option<DetectionReport>,
}

impl StudyReport {
    pub fn muscle_index(&self, label: &str) -> Option<usize> {
        self.muscles.iter().position(|m| m == label)
    }

    pub fn joint_index(&self, label: &str) -> Option<usize> {
        self.joints.iter().position(|j| j == label)
    }

    pub fn fatigue_for(&self, c: Condition) -> Option<&ConditionFatigue> {
        self.fatigue.by_condition.iter().find(|f| f.condition == c)
    }

    pub fn kinematics_for(&self, c: Condition) -> Option<&ConditionKinematics> {
        self.kinematics.conditions.iter().find(|k| k.condition == c)
    }

    pub fn synergies_for(&self, c: Condition) -> Option<&ConditionSynergies> {
        self.synergy.as_ref()?.conditions.iter().find(|s| s.condition == c)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Roman-numeral synergy names: Synergy I, Synergy II, ...
pub fn synergy_label(k: usize) -> String {
    const NUMERALS: [(usize, &str); 9] =
        [(100, "C"), (90, "XC"), (50, "L"), (40, "XL"), (10, "X"), (9, "IX"), (5, "V"), (4, "IV"), (1, "I")];
    let mut n = k + 1;
    let mut out = String::from("Synergy ");
    for (v, s) in NUMERALS {
        while n >= v {
            out.push_str(s);
            n -= v;
        }
    }
    out
}

pub(crate) fn rows_of(a: &Array2<f64>) -> Vec<Vec<f64>> {
    a.rows().into_iter().map(|r| r.to_vec()).collect()
}

pub(crate) fn columns_of(a: &Array2<f64>) -> Vec<Vec<f64>> {
    a.columns().into_iter().map(|c| c.to_vec()).collect()
}
