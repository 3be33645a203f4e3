use std::path::PathBuf;

use crate::domain::Condition;
use crate::error::{Error, Result};
use crate::kinematics::{ingest_kinematics_csv, JointTrajectorySet};
use crate::signal::{ingest_emg_csv, EmgRecording};
use crate::synth::{generate_emg, generate_kinematics, DatasetLayout, ScenarioSpec};

use super::StudyConfig;

/// One subject's recordings for one condition.
#[derive(Debug, Clone)]
pub struct Trial {
    pub emg: EmgRecording,
    pub kinematics: JointTrajectorySet,
}

/// Where trials come from.
pub trait TrialSource: Sync {
    fn load(&self, subject: &str, condition: Condition) -> Result<Trial>;
}

/// A directory tree laid out as `<root>/<subject>/<condition>/{emg,kinematics}.csv`.
#[derive(Debug, Clone)]
pub struct FileTree {
    pub layout: DatasetLayout,
    pub muscles: Vec<String>,
    pub joints: Vec<String>,
    pub emg_rate: Option<f64>,
    pub kin_rate: Option<f64>,
}

impl FileTree {
    pub fn from_config(cfg: &StudyConfig) -> Self {
        Self {
            layout: DatasetLayout::new(cfg.data_root.clone()),
            muscles: cfg.muscles.clone(),
            joints: cfg.joints.clone(),
            emg_rate: cfg.emg_rate,
            kin_rate: cfg.kin_rate,
        }
    }
}

impl TrialSource for FileTree {
    fn load(&self, subject: &str, condition: Condition) -> Result<Trial> {
        let dir: PathBuf = self.layout.trial_dir(subject, condition);
        if !dir.is_dir() {
            return Err(Error::MissingCondition { subject: subject.to_string(), condition });
        }
        let emg = ingest_emg_csv(&self.layout.emg(subject, condition), &self.muscles, self.emg_rate, condition, subject)?;
        let kinematics = ingest_kinematics_csv(
            &self.layout.kinematics(subject, condition),
            &self.joints,
            self.kin_rate,
            condition,
            subject,
        )?;
        Ok(Trial { emg, kinematics })
    }
}

/// Trials generated on demand from a scenario, never touching disk.
#[derive(Debug, Clone)]
pub struct SyntheticSource {
    pub spec: ScenarioSpec,
}

impl SyntheticSource {
    pub fn new(spec: ScenarioSpec) -> Self {
        Self { spec }
    }

    pub fn subjects(&self) -> Vec<String> {
        (0..self.spec.n_subjects).map(ScenarioSpec::subject_id).collect()
    }
}

impl TrialSource for SyntheticSource {
    fn load(&self, subject: &str, condition: Condition) -> Result<Trial> {
        let k = (0..self.spec.n_subjects)
            .find(|&k| ScenarioSpec::subject_id(k) == subject)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown subject {subject:?}")))?;
        if self.spec.condition(condition).is_err() {
            return Err(Error::MissingCondition { subject: subject.to_string(), condition });
        }
        Ok(Trial { emg: generate_emg(&self.spec, k, condition)?, kinematics: generate_kinematics(&self.spec, k, condition)? })
    }
}
