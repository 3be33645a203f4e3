use std::fs;
use std::path::{Path, PathBuf};

use super::{generate_emg, generate_kinematics, ScenarioSpec};
use crate::domain::Condition;
use crate::error::{Error, Result};
use crate::exec::{try_map_range, Execution};

pub const SCENARIO_FILE: &str = "scenario.json";

/// File locations inside a data tree.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetLayout {
    pub root: PathBuf,
}

impl DatasetLayout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn trial_dir(&self, subject: &str, condition: Condition) -> PathBuf {
        self.root.join(subject).join(condition.dir_name())
    }

    pub fn emg(&self, subject: &str, condition: Condition) -> PathBuf {
        self.trial_dir(subject, condition).join("emg.csv")
    }

    pub fn kinematics(&self, subject: &str, condition: Condition) -> PathBuf {
        self.trial_dir(subject, condition).join("kinematics.csv")
    }
}

/// Writes every subject and condition of `spec` below `root`, plus the
/// scenario itself.
pub fn write_dataset(spec: &ScenarioSpec, root: &Path, exec: Execution) -> Result<DatasetLayout> {
    spec.validate()?;
    let layout = DatasetLayout::new(root);
    fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    let conditions: Vec<Condition> = spec.conditions.iter().map(|c| c.condition).collect();
    let jobs = spec.n_subjects * conditions.len();
    try_map_range(jobs, exec, |job| {
        let (subject, condition) = (job / conditions.len(), conditions[job % conditions.len()]);
        let id = ScenarioSpec::subject_id(subject);
        let dir = layout.trial_dir(&id, condition);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        generate_emg(spec, subject, condition)?.write_csv(&layout.emg(&id, condition))?;
        generate_kinematics(spec, subject, condition)?.write_csv(&layout.kinematics(&id, condition))
    })?;
    let path = root.join(SCENARIO_FILE);
    let text = serde_json::to_string_pretty(spec)?;
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(layout)
}
