use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::domain::{joint_labels, muscle_labels, Condition};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::kinematics::KinConfig;
use crate::nnmf::NnmfConfig;
use crate::signal::{EnvelopeConfig, FatigueConfig, FilterConfig, PsdConfig};

/// Cutoffs for the standard-vs-fatigue verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionConfig {
    /// percent increase of UT RMS from Standard to Fatigue
    pub ut_rms_increase_pct: f64,
    pub elev_rom_increase_deg: f64,
    pub flex_rom_increase_deg: f64,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        Self { ut_rms_increase_pct: 50.0, elev_rom_increase_deg: 10.0, flex_rom_increase_deg: 10.0 }
    }
}

impl DetectionConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("detection.ut_rms_increase_pct", self.ut_rms_increase_pct),
            ("detection.elev_rom_increase_deg", self.elev_rom_increase_deg),
            ("detection.flex_rom_increase_deg", self.flex_rom_increase_deg),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidConfig(format!("{name} = {v}")));
            }
        }
        Ok(())
    }
}

/// Everything one study run needs. Loaded from TOML; every section is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    pub data_root: PathBuf,
    /// Empty means every `subject_*` directory under `data_root`.
    pub subjects: Vec<String>,
    pub conditions: Vec<Condition>,
    pub output_dir: PathBuf,
    pub execution: Execution,
    /// Skip decomposition entirely (fatigue metrics and kinematics only).
    pub synergies: bool,
    pub emg_rate: Option<f64>,
    pub kin_rate: Option<f64>,
    pub muscles: Vec<String>,
    pub joints: Vec<String>,
    pub filter: FilterConfig,
    pub envelope: EnvelopeConfig,
    pub psd: PsdConfig,
    pub fatigue: FatigueConfig,
    pub nnmf: NnmfConfig,
    pub kin: KinConfig,
    pub detection: DetectionConfig,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            data_root: PathBuf::from("data"),
            subjects: Vec::new(),
            conditions: Condition::ALL.to_vec(),
            output_dir: PathBuf::from("out"),
            execution: Execution::default(),
            synergies: true,
            emg_rate: None,
            kin_rate: None,
            muscles: muscle_labels(),
            joints: joint_labels(),
            filter: FilterConfig::default(),
            envelope: EnvelopeConfig::default(),
            psd: PsdConfig::default(),
            fatigue: FatigueConfig::default(),
            nnmf: NnmfConfig::default(),
            kin: KinConfig::default(),
            detection: DetectionConfig::default(),
        }
    }
}

impl StudyConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: StudyConfig = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative paths inside it resolve against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let Some(base) = path.parent() {
            if cfg.data_root.is_relative() {
                cfg.data_root = base.join(&cfg.data_root);
            }
            if cfg.output_dir.is_relative() {
                cfg.output_dir = base.join(&cfg.output_dir);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.conditions.is_empty() {
            return Err(Error::InvalidConfig("conditions is empty".into()));
        }
        for (i, c) in self.conditions.iter().enumerate() {
            if self.conditions[..i].contains(c) {
                return Err(Error::InvalidConfig(format!("condition {c} listed twice")));
            }
        }
        if self.muscles.is_empty() || self.joints.is_empty() {
            return Err(Error::InvalidConfig("muscles and joints must be non-empty".into()));
        }
        crate::domain::check_unique(&self.muscles)?;
        crate::domain::check_unique(&self.joints)?;
        if !self.joints.iter().any(|j| j == crate::domain::ELBOW_FLEX_EXT) {
            return Err(Error::InvalidConfig(format!("joints must include {}", crate::domain::ELBOW_FLEX_EXT)));
        }
        for r in [self.emg_rate, self.kin_rate].into_iter().flatten() {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::InvalidConfig(format!("sample rate {r}")));
            }
        }
        if self.filter.order == 0 || !(self.filter.low_hz > 0.0 && self.filter.low_hz < self.filter.high_hz) {
            return Err(Error::InvalidConfig(format!(
                "filter band {}-{} Hz, order {}",
                self.filter.low_hz, self.filter.high_hz, self.filter.order
            )));
        }
        if self.envelope.smooth_samples == 0 {
            return Err(Error::InvalidConfig("envelope.smooth_samples must be >= 1".into()));
        }
        self.psd.validate()?;
        self.nnmf.validate()?;
        self.kin.validate()?;
        self.detection.validate()
    }

    /// Subjects to analyse: the configured list, or every `subject_*` directory.
    pub fn resolve_subjects(&self) -> Result<Vec<String>> {
        if !self.subjects.is_empty() {
            return Ok(self.subjects.clone());
        }
        let dir = std::fs::read_dir(&self.data_root).map_err(|e| Error::io(&self.data_root, e))?;
        let mut out = Vec::new();
        for entry in dir {
            let entry = entry.map_err(|e| Error::io(&self.data_root, e))?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if name.starts_with("subject_") && entry.path().is_dir() {
                out.push(name);
            }
        }
        out.sort();
        if out.is_empty() {
            return Err(Error::InsufficientSubjects { needed: 1, found: 0 });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dotted_keys_and_sections_parse() {
        let cfg = StudyConfig::from_toml_str(
            r#"
            data_root = "d"
            conditions = ["Standard", "Fatigue"]
            nnmf.restarts = 5
            kin.interp = "linear"
            [detection]
            ut_rms_increase_pct = 40.0
            "#,
        )
        .unwrap();
        assert_eq!(cfg.nnmf.restarts, 5);
        assert_eq!(cfg.nnmf.tol, 1e-6);
        assert_eq!(cfg.detection.ut_rms_increase_pct, 40.0);
        assert_eq!(cfg.kin.interp, crate::kinematics::Interpolation::Linear);
        assert_eq!(cfg.conditions, vec![Condition::Standard, Condition::Fatigue]);
    }

    #[test]
    fn bad_configs_are_validation_errors() {
        for text in ["nnmf.restarts = 0", "bogus = 1", "conditions = []", "filter.low_hz = 90.0", "conditions = [\"Tired\"]"] {
            let err = StudyConfig::from_toml_str(text).unwrap_err();
            assert_eq!(err.kind(), crate::ErrorKind::Validation, "{text}: {err}");
        }
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = StudyConfig::default();
        assert_eq!(StudyConfig::from_toml_str(&cfg.to_toml_string()).unwrap(), cfg);
    }
}
