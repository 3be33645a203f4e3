use serde::{Deserialize, Serialize};

use super::{DetectionConfig, StudyReport};
use crate::domain::{Condition, SHOULDER_ELEV_DEP, SHOULDER_FLEX_EXT};
use crate::error::{Error, Result};
use crate::util::mean;

pub const UT: &str = "UT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Criterion {
    /// UT RMS increase above threshold.
    #[serde(rename = "a")]
    UtRms,
    /// Shoulder elevation-depression ROM increase.
    #[serde(rename = "b")]
    ElevationRom,
    /// Shoulder flexion-extension ROM increase.
    #[serde(rename = "c")]
    FlexionRom,
}

impl Criterion {
    pub fn letter(self) -> char {
        match self {
            Criterion::UtRms => 'a',
            Criterion::ElevationRom => 'b',
            Criterion::FlexionRom => 'c',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub compensation: bool,
    pub criteria: Vec<Criterion>,
    pub ut_rms_change_pct: f64,
    pub elev_rom_change_deg: f64,
    pub flex_rom_change_deg: f64,
}

impl Verdict {
    fn new(ut_rms_change_pct: f64, elev_rom_change_deg: f64, flex_rom_change_deg: f64, t: &DetectionConfig) -> Self {
        let mut criteria = Vec::new();
        if ut_rms_change_pct > t.ut_rms_increase_pct {
            criteria.push(Criterion::UtRms);
        }
        if elev_rom_change_deg >= t.elev_rom_increase_deg {
            criteria.push(Criterion::ElevationRom);
        }
        if flex_rom_change_deg >= t.flex_rom_increase_deg {
            criteria.push(Criterion::FlexionRom);
        }
        Self { compensation: !criteria.is_empty(), criteria, ut_rms_change_pct, elev_rom_change_deg, flex_rom_change_deg }
    }

    pub fn letters(&self) -> String {
        self.criteria.iter().map(|c| c.letter()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectVerdict {
    pub subject: String,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub thresholds: DetectionConfig,
    /// Mean per-subject UT change and ROM of the group mean trajectories.
    pub group: Verdict,
    pub subjects: Vec<SubjectVerdict>,
}

fn missing(condition: Condition) -> Error {
    Error::MissingCondition { subject: "all subjects".into(), condition }
}

/// Standard-vs-Fatigue compensation verdicts for the group and every subject.
pub fn detect_compensation(report: &StudyReport, thresholds: &DetectionConfig) -> Result<DetectionReport> {
    thresholds.validate()?;
    let ut = report.muscle_index(UT).ok_or_else(|| Error::MissingChannel(UT.into()))?;
    let ed = report.joint_index(SHOULDER_ELEV_DEP).ok_or_else(|| Error::MissingChannel(SHOULDER_ELEV_DEP.into()))?;
    let fe = report.joint_index(SHOULDER_FLEX_EXT).ok_or_else(|| Error::MissingChannel(SHOULDER_FLEX_EXT.into()))?;
    let fs = report.fatigue_for(Condition::Standard).ok_or_else(|| missing(Condition::Standard))?;
    let ff = report.fatigue_for(Condition::Fatigue).ok_or_else(|| missing(Condition::Fatigue))?;
    let ks = report.kinematics_for(Condition::Standard).ok_or_else(|| missing(Condition::Standard))?;
    let kf = report.kinematics_for(Condition::Fatigue).ok_or_else(|| missing(Condition::Fatigue))?;

    let mut ut_changes = Vec::with_capacity(report.subjects.len());
    let mut subjects = Vec::with_capacity(report.subjects.len());
    for (si, subject) in report.subjects.iter().enumerate() {
        let (a, b) = (fs.subjects[si].rms_per_muscle[ut], ff.subjects[si].rms_per_muscle[ut]);
        if a == 0.0 {
            return Err(Error::ZeroReference { index: ut });
        }
        let pct = 100.0 * (b - a) / a;
        ut_changes.push(pct);
        let (rs, rf) = (&ks.subject_rom[si], &kf.subject_rom[si]);
        subjects.push(SubjectVerdict {
            subject: subject.clone(),
            verdict: Verdict::new(pct, rf[ed] - rs[ed], rf[fe] - rs[fe], thresholds),
        });
    }
    let group = Verdict::new(mean(&ut_changes), kf.rom[ed] - ks.rom[ed], kf.rom[fe] - ks.rom[fe], thresholds);
    Ok(DetectionReport { thresholds: *thresholds, group, subjects })
}
