//! Labels shared across the analysis: recording conditions, muscles and joints.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Condition {
    WeightFree,
    Standard,
    Fatigue,
}

impl Condition {
    pub const ALL: [Condition; 3] = [Condition::WeightFree, Condition::Standard, Condition::Fatigue];

    /// Directory name used in data trees.
    pub fn dir_name(self) -> &'static str {
        match self {
            Condition::WeightFree => "weight_free",
            Condition::Standard => "standard",
            Condition::Fatigue => "fatigue",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Condition::WeightFree => "WeightFree",
            Condition::Standard => "Standard",
            Condition::Fatigue => "Fatigue",
        };
        f.write_str(s)
    }
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "weightfree" => Ok(Condition::WeightFree),
            "standard" => Ok(Condition::Standard),
            "fatigue" => Ok(Condition::Fatigue),
            _ => Err(Error::InvalidParameter(format!("unknown condition {s:?}"))),
        }
    }
}

/// Canonical muscle order for the eight recorded channels.
pub const MUSCLES: [&str; 8] = ["BIC", "BRA", "UT", "TRI", "FCU", "FCR", "AD", "PD"];

pub const ELBOW_FLEX_EXT: &str = "elbow_flex_ext";
pub const SHOULDER_FLEX_EXT: &str = "shoulder_flex_ext";
pub const SHOULDER_ELEV_DEP: &str = "shoulder_elev_dep";
pub const WRIST_FLEX_EXT: &str = "wrist_flex_ext";

/// Canonical joint order for kinematics.
pub const JOINTS: [&str; 4] = [ELBOW_FLEX_EXT, SHOULDER_FLEX_EXT, SHOULDER_ELEV_DEP, WRIST_FLEX_EXT];

pub fn muscle_labels() -> Vec<String> {
    MUSCLES.iter().map(|s| s.to_string()).collect()
}

pub fn joint_labels() -> Vec<String> {
    JOINTS.iter().map(|s| s.to_string()).collect()
}

pub(crate) fn check_unique(labels: &[String]) -> Result<(), Error> {
    for (i, a) in labels.iter().enumerate() {
        if labels[..i].contains(a) {
            return Err(Error::DuplicateLabel(a.clone()));
        }
    }
    Ok(())
}
