//! Muscle-synergy and joint-kinematics analysis for bicep-curl
//! compensation detection.
//!
//! The crate covers the whole chain from raw sEMG and joint angles to
//! group statistics and fatigue verdicts, plus a synthetic data generator
//! with known ground truth.

pub mod domain;
pub mod error;
pub mod exec;
pub mod io;
pub mod kinematics;
pub mod nnmf;
pub mod pipeline;
pub mod signal;
pub mod stats;
pub mod synergy;
pub mod synth;
mod util;

pub use domain::{Condition, JOINTS, MUSCLES};
pub use error::{Error, ErrorKind, Result};
pub use exec::Execution;
