//! Synthetic sEMG and joint-angle trials with planted synergies, fatigue
//! shifts and kinematic condition effects.

mod dataset;
mod emg;
mod kin;
mod scenario;
mod shapes;

pub use dataset::{write_dataset, DatasetLayout, SCENARIO_FILE};
pub use emg::{carrier, generate_emg, planted_synergies};
pub use kin::{generate_kinematics, kinematic_offsets, spread_magnitudes};
pub use scenario::{
    default_paper_scenario, fatigue_shift_scenario, flexion_only_scenario, null_scenario, ConditionSpec, ScenarioSpec,
    SpreadTarget, SubjectVariability, Timeline,
};
pub use shapes::{bump, periodic_gauss, smoothstep};
