use std::path::PathBuf;

use crate::domain::Condition;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure class, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Data,
    Numerical,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Validation => 2,
            ErrorKind::Data => 3,
            ErrorKind::Numerical => 4,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    // validation
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid band edges {low_hz} Hz - {high_hz} Hz (nyquist {nyquist} Hz)")]
    InvalidBand { low_hz: f64, high_hz: f64, nyquist: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("rank {rank} outside 1..={max}")]
    RankOutOfRange { rank: usize, max: usize },
    #[error("{what}: n = {n} outside {min}..={max}")]
    SizeOutOfRange { what: &'static str, n: usize, min: usize, max: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    // data
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(String),
    #[error("json: {0}")]
    Json(String),
    #[error("missing channel {0:?}")]
    MissingChannel(String),
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("non-finite sample at row {row}, column {col}")]
    NonFiniteSample { row: usize, col: usize },
    #[error("time column not strictly increasing at row {row}")]
    NonMonotonicTime { row: usize },
    #[error("sample rate {measured} Hz does not match expected {expected} Hz")]
    SampleRateMismatch { expected: f64, measured: f64 },
    #[error("sampling interval jitter beyond 1% at row {row}")]
    SampleRateJitter { row: usize },
    #[error("signal too short: {len} samples, need {needed}")]
    SignalTooShort { len: usize, needed: usize },
    #[error("empty signal")]
    EmptySignal,
    #[error("matrix contains negative entries")]
    NegativeEntries,
    #[error("no cycles detected")]
    NoCyclesDetected,
    #[error("detected {found} cycles, expected {expected}")]
    CycleCountMismatch { found: usize, expected: usize },
    #[error("cycle boundaries at samples {first} and {second} closer than {min_sep} samples")]
    PeaksTooClose { first: usize, second: usize, min_sep: usize },
    #[error("segment of {len} samples too short (need {min})")]
    SegmentTooShort { len: usize, min: usize },
    #[error("subject {subject}: missing condition {condition}")]
    MissingCondition { subject: String, condition: Condition },
    #[error("need at least {needed} subjects, found {found}")]
    InsufficientSubjects { needed: usize, found: usize },

    // numerical
    #[error("zero variance")]
    ZeroVariance,
    #[error("synergy column {column} has zero norm")]
    DegenerateSynergy { column: usize },
    #[error("zero vector")]
    ZeroVector,
    #[error("reference value is zero for channel {index}")]
    ZeroReference { index: usize },
    #[error("all paired differences are zero")]
    AllZeroDifferences,
    #[error("VAF undefined for an all-zero matrix")]
    UndefinedVaf,
    #[error("degenerate groups: no within-group spread")]
    DegenerateGroups,

    #[error("subject {subject} / {condition}: {source}")]
    AtSubject { subject: String, condition: Condition, source: Box<Error> },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            InvalidConfig(_) | InvalidBand { .. } | InvalidParameter(_) | RankOutOfRange { .. }
            | SizeOutOfRange { .. } | ShapeMismatch(_) | InvalidScenario(_) => ErrorKind::Validation,
            ZeroVariance | DegenerateSynergy { .. } | ZeroVector | ZeroReference { .. }
            | AllZeroDifferences | UndefinedVaf | DegenerateGroups => ErrorKind::Numerical,
            AtSubject { source, .. } => source.kind(),
            _ => ErrorKind::Data,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.kind().exit_code()
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn at(self, subject: &str, condition: Condition) -> Self {
        match self {
            e @ (Error::AtSubject { .. } | Error::MissingCondition { .. }) => e,
            e => Error::AtSubject { subject: subject.to_string(), condition, source: Box::new(e) },
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
