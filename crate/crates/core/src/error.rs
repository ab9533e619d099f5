use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("gate {gate} acts on {support} bits, locality bound is {k_max}")]
    LocalityViolation { gate: usize, support: usize, k_max: usize },
    #[error("{gates} gates per step exceed depth bound {depth_bound}")]
    DepthViolation { gates: usize, depth_bound: usize },
    #[error("gate {gate}: |d kernel/du| = {slope:.4} at u = {at:.4} exceeds bound {bound:.4}")]
    DriveDerivativeViolation { gate: usize, slope: f64, at: f64, bound: f64 },
    #[error("gate {gate}: kernel is not row-stochastic at u = {at:.4} ({detail})")]
    StochasticityViolation { gate: usize, at: f64, detail: String },
    #[error("malformed reservoir: {0}")]
    MalformedReservoir(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("non-finite drive {0} at step {1}")]
    NonfiniteDrive(f64, usize),
    #[error("drive magnitude {value} at step {step} exceeds bound {bound}")]
    DriveOutOfBounds { value: f64, step: usize, bound: f64 },
    #[error("input sequence of length {len} leaves nothing after washout {washout}")]
    EmptyAfterWashout { len: usize, washout: usize },
    #[error("{0} trials requested, at least {1} required")]
    InsufficientTrials(usize, usize),
    #[error("exact mode supports at most {max} bits, got {n}")]
    ExactModeOverflow { n: usize, max: usize },
    #[error("invalid input measure: {0}")]
    InvalidMeasure(String),

    #[error("signals mix bit counts {0} and {1}")]
    MixedDimensions(usize, usize),
    #[error("inverted moments give probability {value} at bitstring {index}")]
    NegativeProbability { index: usize, value: f64 },
    #[error("signal matrix mode {found} where {expected} is required")]
    ModeMismatch { expected: &'static str, found: &'static str },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("target is identically zero")]
    ZeroTarget,
    #[error("all signal columns are zero")]
    DegenerateSignals,
    #[error("empirical signals carry no shot count")]
    MissingShotMetadata,
    #[error("{which} is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    NotPsd { which: &'static str, eigenvalue: f64 },
    #[error("no eigen-direction survives the rank tolerance")]
    EmptyRank,
    #[error("target basis is not orthonormal under the measure (max deviation {0:e})")]
    BasisNotOrthonormal(f64),

    #[error("signal {index} is not positive at u = {at}")]
    NonpositiveSignal { index: usize, at: f64 },
    #[error("numeric rank {rank} below expected {expected} (smallest kept ratio {ratio:e})")]
    ConditioningFailure { rank: usize, expected: usize, ratio: f64 },
    #[error("shattering search exceeded {0} nodes")]
    SearchBudgetExceeded(u64),
    #[error("invalid experiment parameter: {0}")]
    InvalidParameter(String),

    #[error("value {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("path touches p = 0 at sample {0}")]
    SingularPath(usize),

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("config validation: {0}")]
    ConfigValidation(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Format(String),
}

/// Coarse grouping used for process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Numeric,
    Io,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::ConfigValidation(_)
            | Error::UnknownExperiment(_)
            | Error::InvalidParameter(_)
            | Error::InvalidMeasure(_)
            | Error::MalformedReservoir(_)
            | Error::LocalityViolation { .. }
            | Error::DepthViolation { .. }
            | Error::DriveDerivativeViolation { .. }
            | Error::StochasticityViolation { .. }
            | Error::ExactModeOverflow { .. }
            | Error::InsufficientTrials(..) => ErrorKind::Config,
            Error::Io { .. } | Error::Format(_) => ErrorKind::Io,
            _ => ErrorKind::Numeric,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
