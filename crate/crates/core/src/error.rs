use std::path::PathBuf;

use thiserror::Error;

use crate::moments::GarchParams;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid GARCH parameters: {0}")]
    InvalidParams(String),

    #[error("moment of order {order} is not finite for these parameters")]
    NonFiniteMoment { order: u32 },

    #[error("parameter sampler stalled: {accepted} accepted out of {attempts} draws")]
    RejectionStall { accepted: usize, attempts: usize },

    #[error("need at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },

    #[error("column `{column}` is degenerate (min == max == {value})")]
    DegenerateColumn { column: String, value: f64 },

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("length mismatch: {left} predictions vs {right} targets")]
    LengthMismatch { left: usize, right: usize },

    #[error("validation partition is empty")]
    NoValidationRows,

    #[error("format error at `{path}`: {message}")]
    Format { path: String, message: String },

    #[error("process is not stationary: alpha1 + beta1 = {persistence}")]
    NonStationary { persistence: f64 },

    #[error("series of length {len} is too short (need at least {needed})")]
    SeriesTooShort { len: usize, needed: usize },

    #[error("kurtosis {gamma4} <= 3 cannot come from a GARCH(1,1) with alpha1 > 0")]
    KurtosisTooLow { gamma4: f64 },

    #[error("negative radicand {radicand} when inverting beta1 (alpha1 = {alpha1} too large for kurtosis)")]
    NegativeRadicand { alpha1: f64, radicand: f64 },

    #[error("recovered beta1 = {beta1} is outside [0, 1 - alpha1) for alpha1 = {alpha1}")]
    BetaOutOfRange { alpha1: f64, beta1: f64 },

    #[error("alpha1 + beta1 = {persistence} >= 1, cannot recover alpha0")]
    NonStationaryPair { persistence: f64 },

    #[error("statistic `{0}` is required by the model but missing")]
    MissingStatistic(String),

    #[error("no root of the moment equations in alpha1 range (0, {alpha1_max}]")]
    NoRootInRange { alpha1_max: f64 },

    #[error("moment equations have {} roots", roots.len())]
    Ambiguous { roots: Vec<GarchParams> },

    #[error("feature-set kind mismatch: expected {expected}, found {found}")]
    KindMismatch { expected: String, found: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn format(path: impl Into<String>, message: impl ToString) -> Self {
        Error::Format {
            path: path.into(),
            message: message.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 for data and format problems, 3 for numeric or
    /// domain failures. Usage errors (1) are raised by the argument parser.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::TooFewRows { .. }
            | Error::DegenerateColumn { .. }
            | Error::ShapeMismatch { .. }
            | Error::LengthMismatch { .. }
            | Error::NoValidationRows
            | Error::Format { .. }
            | Error::SeriesTooShort { .. }
            | Error::MissingStatistic(_)
            | Error::KindMismatch { .. }
            | Error::Io { .. } => 2,
            Error::InvalidParams(_)
            | Error::NonFiniteMoment { .. }
            | Error::RejectionStall { .. }
            | Error::NonStationary { .. }
            | Error::KurtosisTooLow { .. }
            | Error::NegativeRadicand { .. }
            | Error::BetaOutOfRange { .. }
            | Error::NonStationaryPair { .. }
            | Error::NoRootInRange { .. }
            | Error::Ambiguous { .. } => 3,
        }
    }
}
