use thiserror::Error;

/// Errors raised by grid, path-set, estimation and metric operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("horizon must be positive and finite, got {0}")]
    InvalidHorizon(f64),

    #[error("level must be between 1 and {max}, got {got}")]
    InvalidLevel { got: u32, max: u32 },

    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("cannot coarsen with refine: target level {to} is below current level {from}")]
    CannotCoarsen { from: u32, to: u32 },

    #[error("cannot refine with restrict: target level {to} is above current level {from}")]
    CannotRefine { from: u32, to: u32 },

    #[error("{name} must be in {range}, got {value}")]
    OutOfRange {
        name: &'static str,
        range: &'static str,
        value: f64,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("unsupported path set: {0}")]
    Unsupported(String),

    #[error("path {index} is not a member of the set")]
    NonMember { index: usize },

    #[error("sets not certified disjoint (separation lower bound {0})")]
    NotSeparated(f64),

    #[error("family is not nested: {0}")]
    NotNested(String),

    #[error("at least {min} samples required, got {got}")]
    TooFewSamples { min: u64, got: u64 },

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_range(
    name: &'static str,
    range: &'static str,
    value: f64,
    ok: bool,
) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::OutOfRange { name, range, value })
    }
}
