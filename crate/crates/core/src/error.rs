use thiserror::Error;

use crate::spin::{Level, Spin};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("spin {0} is not supported: quadrupolar nuclei need S >= 1")]
    UnsupportedSpin(Spin),
    #[error("spin {0} is not half-integer")]
    NotHalfInteger(Spin),
    #[error("{name} must be {requirement}, got {value}")]
    OutOfRange {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("level {level} is outside the level set of spin {spin}")]
    LevelOutOfRange { level: Level, spin: Spin },
    #[error("length mismatch: expected {expected} entries, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("broadening ratio undefined: rank-4 coefficient of {0} is zero")]
    ZeroRank4Coefficient(String),
    #[error("transition {label} does not exist for spin {spin}")]
    UnknownTransition { label: String, spin: Spin },
    #[error("invalid phase cycle: {0}")]
    InvalidCycle(String),
    #[error("projection has no peak: {0}")]
    NoPeak(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
