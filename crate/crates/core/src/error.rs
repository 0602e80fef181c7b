use alloc::string::String;

use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid support [{lower}, {upper}]: upper bound must not be below lower bound")]
    InvalidSupport { lower: u32, upper: u32 },

    #[error("invalid CMP parameters (lambda = {lambda}, nu = {nu}): need lambda > 0 and nu >= 0")]
    InvalidParams { lambda: f64, nu: f64 },

    #[error("mixing weight {0} is outside [0, 1]")]
    InvalidWeight(f64),

    #[error("CMP series diverges for nu = 0 and lambda = {lambda} >= 1")]
    Divergent { lambda: f64 },

    #[error("CMP series did not reach the tail tolerance within {0} terms")]
    CutoffExceeded(usize),

    #[error("support mismatch: expected [{expected_lower}, {expected_upper}], found [{found_lower}, {found_upper}]")]
    SupportMismatch {
        expected_lower: u32,
        expected_upper: u32,
        found_lower: u32,
        found_upper: u32,
    },

    #[error("length mismatch: expected {expected} entries, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),

    #[error("data set is empty")]
    EmptyData,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid EM configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown scenario preset {0:?}")]
    UnknownPreset(String),
}
