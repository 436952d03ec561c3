use thiserror::Error;

/// Domain errors raised by the calculus, solver and catalog layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WardError {
    #[error("series has zero constant term and cannot be inverted")]
    ZeroConstantTerm,
    #[error("inner series of a composition must have zero constant term")]
    NonzeroInnerConstant,
    #[error("invalid h: coefficient h_{index} {reason}")]
    InvalidH { index: usize, reason: &'static str },
    #[error("operator is not contractive (order shift {shift} < 1)")]
    NotContractive { shift: i64 },
    #[error("operator is not non-expansive (order shift {shift} < 0)")]
    NotNonExpansive { shift: i64 },
    #[error("precision exhausted: need truncation {needed}, have {available}")]
    PrecisionExhausted { needed: usize, available: usize },
    #[error("supplied roots do not factor the characteristic polynomial over Q")]
    RootsDontFactor,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("Pochhammer pole: lower parameter {index} vanishes at term {term}")]
    PochhammerPole { index: usize, term: usize },
    #[error("fixed-point iteration did not stabilise after {0} steps")]
    NotConverged(usize),
}

impl WardError {
    /// Stable machine-readable name used in CLI error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            WardError::ZeroConstantTerm => "ZeroConstantTerm",
            WardError::NonzeroInnerConstant => "NonzeroInnerConstant",
            WardError::InvalidH { .. } => "InvalidH",
            WardError::NotContractive { .. } => "NotContractive",
            WardError::NotNonExpansive { .. } => "NotNonExpansive",
            WardError::PrecisionExhausted { .. } => "PrecisionExhausted",
            WardError::RootsDontFactor => "RootsDontFactor",
            WardError::InvalidParameter(_) => "InvalidParameter",
            WardError::PochhammerPole { .. } => "PochhammerPole",
            WardError::NotConverged(_) => "NotConverged",
        }
    }
}

/// Malformed textual input (fractions, series, JSON).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error: {0}")]
pub struct ParseError(pub String);

pub type Result<T, E = WardError> = std::result::Result<T, E>;
