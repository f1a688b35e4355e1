use crate::series::MultiIndex;

/// Errors produced by the numerical core.
///
/// `Instability` and `HorizonTooShort` signal numerical failure of an
/// otherwise valid computation; everything else is input validation.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("truncation degree mismatch: {0} vs {1}")]
    DegreeMismatch(u32, u32),

    #[error("composition requires inner map with zero constant term (component {0})")]
    InvalidComposition(u8),

    #[error("multi-index ({},{}) exceeds truncation degree {degree}", alpha.a1, alpha.a2)]
    OutOfRange { alpha: MultiIndex, degree: u32 },

    #[error("normalization violated at component {component}, index ({},{}): expected {expected}, got {got}", alpha.a1, alpha.a2)]
    Normalization {
        component: u8,
        alpha: MultiIndex,
        expected: f64,
        got: String,
    },

    #[error("slice direction must be a unit vector (|v| = {0})")]
    NonUnitVector(f64),

    #[error("invalid convex weights: {0}")]
    Weights(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("trajectory left the closed unit ball at time {tau} (|w| = {norm}); reduce the step or check the field")]
    Instability { tau: f64, norm: f64 },

    #[error("horizon too short: coefficient ({},{}) of component {component} moved by {delta:e} between T/2 and T (tolerance {tol:e})", alpha.a1, alpha.a2)]
    HorizonTooShort {
        component: u8,
        alpha: MultiIndex,
        delta: f64,
        tol: f64,
    },

    #[error("invalid input file: {0}")]
    Schema(String),
}

impl Error {
    /// True for failures of a numerical procedure (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Instability { .. } | Error::HorizonTooShort { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
