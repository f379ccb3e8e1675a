//! Error type shared by every stage of the pipeline.

use thiserror::Error;

/// Failures raised by the library.
///
/// Verification outcomes (a lemma clause failing, a certificate ending up
/// `Indeterminate`) are *not* errors: they are reported as data so that a
/// caller can print localized witnesses. Errors are reserved for situations
/// where a computation cannot meaningfully proceed.
#[derive(Debug, Error)]
pub enum Error {
    #[error("division by an interval containing zero: [{lo}, {hi}]")]
    DivisionByIntervalContainingZero { lo: f64, hi: f64 },

    #[error("division by zero in exact arithmetic")]
    DivisionByZero,

    #[error("parameter constraint violated: {0}")]
    ConstraintViolation(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("kappa target {target} is outside the monotone range ({reason})")]
    OutOfMonotoneRange { target: String, reason: String },

    #[error("resonant order n = {n}: n*lambda_minus - lambda_plus vanishes")]
    ResonantOrder { n: usize },

    #[error("point outside the domain of the coordinate map: {0}")]
    DomainError(String),

    #[error("pole of a root curve at {0}")]
    PoleAtRoot(String),

    #[error("certificate failed for condition `{condition}`: {detail}")]
    CertificateFailed { condition: String, detail: String },

    #[error("integration failure: {0}")]
    IntegrationFailure(String),

    #[error("no bracket found for n = {n}: {detail}")]
    NoBracket { n: u32, detail: String },

    #[error("region violation at {stage}: {detail}")]
    RegionViolation { stage: String, detail: String },

    #[error("end point is not in the far-field region: {0}")]
    NotInFarRegion(String),

    #[error("overlap mismatch between legs: {0}")]
    OverlapMismatch(String),

    #[error("singular integrand: {0}")]
    SingularIntegrand(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
