use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate extent prior: degrees of freedom {dof} must exceed {min}")]
    DegenerateExtent { dof: f64, min: f64 },

    #[error("innovation covariance is singular")]
    SingularInnovation,

    #[error("measurement set is empty")]
    EmptyMeasurementSet,

    #[error("{0} is not positive definite")]
    NotPositiveDefinite(&'static str),

    #[error("mixture has no components")]
    EmptyMixture,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cannot detect a local hypothesis with zero existence probability")]
    ZeroExistence,

    #[error("hypothesis has zero probability: {0}")]
    ZeroProbability(&'static str),

    #[error("no admissible candidate in {0}")]
    NoAdmissibleCandidate(&'static str),

    #[error("instance too large to enumerate: {tracks} tracks, {measurements} measurements")]
    EnumerationGuard { tracks: usize, measurements: usize },
}
