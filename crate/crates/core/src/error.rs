use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("point is not on the outer boundary (radius {radius}, expected {expected})")]
    NotOnBoundary { radius: f64, expected: f64 },
    #[error("field does not provide third derivatives")]
    MissingThirdDerivatives,
    #[error("singular system: {0}")]
    Singular(String),
    #[error("eigensolver failure: {0}")]
    Eigen(String),
    #[error("no admissible instability frequency: {0}")]
    NoDesign(String),
    #[error("delays are not commensurate: {0}")]
    Incommensurate(String),
    #[error("fit failed: {0}")]
    Fit(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics themselves, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Singular(_)
                | Error::Eigen(_)
                | Error::NoDesign(_)
                | Error::Fit(_)
                | Error::Incommensurate(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
