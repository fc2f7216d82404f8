use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative or quadrature routine failed to reach its tolerance.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Two fields that must share a grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A requested frequency is not resolved by the sampling grid.
    #[error("resolution error: frequency {frequency} exceeds the Nyquist limit {nyquist}")]
    Resolution { frequency: f64, nyquist: f64 },

    /// The series bound diverges because its convergence exponent is not below -1.
    #[error("divergent series: convergence exponent nu = {nu} is not below -1 (excluded endpoint (d,r,p,q) = (1,1,2,2))")]
    DivergentSeries { nu: f64 },

    /// The symplectic reduction met a (numerically) degenerate form.
    #[error("numerical rank deficiency: largest remaining pairing {pairing:e} below threshold {threshold:e}")]
    RankDeficient { pairing: f64, threshold: f64 },

    /// The restricted field is too small for a relative residual to mean anything.
    #[error("undefined residual: output norm {output:e} is below {floor:e} times the input norm {input:e}")]
    UndefinedResidual { output: f64, input: f64, floor: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
