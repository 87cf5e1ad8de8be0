use thiserror::Error;

/// Errors raised by the lattice, scattering and propagation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("potential line {line}: {message}")]
    PotentialParse { line: usize, message: String },

    #[error("potential violates q12 = q21 at site {site} ({q12} != {q21})")]
    AsymmetricCoupling { site: i64, q12: f64, q21: f64 },

    #[error("potential has q21 = -1 at site {site}")]
    SingularCoupling { site: i64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("omega = {0} lies on the cut [0, 4]; a boundary side is required")]
    AmbiguousBranch(f64),

    #[error("band-edge singularity at theta = {theta}")]
    BandEdge { theta: f64 },

    #[error("singular transfer matrix A_n at site {site}")]
    SingularRecursion { site: i64 },

    #[error("potential tail {tail:e} exceeds truncation tolerance {tolerance:e}")]
    Truncation { tail: f64, tolerance: f64 },

    #[error("lambda = {lambda} is within {radius:e} of bound state {eigenvalue}")]
    Pole {
        lambda: String,
        eigenvalue: f64,
        radius: f64,
    },

    #[error("consistency failure: {0}")]
    Consistency(String),

    #[error("quadrature did not converge: error estimate {estimate:e} above tolerance {tolerance:e}")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("window too large: matrix dimension {dim} exceeds {limit}; reduce --window")]
    MemoryGuard { dim: usize, limit: usize },

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code: 1 for input and validation problems, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_)
            | Error::PotentialParse { .. }
            | Error::AsymmetricCoupling { .. }
            | Error::SingularCoupling { .. }
            | Error::AmbiguousBranch(_)
            | Error::MemoryGuard { .. }
            | Error::Io(_) => 1,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
