use std::fmt;

/// Which hypersimplex constraint a density violates. Vertex labels are 1-based.
#[derive(Debug, Clone, PartialEq)]
pub enum DensityViolation {
    WrongLength { len: usize, expected: usize },
    NotFinite { vertex: usize },
    BelowZero { vertex: usize, value: f64 },
    AboveOne { vertex: usize, value: f64 },
    WrongSum { sum: f64, expected: f64 },
}

impl fmt::Display for DensityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::WrongLength { len, expected } => {
                write!(f, "density has {len} entries, expected {expected}")
            }
            Self::NotFinite { vertex } => write!(f, "rho_{vertex} is not finite"),
            Self::BelowZero { vertex, value } => write!(f, "rho_{vertex} = {value} < 0"),
            Self::AboveOne { vertex, value } => write!(f, "rho_{vertex} = {value} > 1"),
            Self::WrongSum { sum, expected } => {
                write!(f, "sum of rho is {sum}, expected N = {expected}")
            }
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("vertex {vertex} out of range 1..={m}")]
    VertexOutOfRange { vertex: usize, m: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("orbitals are not orthonormal (max Gram deviation {0:e})")]
    NotOrthonormal(f64),
    #[error("density outside the hypersimplex: {0}")]
    InvalidDensity(DensityViolation),
    #[error("{0}")]
    BoundaryDensity(String),
    #[error("ensemble weights are not convex: {0}")]
    NotConvex(String),
    #[error("wave function has empty support")]
    EmptySupport,
    #[error("state is not an eigenstate (residual {0:e})")]
    NotEigenstate(f64),
    #[error("eigensolver did not converge after {sweeps} sweeps (residual {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },
    #[error("density decomposition failed (round-trip residual {0:e})")]
    DecompositionFailed(f64),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Iterative method gave up; everything else is a problem with the inputs.
    pub fn is_numerical_failure(&self) -> bool {
        matches!(self, Error::NoConvergence { .. } | Error::DecompositionFailed(_))
    }

    pub fn is_invalid_input(&self) -> bool {
        !self.is_numerical_failure()
    }
}

pub type Result<T> = std::result::Result<T, Error>;
