use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Error)]
#[non_exhaustive]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported degree k={k} for the {variant} element (requires k >= {min})")]
    UnsupportedDegree {
        variant: &'static str,
        k: usize,
        min: usize,
    },

    #[error("unsupported derivative order {0:?} (at most 2 per axis)")]
    UnsupportedDerivative([u8; 3]),

    /// Null-space dimension of the constraint set differs from the functional count.
    #[error("element construction failed: constrained space has dimension {null_dim}, expected {expected}")]
    Unisolvency { null_dim: usize, expected: usize },

    #[error("degree-of-freedom matrix is ill-conditioned (condition number {cond:.3e})")]
    IllConditioned { cond: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error("matrix is not positive definite (pivot {pivot:.3e} at row {row})")]
    NotSpd { row: usize, pivot: f64 },

    #[error(
        "solver did not converge in {iterations} iterations (relative residual {residual:.3e})"
    )]
    NonConvergence {
        iterations: usize,
        residual: f64,
        best_iterate: Vec<f64>,
    },

    #[error("system too large for the direct solver ({size} unknowns, limit {limit})")]
    TooLarge { size: usize, limit: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl std::fmt::Debug for Error {
    // Display form; the best iterate of a failed solve is too long to print.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self}")
    }
}
