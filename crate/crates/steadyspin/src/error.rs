use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("particle number must be a positive integer, got {0}")]
    InvalidParticleNumber(i64),

    #[error("{name} = {value} outside valid range {range}")]
    ParameterRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("state is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("quadrature did not converge: best estimate {best:.17e}, error bound {error:.3e}")]
    QuadratureNonConvergence { best: f64, error: f64 },

    #[error("dark-state residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },

    #[error("steady-state factorization is too ill-conditioned (log10 condition ~ {log10_condition:.1})")]
    IllConditioned { log10_condition: f64 },

    #[error("Liouvillian null space is degenerate (second singular value {second:.3e})")]
    DegenerateNullSpace { second: f64 },

    #[error("eigensolver grid not converged: {quantity} changed by {change:.3e} under refinement")]
    GridConvergence { quantity: &'static str, change: f64 },

    #[error("no minimum inside bracket [{lo}, {hi}]")]
    NoMinimumInBracket { lo: f64, hi: f64 },

    #[error("fit is rank deficient: {0}")]
    RankDeficient(&'static str),

    #[error("invalid sweep config: {0}")]
    InvalidConfig(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
