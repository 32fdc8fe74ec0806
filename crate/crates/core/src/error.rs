use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("quadrature did not converge: estimated error {achieved:e} exceeds requested {requested:e} after {subdivisions} subdivisions")]
    Quadrature {
        achieved: f64,
        requested: f64,
        subdivisions: usize,
    },

    #[error("below spectrum of classical symbol: σ({0}) = 0")]
    BelowClassicalSpectrum(f64),

    #[error("Weyl integral vanishes at λ = {0}")]
    ZeroWeylIntegral(f64),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error(
        "mesh refinement did not converge after {rounds} rounds (last counts {last:?}, h = {h:e})"
    )]
    MeshNotConverged {
        rounds: usize,
        last: (u64, u64),
        h: f64,
    },

    #[error("problem too large: {size} exceeds limit {limit}; {advice}")]
    TooLarge {
        size: usize,
        limit: usize,
        advice: &'static str,
    },

    #[error("outside feasibility window: {0}")]
    Infeasible(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("eigensolver failed to converge at index {0}")]
    EigenNoConvergence(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
