use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid signature matrix: {0}")]
    InvalidSignature(String),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integration failed at x = {x_reached}: {reason}")]
    Integration { x_reached: f64, reason: String },

    #[error("pair (C1, C2) is not admissible: rank {rank} < p = {p}")]
    NotAdmissible { rank: usize, p: usize },

    #[error("{operation} requires the off-diagonal signature (0 -I; I 0); change frame first")]
    UnsupportedSignature { operation: &'static str },

    #[error(
        "boundary matrix singular (condition {condition:.3e}): C1 v1(0) + C2 v2(0) is invertible \
         only for λ in the resolvent set of the boundary extension"
    )]
    BoundaryMatrixSingular { condition: f64 },

    #[error(
        "unwarranted regime: Im λ = {} lies in the strip [{alpha}, {beta}]; rerun with force to get a candidate",
        lambda.im
    )]
    UnwarrantedRegime {
        lambda: Complex64,
        alpha: f64,
        beta: f64,
    },

    #[error(
        "M0 + iI is singular (condition {condition:.3e}); the Cayley transform needs Im M0 > 0"
    )]
    CayleySingular { condition: f64 },

    #[error("window [{a}, {b}] outside solution grid [{lo}, {hi}]")]
    WindowOutsideGrid { a: f64, b: f64, lo: f64, hi: f64 },

    #[error("sample not converged: {0}")]
    NotConverged(String),

    #[error("support [{a}, {b}] of the test function must lie strictly inside (0, {length})")]
    SupportViolation { a: f64, b: f64, length: f64 },

    #[error("expression is not formally selfadjoint (max |Q2| = {0:.3e})")]
    NotFormallySelfadjoint(f64),
}
