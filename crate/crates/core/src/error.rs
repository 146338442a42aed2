use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised across the toolkit.
///
/// Variant names mirror the invariant that failed, so callers (and the CLI)
/// can report which contract was violated without parsing messages.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon is not convex (turn direction changes at vertex {vertex})")]
    NotConvex { vertex: usize },
    #[error("vertex {vertex} lies on the segment joining its neighbours")]
    CollinearVertex { vertex: usize },
    #[error("interval length must be positive, got {0}")]
    NonPositiveLength(f64),
    #[error("Robin parameter must be positive, got {0}")]
    NonPositiveAlpha(f64),
    #[error("sector opening {0} is outside (0, 2pi)")]
    AngleOutOfRange(f64),
    #[error("sector field does not vanish on the truncation arc (max |u| = {max_abs})")]
    FieldNotCompactlySupported { max_abs: f64 },
    #[error("field does not match the decomposition: {0}")]
    InconsistentDecomposition(String),
    #[error("degenerate truncation spec: {0}")]
    DegenerateSpec(String),
    #[error("mesh quality failure: minimum angle {min_angle_deg:.2} deg is below 15 deg")]
    MeshQualityFailure { min_angle_deg: f64 },
    #[error("bracket invalid: mu^D_{m} = {mu} is not below alpha^2 = {alpha_sq}")]
    BracketInvalid { m: usize, mu: f64, alpha_sq: f64 },
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("Rayleigh quotient of the zero vector")]
    ZeroVector,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("shifted matrix could not be factorized after lowering the shift to {shift}")]
    FactorizationFailure { shift: f64 },
    #[error("eigensolver did not converge: {converged} of {requested} pairs after {restarts} restarts")]
    NoConvergence {
        converged: usize,
        requested: usize,
        restarts: usize,
    },
    #[error("delta1 = {delta1} exceeds (1 + lambda)^-1 = {limit}")]
    DeltaTooLarge { delta1: f64, limit: f64 },
    #[error("rate fit needs at least 3 positive remainders, got {0}")]
    TooFewPoints(usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error: {0}")]
    Parse(String),
}
