use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid complex: {0}")]
    InvalidComplex(String),

    #[error("OFF parse error at line {line}: {msg}")]
    OffParse { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("degree {degree} out of range {lo}..={hi}")]
    DegreeOutOfRange { degree: usize, lo: usize, hi: usize },

    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },

    #[error("operator shapes do not chain: {0}")]
    ShapeMismatch(String),

    #[error("degenerate {degree}-simplex {index} (zero volume)")]
    DegenerateSimplex { degree: usize, index: usize },

    #[error("mass scheme {scheme} unsupported on {dim}-complexes")]
    UnsupportedScheme { scheme: &'static str, dim: usize },

    #[error("mass matrix entry {index} is not positive ({value})")]
    NonPositiveMass { index: usize, value: f64 },

    #[error("eigensolver did not converge")]
    NoConvergence,

    #[error("operator is not positive semidefinite: eigenvalue {0} below threshold")]
    NegativeEigenvalue(f64),

    #[error("time must be {expect}, got {got}")]
    InvalidTime { expect: &'static str, got: f64 },

    #[error("invalid parameter {name}: {msg}")]
    InvalidParameter { name: &'static str, msg: String },

    #[error("truncation {given} too small for tolerance {tol:e} at t = {t} (need {needed})")]
    TruncationTooSmall {
        given: usize,
        needed: usize,
        t: f64,
        tol: f64,
    },

    #[error("quadrature did not reach tolerance {tol:e} (estimate {estimate:e})")]
    Quadrature { tol: f64, estimate: f64 },

    #[error("coincident points: kernel is singular on the diagonal")]
    CoincidentPoints,

    #[error("point outside the upper half-plane (b = {0})")]
    OutsideHalfPlane(f64),
}
