use thiserror::Error;

/// Errors raised while building bases, local solutions and the global system.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("polynomial centers differ: {left:?} vs {right:?}")]
    CenterMismatch { left: [f64; 2], right: [f64; 2] },

    #[error("coefficient vector has length {found}, expected {expected}")]
    CoefficientLength { expected: usize, found: usize },

    #[error("derivative order {requested} exceeds supported order {supported}")]
    UnsupportedOrder { requested: usize, supported: usize },

    #[error("squared slowness must be positive, got {value} at {point:?}")]
    InvalidMedium { point: [f64; 2], value: f64 },

    #[error("phase level {level} system is rank deficient for direction angle {theta}")]
    DegenerateDirection { level: usize, theta: f64 },

    #[error(
        "amplitude level {level}: constraint system inconsistent \
         (residual {residual:.3e}, rank {rank}, {equations} equations, {unknowns} unknowns)"
    )]
    ConstructionFailure {
        level: usize,
        residual: f64,
        rank: usize,
        equations: usize,
        unknowns: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("omega*h = {omega_h} exceeds the admissible bound {limit}")]
    ResolutionViolation { omega_h: f64, limit: f64 },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("element {element} space built for omega = {found}, expected {expected}")]
    MixedFrequency {
        element: usize,
        expected: f64,
        found: f64,
    },

    #[error("linear solve failed: {0}")]
    SolverFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
