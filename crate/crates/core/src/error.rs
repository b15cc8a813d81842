use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("out of domain: {0}")]
    OutOfDomain(String),

    #[error("no root: target {target} outside [{lo}, {hi}]")]
    NoRoot { target: f64, lo: f64, hi: f64 },

    #[error("function is not monotone on the bracket")]
    NotMonotone,

    #[error("non-finite state encountered at t = {t}")]
    BlowUp { t: f64 },

    #[error("not hyperbolic: {0}")]
    NotHyperbolic(String),

    #[error("nonlinearity too large for the graph transform: {0}")]
    DeltaTooLarge(String),

    #[error("no convergence after {iterations} iterations (last distance {distance:e})")]
    NoConvergence { iterations: usize, distance: f64 },

    #[error("contraction ratio undefined: input graphs coincide")]
    UndefinedRatio,

    #[error("inverse map evaluation failed at ({x}, {y})")]
    InversionFailure { x: f64, y: f64 },

    #[error("{direction} trajectory left the ball at step {index}")]
    TrajectoryExit { direction: Direction, index: usize },

    #[error("bound violated: |w| = {norm:e} > {bound:e}")]
    BoundViolated { norm: f64, bound: f64 },

    #[error("adapted metric needs more than {max_terms} terms")]
    RateTooTight { max_terms: usize },

    #[error("trajectory left the chart at t = {exit_time}")]
    TruncatedTrajectory { exit_time: f64 },

    #[error("curvature bounds violated: {0}")]
    InvalidBounds(String),

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("unknown boundary component {0}")]
    UnknownComponent(usize),

    #[error("degenerate ray (hit distance {0:e})")]
    DegenerateRay(f64),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("an obstacle meets the convex hull of two others")]
    EclipseViolation,
}

/// Time direction of an orbit segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Direction::Forward => f.write_str("forward"),
            Direction::Backward => f.write_str("backward"),
        }
    }
}
