use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid mode index {index} for a {n_modes}-mode state")]
    InvalidMode { index: usize, n_modes: usize },

    #[error("a two-mode element needs two distinct modes, got ({0}, {0})")]
    SameMode(usize),

    #[error("efficiency {0} outside [0, 1]")]
    Efficiency(f64),

    #[error("covariance matrix is not positive definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),

    #[error("uncertainty principle violated: symplectic eigenvalue {0} < 1/2")]
    Uncertainty(f64),

    #[error("singular SLD quotient at entry ({row}, {col}): numerator {numerator:e} over vanishing denominator")]
    SingularQuotient { row: usize, col: usize, numerator: f64 },

    #[error("slope of the measured mean vanishes at phi = {phi} (|dX/dphi| = {slope:e})")]
    VanishingSlope { phi: f64, slope: f64 },

    #[error("variance {0:e} is below its rounding uncertainty")]
    UnresolvedVariance(f64),

    #[error("negative variance {0:e} beyond rounding tolerance")]
    NegativeVariance(f64),

    #[error("observable spread vanishes, Fisher information undefined")]
    ZeroSpread,

    #[error("non-positive quantum Fisher information {0}")]
    NonPositiveInformation(f64),

    #[error("repetition count must be at least 1")]
    NoRepetitions,

    #[error("infeasible parameters: {0}")]
    InfeasibleParams(String),

    #[error("indeterminate 0/0 limit: {0}")]
    IndeterminateLimit(String),

    #[error("sensitivity diverges: {0}")]
    DivergentSensitivity(String),

    #[error("leading-order expansion breaks down: {0}")]
    ExpansionBreakdown(String),

    #[error("singular working angle: {0}")]
    SingularAngle(String),

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("objective is infinite on every grid point")]
    AllInfeasible,

    #[error("need at least {needed} points inside the fit window, found {found}")]
    InsufficientPoints { needed: usize, found: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
