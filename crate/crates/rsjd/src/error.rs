//! Error type shared by every module of the engine.
//!
//! Variants split into three broad families that callers (notably the CLI)
//! may want to distinguish: malformed inputs, numerical failures, and
//! economically infeasible requests.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong inside the engine.
#[derive(Debug, Error)]
pub enum Error {
    /// A model failed validation; each entry names one violated condition.
    #[error("invalid model: {}", .0.join("; "))]
    InvalidModel(Vec<String>),

    /// A model document could not be parsed; `path` pinpoints the offending
    /// JSON node (e.g. `regimes[1].jump.b`).
    #[error("model document error at {path}: {message}")]
    Document { path: String, message: String },

    /// An operation that needs the historical measure received a risk-neutral
    /// model (or vice versa for [`Error::ExpectedRiskNeutral`]).
    #[error("{context}: expected a model under the historical measure")]
    ExpectedHistorical { context: &'static str },

    /// An operation that needs a risk-neutral model received a historical one.
    #[error("{context}: expected a model under the risk-neutral measure")]
    ExpectedRiskNeutral { context: &'static str },

    /// Mismatched array lengths or matrix shapes between related inputs.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// The damping parameter lies outside the strip required by the integral.
    #[error("contour parameter nu = {nu} invalid: {requirement}")]
    InvalidContour { nu: f64, requirement: &'static str },

    /// The adaptive quadrature exhausted its panel budget.
    #[error("quadrature did not converge within {max_intervals} panels")]
    QuadratureNonConvergence { max_intervals: usize },

    /// The matrix exponential overflowed or produced non-finite entries.
    #[error("matrix exponential produced non-finite entries")]
    MatrixExpOverflow,

    /// A characteristic-function evaluation returned NaN or infinity.
    #[error("characteristic function non-finite at z = {re} + {im}i")]
    NonFiniteCharfun { re: f64, im: f64 },

    /// No sign change could be bracketed for a root solve.
    #[error("root bracketing failed: {0}")]
    BracketFailure(String),

    /// A bracketed root solve ran out of iterations.
    #[error("root solve did not converge: {0}")]
    RootNoConvergence(String),

    /// A probability came back outside `[0, 1]` by more than the contour
    /// tolerance, signalling a quadrature or contour failure.
    #[error("probability computed as {value:e}, outside [0, 1]")]
    ProbabilityOutOfRange { value: f64 },

    /// The optimal-strike equation has no solution: the target quantile does
    /// not lie below the forward spot.
    #[error("hedge infeasible: quantile {quantile} is not below the forward {forward}")]
    Infeasible { quantile: f64, forward: f64 },

    /// The hedging budget exceeds the put premium at every admissible strike.
    #[error("budget {budget} cannot be spent on a single put position")]
    BudgetTooLarge { budget: f64 },

    /// A requested value-at-risk target lies below the full-hedge floor.
    #[error("target value-at-risk {target} unattainable: floor is {floor}")]
    TargetUnattainable { target: f64, floor: f64 },

    /// A frontier budget left the interior regime (`h` would exceed 1).
    #[error("budget {budget} leaves the interior regime (fraction {fraction})")]
    NotInterior { budget: f64, fraction: f64 },

    /// The calibration objective could not be minimized.
    #[error("calibration failed: {0}")]
    Calibration(String),

    /// A scalar argument violated its domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Convenience constructor for [`Error::InvalidArgument`].
    pub fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
