use thiserror::Error;

/// Errors raised across the library. Messages are prefixed with the module
/// that produced them so CLI users can tell where a failure came from.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("gamma: argument {re}{im:+}i is a pole of the gamma function")]
    Pole { re: f64, im: f64 },

    #[error("wright: |z| = {modulus} lies outside the radius of convergence {radius}")]
    DivergentInput { modulus: f64, radius: f64 },

    #[error("{module}: series did not converge within {terms} terms")]
    NoConvergence { module: &'static str, terms: usize },

    #[error("{module}: invalid parameters: {reason}")]
    InvalidParameters { module: &'static str, reason: String },

    #[error("fox_h: unsupported parameter class: {0}")]
    UnsupportedClass(String),

    #[error("fox_h: Mellin-Barnes integral does not converge (omega = {omega} <= 0)")]
    NonConvergent { omega: f64 },

    #[error("fox_h: quadrature refinement stalled (last relative change {last_change:e})")]
    QuadratureFailure { last_change: f64 },

    #[error("fox_h: spec does not have the Gauss multiplication shape for r = {r}")]
    ShapeMismatch { r: u32 },

    #[error("fox_h: asymptotic envelope requires nu > 0 (nu = {nu})")]
    NonDecaying { nu: f64 },

    #[error("frac_series: leading exponent {gamma0} <= -1 is outside the Riemann-Liouville range")]
    ExponentOutOfRange { gamma0: f64 },

    #[error("verify: exponent lattices do not align ({0})")]
    ExponentMisalignment(String),

    #[error("solver_ode: leading coefficient a_n must be positive")]
    DegenerateLeading,

    #[error("{module}: alpha = {alpha} is not covered by the requested branch ({reason})")]
    BranchMismatch {
        module: &'static str,
        alpha: f64,
        reason: &'static str,
    },

    #[error("{module}: characteristic roots are complex; the H-function form needs real parameters")]
    ComplexRoots { module: &'static str },

    #[error("solver_pde: d = 2 has no s-roots; use the d = 2 branch")]
    DegenerateD,

    #[error("solver_pde: alpha = {alpha} is not covered by any solution case")]
    UnsupportedAlpha { alpha: f64 },

    #[error("solver_pde: discriminant {disc} < 0, the exponential closed form needs real roots")]
    ComplexDiscriminant { disc: f64 },

    #[error("verify: step h = {h} too large for t = {t} (need h <= t/50)")]
    StepTooLarge { h: f64, t: f64 },

    #[error("{module}: precondition violated: {reason}")]
    PreconditionViolation { module: &'static str, reason: String },

    #[error("{module}: point ({x}, {t}) is outside the domain x > 0, t > 0")]
    OutOfDomain { module: &'static str, x: f64, t: f64 },

    #[error("input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(module: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameters {
            module,
            reason: reason.into(),
        }
    }

    pub(crate) fn precondition(module: &'static str, reason: impl Into<String>) -> Self {
        Error::PreconditionViolation {
            module,
            reason: reason.into(),
        }
    }
}
