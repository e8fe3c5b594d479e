//! Error type shared by every module in the crate.

use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// All failure modes surfaced by the library.
///
/// Evaluators are total over their stated domains, so most variants mark
/// contract violations (bad parameters, points outside support) rather than
/// numerical accidents; `Convergence`, `Singular`, and `Divergent` report the
/// genuinely numerical ones together with what was achieved.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter violated its constraint, e.g. a nonpositive rate.
    InvalidParam {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },
    /// An observation lies outside the baseline support.
    OutOfSupport { t: f64 },
    /// A probability argument outside `[0, 1)` (or `[0, 1]` where stated).
    InvalidProbability { p: f64 },
    /// A quantity is undefined at the requested point (vanishing denominator).
    DomainPoint { what: &'static str, t: f64 },
    /// Iterative scheme hit its cap before reaching the requested tolerance.
    Convergence {
        what: &'static str,
        achieved: f64,
        required: f64,
    },
    /// An integral failed to stabilize under refinement (heavy tails).
    Divergent { what: &'static str },
    /// Closed-form branch conditions do not hold for these parameters.
    Branch { what: &'static str },
    /// A regime precondition failed (e.g. series route requires alpha > 1).
    Regime { what: &'static str },
    /// Order-statistic rank outside `1..=n`.
    Rank { i: usize, n: usize },
    /// Matrix inversion failed; the information matrix is singular.
    Singular { what: &'static str },
    /// Fewer moment equations than free parameters.
    InsufficientEquations { needed: usize, got: usize },
    /// Likelihood-ratio test on a non-nested model pair.
    NonNested {
        null: &'static str,
        alt: &'static str,
    },
    /// Dataset failed validation (empty, nonpositive, outside support).
    BadData { line: usize, what: &'static str },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParam {
                name,
                value,
                constraint,
            } => write!(f, "invalid parameter {name}={value}: {constraint}"),
            Error::OutOfSupport { t } => write!(f, "observation {t} outside baseline support"),
            Error::InvalidProbability { p } => write!(f, "invalid probability {p}"),
            Error::DomainPoint { what, t } => write!(f, "{what} undefined at t={t}"),
            Error::Convergence {
                what,
                achieved,
                required,
            } => write!(
                f,
                "{what} did not converge: achieved {achieved:e}, required {required:e}"
            ),
            Error::Divergent { what } => write!(f, "{what} failed to stabilize (divergent?)"),
            Error::Branch { what } => write!(f, "closed-form branch invalid: {what}"),
            Error::Regime { what } => write!(f, "regime precondition failed: {what}"),
            Error::Rank { i, n } => write!(f, "order-statistic rank {i} outside 1..={n}"),
            Error::Singular { what } => write!(f, "singular matrix: {what}"),
            Error::InsufficientEquations { needed, got } => {
                write!(f, "need at least {needed} moment equations, got {got}")
            }
            Error::NonNested { null, alt } => {
                write!(f, "{null} is not nested in {alt}")
            }
            Error::BadData { line, what } => write!(f, "bad data at line {line}: {what}"),
        }
    }
}

impl core::error::Error for Error {}
