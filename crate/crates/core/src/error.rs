use core::fmt;

/// Errors raised by the numerical routines.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// A parameter is outside its admissible range.
    InvalidParameter { name: &'static str, reason: &'static str },
    /// `g >= g_c`: the Bogoliubov angle is not real.
    CouplingAtOrAboveCritical { g: f64, g_c: f64 },
    /// The energy sits within the rejection radius of the `n`-th pole line.
    PoleProximity { n: usize, distance: f64 },
    /// A series did not reach the requested tolerance; the partial value is
    /// attached.
    NotConverged { value: f64, tail: f64, terms: usize },
    /// The sign pattern of G inside a pole interval kept changing under
    /// grid refinement.
    UnresolvedInterval(usize),
    /// No root of `F_n(g)` was found on the scanned range.
    NoCrossing { n: usize },
    /// Too few points for a least-squares fit.
    InsufficientPoints { needed: usize, got: usize },
    /// The symmetric eigensolver failed to converge for the given index.
    NoConvergence(usize),
    /// Parity expectation value is not close to ±1.
    AmbiguousParity { expectation: f64 },
    /// A bound state leaks into the outer part of the computational domain.
    DomainTooSmall { half_width: f64, boundary_mass: f64 },
    /// The collapse-point problem has no bound state on this grid.
    NoBoundStates,
    /// Adaptive quadrature exhausted its subdivision budget.
    NonConvergent { estimate: f64, error: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, reason } => {
                write!(f, "invalid parameter `{name}`: {reason}")
            }
            Error::CouplingAtOrAboveCritical { g, g_c } => {
                write!(f, "coupling g = {g} is not below the collapse point g_c = {g_c}")
            }
            Error::PoleProximity { n, distance } => {
                write!(f, "energy lies {distance:e} from pole line {n}")
            }
            Error::NotConverged { value, tail, terms } => {
                write!(f, "series not converged after {terms} terms (value {value}, tail {tail:e})")
            }
            Error::UnresolvedInterval(n) => write!(f, "sign pattern unresolved in pole interval {n}"),
            Error::NoCrossing { n } => write!(f, "F_{n}(g) has no root on the scanned range"),
            Error::InsufficientPoints { needed, got } => {
                write!(f, "need at least {needed} points, got {got}")
            }
            Error::NoConvergence(i) => write!(f, "eigenvalue {i} did not converge"),
            Error::AmbiguousParity { expectation } => {
                write!(f, "parity expectation {expectation} is not close to ±1")
            }
            Error::DomainTooSmall { half_width, boundary_mass } => write!(
                f,
                "domain half-width {half_width} too small: boundary mass {boundary_mass:e}"
            ),
            Error::NoBoundStates => write!(f, "no bound states"),
            Error::NonConvergent { estimate, error } => {
                write!(f, "quadrature did not converge (estimate {estimate}, error {error:e})")
            }
        }
    }
}

impl core::error::Error for Error {}
