//! Error type shared by all modules.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A parameter record violates one of its invariants.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidSpec { field: &'static str, reason: String },

    /// Euler-angle coordinate singularity: sin(theta) = 0 with nonzero
    /// transverse angular momentum p_phi - p_psi cos(theta).
    #[error("singular orientation: sin(theta) = 0 with |p_phi - p_psi cos(theta)| = {residual:.3e}")]
    SingularOrientation { residual: f64 },

    /// An input lies outside the region where a closed form is derived
    /// (non-positive radicand, unreachable momenta, argument outside [0,1]).
    #[error("domain error in {context}: {reason}")]
    Domain { context: &'static str, reason: String },

    /// Adaptive quadrature failed to reach the requested tolerance.
    #[error("quadrature did not converge: estimated error {estimate:.3e} > tolerance {tolerance:.3e}")]
    QuadratureNonConvergence { estimate: f64, tolerance: f64 },

    /// The rotational basis hit the l_max cap before the tail-mass bound.
    #[error("thermal basis truncation failed: tail bound {tail:.3e} at l_max cap {l_cap}")]
    TruncationFailure { l_cap: u32, tail: f64 },

    /// A matrix expected to be Hermitian is not.
    #[error("non-Hermitian potential matrix: max asymmetry {max_asymmetry:.3e}")]
    NonHermitian { max_asymmetry: f64 },

    /// Diffraction-order truncation lost more probability than allowed.
    #[error("order-space truncation mass {mass:.3e} exceeds budget {budget:.3e} (n_max too small)")]
    TruncationMass { mass: f64, budget: f64 },

    /// An input collection that must be non-empty or normalizable is not.
    #[error("invalid input in {context}: {reason}")]
    InvalidInput { context: &'static str, reason: String },

    /// A fringe pattern with (near-)zero mean cannot define a visibility.
    #[error("zero-mean fringe pattern: S0 = {s0:.3e}")]
    ZeroMeanPattern { s0: f64 },
}

impl Error {
    pub(crate) fn domain(context: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            context,
            reason: reason.into(),
        }
    }

    pub(crate) fn spec(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidSpec {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn input(context: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            context,
            reason: reason.into(),
        }
    }
}
