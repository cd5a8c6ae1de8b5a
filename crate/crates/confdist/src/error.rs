//! Error type shared by every module in the crate.

/// Crate-wide error enum.
///
/// Configuration mistakes (bad parameters, out-of-domain arguments) are kept
/// distinct from numeric failures (bracketing, convergence, non-integrable
/// densities) so callers can map them to different exit codes.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// A caller-supplied value fails validation.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An argument lies outside the domain it must belong to.
    #[error("{what} = {value} is outside {domain}")]
    OutsideDomain {
        what: &'static str,
        value: f64,
        domain: String,
    },

    /// A sign change could not be established for a root solve.
    #[error("no sign change while bracketing: f({lo}) = {flo}, f({hi}) = {fhi}")]
    BracketFailure { lo: f64, hi: f64, flo: f64, fhi: f64 },

    /// An iterative scheme ran out of iterations.
    #[error("{what} did not converge within {iterations} iterations")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
    },

    /// An integrand returned NaN or infinity.
    #[error("integrand is not finite at {at}")]
    NonFiniteIntegrand { at: f64 },

    /// A density (prior x likelihood) whose tail mass cannot be bounded.
    #[error("integral does not converge: estimated tail {tail:e} exceeds tolerance {tol:e}")]
    NonIntegrable { tail: f64, tol: f64 },

    /// The observed-data density vanishes, so a sensitivity ratio is undefined.
    #[error("density vanishes at {at}; sensitivity undefined")]
    ZeroDensity { at: f64 },

    /// An expansion formula was evaluated outside its moderate-deviation window.
    #[error("{what} = {value} is outside the moderate-deviation window |x| <= {bound}")]
    WindowViolation {
        what: &'static str,
        value: f64,
        bound: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
