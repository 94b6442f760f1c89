//! Error type shared by the numerical modules.
//!
//! Diagnostics are stored as `f64` regardless of the working scalar so the
//! enum stays non-generic.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FpError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A winding-number test point lies (numerically) on the contour.
    #[error("contour passes within {dist:e} of test point {point}")]
    ContourTooClose { point: String, dist: f64 },

    /// The kernel was evaluated on or too close to the branch cut `[0,1]`.
    #[error("point {z} is within {dist:e} of the branch cut [0,1]")]
    BranchCut { z: String, dist: f64 },

    #[error("need {needed} derivatives of f at 0, have {have}")]
    MissingDerivatives { needed: usize, have: usize },

    /// A sampled integrand value was NaN or infinite.
    #[error("non-finite integrand value at node {node}")]
    Evaluation { node: usize },

    #[error("symmetric rule requires a real-valued-on-[0,1] integrand and a contour symmetric about the real axis")]
    SymmetryRequirement,

    /// Adaptive driver hit its node budget; carries the best estimate.
    #[error("did not converge: N={n_samples}, estimate {estimate:e} with error bound {err_bound:e}")]
    NonConvergence {
        n_samples: usize,
        estimate: f64,
        err_bound: f64,
    },

    #[error("inner quadrature reached its subdivision limit")]
    InnerQuadrature,

    /// The ε-limit sequence failed to settle; carries the sampled values.
    #[error("oracle limit sequence unstable: {0:?}")]
    OracleUnstable(Vec<f64>),

    #[error("insufficient data: {have} usable samples, need {need}")]
    InsufficientData { have: usize, need: usize },

    /// `f` or the kernel stops being analytic on the sampled strip boundary,
    /// i.e. the requested strip half-width is too large.
    #[error("analyticity violated on the strip boundary: {0}")]
    AnalyticityViolated(String),

    #[error("preflight failed: {0}")]
    Preflight(String),

    /// The contour has no analytic extension to complex parameters, which the
    /// strip-supremum estimator needs.
    #[error("contour provides no analytic parameter extension")]
    NoAnalyticExtension,
}

pub type Result<T> = std::result::Result<T, FpError>;
