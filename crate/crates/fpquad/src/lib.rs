//! Finite-part integrals of `x^-n f(x)` over `[0,1]` for analytic `f`.
//!
//! The divergent integral is given a finite value by subtracting its singular
//! ε-expansion and a logarithmic term before letting ε → 0. For analytic
//! integrands that finite part equals a complex loop integral
//!
//! ```text
//! fp∫₀¹ x⁻ⁿ f(x) dx = (1/2πi) ∮_C z⁻ⁿ f(z) log(z/(z−1)) dz
//!                      − Σ_{k=0}^{n−2} f⁽ᵏ⁾(0) / (k! (n−1−k))
//! ```
//!
//! over any closed contour `C` winding once positively around `[0,1]` inside
//! the analyticity domain of `f`. The loop integral is periodic and analytic
//! in the contour parameter, so the equal-mesh trapezoidal rule converges
//! exponentially in the node count.
//!
//! The crate provides
//! - [`model`]: contours, integrands, problems and their validity checks,
//! - [`quadrature`]: the trapezoidal evaluators (full, symmetry-reduced,
//!   adaptive), the principal-branch kernel and Cauchy-circle derivatives,
//! - [`oracle`]: an independent ε-limit reference evaluator and closed forms
//!   for two benchmark integrals,
//! - [`analysis`]: the theoretical error bound and empirical decay-rate fits,
//! - [`exprparse`]: a small expression language for defining integrands.
//!
//! Core numerics are generic over the real scalar through [`Scalar`];
//! concrete `f64` aliases live at the crate root.

// validation guards are written `!(x > 0)` so NaN fails them too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

pub mod analysis;
pub mod cli;
pub mod error;
pub mod exprparse;
pub mod model;
pub mod oracle;
pub mod quadrature;

pub use error::FpError;
pub use model::{Contour, FpProblem, FpResult, Integrand};
pub use quadrature::QuadratureConfig;

/// Real scalar the engine is generic over: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
{
    /// Shorthand for lossless-enough conversion of literal constants.
    fn c(x: f64) -> Self {
        Self::from_f64(x).expect("constant representable")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Double-precision complex scalar, the default working type.
pub type Complex64 = Complex<f64>;
/// Single-precision complex scalar.
pub type Complex32 = Complex<f32>;

/// Default concrete instantiations.
pub type Contour64 = Contour<f64>;
pub type Integrand64 = Integrand<f64>;
pub type FpProblem64 = FpProblem<f64>;
pub type FpResult64 = FpResult<f64>;
