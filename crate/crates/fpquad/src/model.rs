//! Domain types: integrands, contours, problems, results, and the preflight
//! checks that guard the loop-integral representation's hypotheses.
//!
//! The representation requires the contour to wind once positively around
//! every point of `[0,1]` and the integrand to be analytic on and inside the
//! contour (apart from anything outside it). Violating either silently
//! produces plausible-looking garbage, so the checks here are run by default
//! in the CLI and available as library calls.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;

use crate::error::{FpError, Result};
use crate::Scalar;

type EvalFn<T> = Arc<dyn Fn(Complex<T>) -> Complex<T> + Send + Sync>;
type ParamFn<T> = Arc<dyn Fn(T) -> Complex<T> + Send + Sync>;

/// An analytic function handle: evaluation at complex points plus metadata.
#[derive(Clone)]
pub struct Integrand<T: Scalar> {
    eval: EvalFn<T>,
    /// True when `f` restricted to `[0,1]` is real-valued.
    pub real_on_interval: bool,
    /// Exact derivatives `[f(0), f'(0), ...]` when available.
    pub known_derivs_at_zero: Option<Vec<Complex<T>>>,
    /// Known poles / branch points of `f`, used for contour validation.
    pub singularities: Vec<Complex<T>>,
}

impl<T: Scalar> Integrand<T> {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(Complex<T>) -> Complex<T> + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(f),
            real_on_interval: false,
            known_derivs_at_zero: None,
            singularities: Vec::new(),
        }
    }

    pub fn real_on_interval(mut self, yes: bool) -> Self {
        self.real_on_interval = yes;
        self
    }

    pub fn with_derivs_at_zero(mut self, derivs: Vec<Complex<T>>) -> Self {
        self.known_derivs_at_zero = Some(derivs);
        self
    }

    pub fn with_real_derivs_at_zero(self, derivs: &[T]) -> Self {
        self.with_derivs_at_zero(derivs.iter().map(|&d| Complex::new(d, T::zero())).collect())
    }

    pub fn with_singularities(mut self, sing: Vec<Complex<T>>) -> Self {
        self.singularities = sing;
        self
    }

    #[inline]
    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        (self.eval)(z)
    }
}

impl<T: Scalar> fmt::Debug for Integrand<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Integrand")
            .field("real_on_interval", &self.real_on_interval)
            .field("known_derivs_at_zero", &self.known_derivs_at_zero)
            .field("singularities", &self.singularities)
            .finish_non_exhaustive()
    }
}

/// Periodic parameterization `φ(u)` of a closed curve, with its derivative.
///
/// Immutable after construction so results are reproducible and cacheable.
#[derive(Clone)]
pub struct Contour<T: Scalar> {
    phi: ParamFn<T>,
    dphi: ParamFn<T>,
    /// Analytic extension of `φ` to complex parameters, when one exists.
    /// Needed only by the strip-supremum estimator in `analysis`.
    phi_analytic: Option<EvalFn<T>>,
    period: T,
    symmetric: bool,
}

impl<T: Scalar> Contour<T> {
    /// `symmetric` asserts `φ(−u) = conj(φ(u))`; it is trusted here and
    /// verifiable with [`check_symmetry`].
    pub fn new<P, D>(phi: P, dphi: D, period: T, symmetric: bool) -> Result<Self>
    where
        P: Fn(T) -> Complex<T> + Send + Sync + 'static,
        D: Fn(T) -> Complex<T> + Send + Sync + 'static,
    {
        if !(period > T::zero()) {
            return Err(FpError::InvalidParameter(format!(
                "contour period must be positive, got {period}"
            )));
        }
        Ok(Self {
            phi: Arc::new(phi),
            dphi: Arc::new(dphi),
            phi_analytic: None,
            period,
            symmetric,
        })
    }

    pub fn with_analytic_extension<F>(mut self, f: F) -> Self
    where
        F: Fn(Complex<T>) -> Complex<T> + Send + Sync + 'static,
    {
        self.phi_analytic = Some(Arc::new(f));
        self
    }

    #[inline]
    pub fn phi(&self, u: T) -> Complex<T> {
        (self.phi)(u)
    }

    #[inline]
    pub fn dphi(&self, u: T) -> Complex<T> {
        (self.dphi)(u)
    }

    /// `φ(w)` for complex parameter `w`, if an extension was registered.
    pub fn phi_analytic(&self, w: Complex<T>) -> Option<Complex<T>> {
        self.phi_analytic.as_ref().map(|f| f(w))
    }

    pub fn period(&self) -> T {
        self.period
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Same curve traversed in the opposite direction. Used in tests; note
    /// the result no longer winds positively.
    pub fn reversed(&self) -> Self {
        let phi = Arc::clone(&self.phi);
        let dphi = Arc::clone(&self.dphi);
        let p = self.period;
        Self {
            phi: Arc::new(move |u| phi(p - u)),
            dphi: Arc::new(move |u| -dphi(p - u)),
            phi_analytic: None,
            period: p,
            symmetric: self.symmetric,
        }
    }
}

impl<T: Scalar> fmt::Debug for Contour<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Contour")
            .field("period", &self.period)
            .field("symmetric", &self.symmetric)
            .field("analytic_extension", &self.phi_analytic.is_some())
            .finish_non_exhaustive()
    }
}

/// One finite-part integral instance: order `n`, integrand and contour.
#[derive(Clone, Debug)]
pub struct FpProblem<T: Scalar> {
    pub n: u32,
    pub f: Integrand<T>,
    pub contour: Contour<T>,
}

impl<T: Scalar> FpProblem<T> {
    pub fn new(n: u32, f: Integrand<T>, contour: Contour<T>) -> Result<Self> {
        if n < 1 {
            return Err(FpError::InvalidParameter(
                "singularity order n must be >= 1".into(),
            ));
        }
        Ok(Self { n, f, contour })
    }
}

/// Result of one evaluation.
#[derive(Clone, Debug)]
pub struct FpResult<T: Scalar> {
    /// The computed value. When the real-result policy applied, the imaginary
    /// part has been moved into `imag_residual`.
    pub value: Complex<T>,
    /// Number of integrand evaluations performed.
    pub n_samples: usize,
    /// `|I_2N − I_N|` from the adaptive driver, when available.
    pub err_estimate: Option<T>,
    /// `|Im|` of the raw complex result when the value is reported as real;
    /// a cheap correctness sentinel for real integrands.
    pub imag_residual: T,
}

impl<T: Scalar> FpResult<T> {
    pub fn real(&self) -> T {
        self.value.re
    }
}

/// The ellipse with foci 0 and 1 through `(1±ρ²)/(2ρ)`-type axes:
///
/// `φ(u) = 1/2 + (1/4)(ρ+1/ρ) cos u + (i/4)(ρ−1/ρ) sin u`, period `2π`.
///
/// Degenerates to the segment `[0,1]` as ρ → 1, hence the ρ > 1 requirement.
pub fn ellipse_contour<T: Scalar>(rho: T) -> Result<Contour<T>> {
    if !(rho > T::one()) || !rho.is_finite() {
        return Err(FpError::InvalidParameter(format!(
            "ellipse parameter rho must be > 1, got {rho}"
        )));
    }
    let quarter = T::c(0.25);
    let half = T::c(0.5);
    let a = quarter * (rho + rho.recip());
    let b = quarter * (rho - rho.recip());
    let period = T::c(2.0) * T::PI();
    Ok(Contour::new(
        move |u: T| Complex::new(half + a * u.cos(), b * u.sin()),
        move |u: T| Complex::new(-a * u.sin(), b * u.cos()),
        period,
        true,
    )?
    .with_analytic_extension(move |w: Complex<T>| {
        // cos/sin of a complex parameter; same formula continued off the axis
        let (cw, sw) = (w.cos(), w.sin());
        Complex::new(half, T::zero()) + cw.scale(a) + (sw * Complex::i()).scale(b)
    }))
}

/// Winding number of the contour around `point`, by the trapezoidal rule on
/// `(1/2πi) ∮ φ'(u)/(φ(u)−point) du` with `n_check` nodes, rounded to the
/// nearest integer.
pub fn winding_number<T: Scalar>(
    c: &Contour<T>,
    point: Complex<T>,
    n_check: usize,
) -> Result<i32> {
    let h = c.period() / T::from_usize(n_check).unwrap();
    let two_pi = T::c(2.0) * T::PI();
    let min_dist = T::c(1e-12);
    let mut acc = Complex::<T>::new(T::zero(), T::zero());
    for k in 0..n_check {
        let u = h * T::from_usize(k).unwrap();
        let dz = c.phi(u) - point;
        if dz.norm() < min_dist {
            return Err(FpError::ContourTooClose {
                point: format!("{point}"),
                dist: dz.norm().to_f64().unwrap_or(f64::NAN),
            });
        }
        acc = acc + c.dphi(u) / dz;
    }
    // Re[(h/2πi)·acc] = Im(acc)·h/2π
    let re = acc.im * h / two_pi;
    Ok(re.round().to_f64().unwrap_or(f64::NAN) as i32)
}

/// True iff the contour winds once positively around each of `{0, 1/2, 1}`.
pub fn encloses_unit_interval<T: Scalar>(c: &Contour<T>, n_check: usize) -> Result<bool> {
    assert!(n_check >= 16, "winding check needs at least 16 nodes");
    for re in [0.0, 0.5, 1.0] {
        let p = Complex::new(T::c(re), T::zero());
        if winding_number(c, p, n_check)? != 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Sampled test of mirror symmetry about the real axis:
/// `φ(period − u) = conj(φ(u))` within `1e−13·(1 + max|φ|)`.
pub fn check_symmetry<T: Scalar>(c: &Contour<T>, n_check: usize) -> bool {
    assert!(n_check >= 8, "symmetry check needs at least 8 nodes");
    let h = c.period() / T::from_usize(n_check).unwrap();
    let mut max_dev = T::zero();
    let mut max_mag = T::zero();
    for k in 0..n_check {
        let u = h * T::from_usize(k).unwrap();
        let a = c.phi(c.period() - u);
        let b = c.phi(u).conj();
        max_dev = max_dev.max((a - b).norm());
        max_mag = max_mag.max(c.phi(u).norm());
    }
    let tol = T::c(1e-13).max(T::epsilon() * T::c(100.0));
    max_dev <= tol * (T::one() + max_mag)
}

/// Outcome of the preflight checks for one problem.
#[derive(Clone, Debug)]
pub struct PreflightReport {
    pub winding_ok: bool,
    pub symmetry_ok: bool,
    /// Declared singularities of `f` found *inside* the contour, if any.
    pub enclosed_singularities: Vec<String>,
}

impl PreflightReport {
    pub fn ok(&self) -> bool {
        self.winding_ok && self.enclosed_singularities.is_empty()
    }
}

/// Verifies the representation's hypotheses: winding +1 around `{0,1/2,1}`,
/// the symmetry flag (when set), and winding 0 around every declared
/// singularity of `f`.
pub fn preflight<T: Scalar>(p: &FpProblem<T>, n_check: usize) -> Result<PreflightReport> {
    let winding_ok = encloses_unit_interval(&p.contour, n_check)?;
    let symmetry_ok = if p.contour.is_symmetric() {
        check_symmetry(&p.contour, n_check.max(8))
    } else {
        true
    };
    let mut enclosed = Vec::new();
    for s in &p.f.singularities {
        if winding_number(&p.contour, *s, n_check)? != 0 {
            enclosed.push(format!("{s}"));
        }
    }
    Ok(PreflightReport {
        winding_ok,
        symmetry_ok,
        enclosed_singularities: enclosed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Complex64;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ellipse_points() {
        let c = ellipse_contour(2.0).unwrap();
        let p0 = c.phi(0.0);
        assert!((p0 - c64(1.125, 0.0)).norm() < 1e-15);
        let p1 = c.phi(std::f64::consts::FRAC_PI_2);
        assert!((p1 - c64(0.5, 0.375)).norm() < 1e-15);
        let c10 = ellipse_contour(10.0).unwrap();
        let p2 = c10.phi(std::f64::consts::PI);
        assert!((p2 - c64(-2.025, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn ellipse_rejects_degenerate() {
        assert!(ellipse_contour(1.0).is_err());
        assert!(ellipse_contour(0.9).is_err());
    }

    #[test]
    fn ellipse_derivative_matches_central_differences() {
        let c = ellipse_contour(2.0).unwrap();
        let h = 1e-6;
        for k in 0..32 {
            let u = c.period() * k as f64 / 32.0;
            let num = (c.phi(u + h) - c.phi(u - h)).scale(1.0 / (2.0 * h));
            assert!(
                (num - c.dphi(u)).norm() <= 1e-8,
                "dphi mismatch at u={u}: {num} vs {}",
                c.dphi(u)
            );
        }
    }

    #[test]
    fn winding_and_enclosure() {
        let c = ellipse_contour(2.0).unwrap();
        assert!(encloses_unit_interval(&c, 64).unwrap());
        assert_eq!(winding_number(&c, c64(-1.5, 0.0), 128).unwrap(), 0);

        // small circle around 0 excludes z = 1
        let small = Contour::new(
            |u: f64| Complex64::new(0.1 * u.cos(), 0.1 * u.sin()),
            |u: f64| Complex64::new(-0.1 * u.sin(), 0.1 * u.cos()),
            2.0 * std::f64::consts::PI,
            true,
        )
        .unwrap();
        assert!(!encloses_unit_interval(&small, 64).unwrap());
    }

    #[test]
    fn reversed_orientation_flips_enclosure() {
        let c = ellipse_contour(2.0).unwrap();
        let r = c.reversed();
        assert_eq!(winding_number(&r, c64(0.5, 0.0), 64).unwrap(), -1);
        assert!(!encloses_unit_interval(&r, 64).unwrap());
    }

    #[test]
    fn too_close_point_errors() {
        let c = ellipse_contour(2.0).unwrap();
        let on_curve = c.phi(0.0);
        assert!(matches!(
            winding_number(&c, on_curve, 64),
            Err(FpError::ContourTooClose { .. })
        ));
    }

    #[test]
    fn symmetry_detection() {
        for rho in [1.1, 2.0, 10.0, 100.0] {
            let c = ellipse_contour(rho).unwrap();
            assert!(check_symmetry(&c, 32), "rho={rho}");
        }
        // translate off the real axis: symmetry broken
        let shifted = Contour::new(
            |u: f64| {
                let a = 0.5625;
                let b = 0.4375;
                Complex64::new(0.5 + a * u.cos(), 0.1 + b * u.sin())
            },
            |u: f64| Complex64::new(-0.5625 * u.sin(), 0.4375 * u.cos()),
            2.0 * std::f64::consts::PI,
            true,
        )
        .unwrap();
        assert!(!check_symmetry(&shifted, 32));
    }

    #[test]
    fn preflight_flags_enclosed_pole() {
        let f = Integrand::new(|z: Complex64| (Complex64::new(1.0, 0.0) + z).inv())
            .real_on_interval(true)
            .with_singularities(vec![c64(-1.0, 0.0)]);
        // rho=10: leftmost point −2.025, pole at −1 is inside
        let p = FpProblem::new(1, f.clone(), ellipse_contour(10.0).unwrap()).unwrap();
        let rep = preflight(&p, 128).unwrap();
        assert!(!rep.ok());
        assert_eq!(rep.enclosed_singularities.len(), 1);
        // rho=2: leftmost point −0.5625, pole excluded
        let p = FpProblem::new(1, f, ellipse_contour(2.0).unwrap()).unwrap();
        assert!(preflight(&p, 128).unwrap().ok());
    }

    #[test]
    fn analytic_extension_agrees_on_real_axis() {
        let c = ellipse_contour(3.0).unwrap();
        for k in 0..16 {
            let u = c.period() * k as f64 / 16.0;
            let ext = c.phi_analytic(c64(u, 0.0)).unwrap();
            assert!((ext - c.phi(u)).norm() < 1e-14);
        }
    }
}
