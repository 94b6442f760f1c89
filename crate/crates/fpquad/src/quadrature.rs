//! The trapezoidal loop-integral evaluators.
//!
//! The integrand of the loop integral, `g(u) = φ(u)⁻ⁿ f(φ(u))
//! log(φ(u)/(φ(u)−1)) φ'(u)`, is periodic and analytic in `u`, so the
//! equal-mesh trapezoidal rule applied over one period converges
//! geometrically in the node count. Three evaluators are provided:
//!
//! - [`fp_integral_full`]: the plain N-node rule,
//! - [`fp_integral_symmetric`]: conjugate-pair folding for real integrands on
//!   mirror-symmetric contours, N+1 evaluations for the accuracy of the
//!   2N-node full rule,
//! - [`fp_integral_adaptive`]: doubles N until successive values agree.
//!
//! The kernel is the principal logarithm of the single ratio `z/(z−1)`.
//! Computing `log z − log(z−1)` with principal branches puts cuts along
//! `(−∞,0]` and `(−∞,1]` instead of `[0,1]` and is wrong on any contour that
//! crosses the negative real axis, so it is never done here.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{FpError, Result};
use crate::model::{FpProblem, FpResult, Integrand};
use crate::Scalar;

/// How the N-term trapezoidal sum is accumulated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Summation {
    Sequential,
    /// Kahan compensated accumulation; robust when terms cancel (large n).
    #[default]
    Compensated,
}

#[derive(Clone, Copy, Debug)]
pub struct QuadratureConfig<T: Scalar> {
    /// Starting node count N.
    pub n_samples: usize,
    pub adaptive: bool,
    pub rel_tol: T,
    pub n_max: usize,
    pub summation: Summation,
}

impl<T: Scalar> Default for QuadratureConfig<T> {
    fn default() -> Self {
        Self {
            n_samples: 8,
            adaptive: true,
            rel_tol: T::c(1e-12),
            n_max: 4096,
            summation: Summation::Compensated,
        }
    }
}

impl<T: Scalar> QuadratureConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 4 {
            return Err(FpError::InvalidParameter("n_samples must be >= 4".into()));
        }
        if self.n_max < self.n_samples {
            return Err(FpError::InvalidParameter(
                "n_max must be >= n_samples".into(),
            ));
        }
        if !(self.rel_tol > T::zero() && self.rel_tol < T::one()) {
            return Err(FpError::InvalidParameter(
                "rel_tol must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

/// Distance from `z` to the segment `[0,1]` on the real axis.
#[inline]
pub(crate) fn dist_to_unit_segment<T: Scalar>(z: Complex<T>) -> T {
    let dx = (-z.re).max(z.re - T::one()).max(T::zero());
    dx.hypot(z.im)
}

/// Principal-branch logarithm of the ratio `z/(z−1)`.
///
/// The map `z ↦ z/(z−1)` sends `ℂ∖[0,1]` onto `ℂ∖(−∞,0]`, so the principal
/// log of the ratio is analytic off the segment and its only jump is across
/// `[0,1]` — exactly the cut the loop-integral representation needs.
pub fn principal_log_ratio<T: Scalar>(z: Complex<T>) -> Result<Complex<T>> {
    let dist = dist_to_unit_segment(z);
    if dist <= T::c(1e-14) {
        return Err(FpError::BranchCut {
            z: format!("{z}"),
            dist: dist.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok((z / (z - T::one())).ln())
}

/// `Σ_{k=0}^{n−2} derivs[k] / (k!·(n−1−k))`; zero when `n = 1`.
pub fn correction_sum<T: Scalar>(derivs: &[Complex<T>], n: u32) -> Result<Complex<T>> {
    let n = n as usize;
    if n == 1 {
        return Ok(Complex::zero());
    }
    if derivs.len() < n - 1 {
        return Err(FpError::MissingDerivatives {
            needed: n - 1,
            have: derivs.len(),
        });
    }
    let mut sum = Complex::<T>::zero();
    let mut k_fact = T::one();
    for (k, d) in derivs.iter().take(n - 1).enumerate() {
        if k > 0 {
            k_fact = k_fact * T::from_usize(k).unwrap();
        }
        let denom = k_fact * T::from_usize(n - 1 - k).unwrap();
        sum = sum + *d / denom;
    }
    Ok(sum)
}

/// Derivatives `[f(0), f'(0), …, f⁽ᵏᵐᵃˣ⁾(0)]` from one ring of samples, via
/// the Cauchy integral formula `f⁽ᵏ⁾(0) = k!/(2πi) ∮ f(z) z^{−k−1} dz`
/// evaluated by the trapezoidal rule on the circle `|z| = radius`.
pub fn derivatives_at_zero_cauchy<T: Scalar>(
    f: &Integrand<T>,
    k_max: usize,
    radius: T,
    n_nodes: usize,
) -> Result<Vec<Complex<T>>> {
    assert!(radius > T::zero(), "radius must be positive");
    assert!(
        n_nodes >= 2 * (k_max + 1),
        "need at least 2(k_max+1) ring nodes"
    );
    let two_pi = T::c(2.0) * T::PI();
    let m = T::from_usize(n_nodes).unwrap();
    let samples: Vec<Complex<T>> = (0..n_nodes)
        .map(|j| {
            let theta = two_pi * T::from_usize(j).unwrap() / m;
            let z = Complex::from_polar(radius, theta);
            f.eval(z)
        })
        .collect();
    for (j, v) in samples.iter().enumerate() {
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(FpError::Evaluation { node: j });
        }
    }
    let mut out = Vec::with_capacity(k_max + 1);
    let mut k_fact = T::one();
    for k in 0..=k_max {
        if k > 0 {
            k_fact = k_fact * T::from_usize(k).unwrap();
        }
        let mut acc = KahanComplex::new();
        for (j, v) in samples.iter().enumerate() {
            let theta = two_pi * T::from_usize((j * k) % n_nodes).unwrap() / m;
            // e^{−ikθ_j}
            acc.add(*v * Complex::from_polar(T::one(), -theta));
        }
        let coeff = acc.sum().unscale(m); // Taylor coefficient c_k·r^k
        out.push(coeff.scale(k_fact / radius.powi(k as i32)));
    }
    Ok(out)
}

/// Kahan compensated accumulator over complex values.
struct KahanComplex<T: Scalar> {
    sum: Complex<T>,
    comp: Complex<T>,
}

impl<T: Scalar> KahanComplex<T> {
    fn new() -> Self {
        Self {
            sum: Complex::zero(),
            comp: Complex::zero(),
        }
    }

    #[inline]
    fn add(&mut self, x: Complex<T>) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    fn sum(&self) -> Complex<T> {
        self.sum
    }
}

/// Derivatives of `f` at 0 up to order `count−1`, from metadata when present,
/// otherwise by the Cauchy-circle rule. The default ring radius is 0.25,
/// shrunk to half the distance to the nearest declared singularity.
pub fn resolve_derivs<T: Scalar>(f: &Integrand<T>, count: usize) -> Result<Vec<Complex<T>>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    if let Some(known) = &f.known_derivs_at_zero {
        if known.len() >= count {
            return Ok(known[..count].to_vec());
        }
    }
    let mut radius = T::c(0.25);
    for s in &f.singularities {
        let d = s.norm() * T::c(0.5);
        if d < radius {
            radius = d;
        }
    }
    if !(radius > T::zero()) {
        return Err(FpError::InvalidParameter(
            "integrand has a declared singularity at 0; cannot take derivatives there".into(),
        ));
    }
    let n_nodes = 64.max(8 * count);
    derivatives_at_zero_cauchy(f, count - 1, radius, n_nodes)
}

/// One term of the trapezoidal sum: `φ(u)⁻ⁿ f(φ(u)) log(φ(u)/(φ(u)−1)) φ'(u)`.
fn node_term<T: Scalar>(p: &FpProblem<T>, u: T, node: usize) -> Result<Complex<T>> {
    let z = p.contour.phi(u);
    let log_ratio = principal_log_ratio(z)?;
    let fz = p.f.eval(z);
    if !fz.re.is_finite() || !fz.im.is_finite() {
        return Err(FpError::Evaluation { node });
    }
    let z_pow = z.powi(-(p.n as i32));
    let term = z_pow * fz * log_ratio * p.contour.dphi(u);
    if !term.re.is_finite() || !term.im.is_finite() {
        return Err(FpError::Evaluation { node });
    }
    Ok(term)
}

fn sum_terms<T: Scalar>(terms: &[Complex<T>], summation: Summation) -> Complex<T> {
    match summation {
        Summation::Sequential => terms.iter().fold(Complex::zero(), |a, &t| a + t),
        Summation::Compensated => {
            let mut acc = KahanComplex::new();
            for &t in terms {
                acc.add(t);
            }
            acc.sum()
        }
    }
}

/// Raw complex value of the N-node full rule, before the real-result policy.
fn full_raw<T: Scalar>(
    p: &FpProblem<T>,
    terms: &[Complex<T>],
    derivs: &[Complex<T>],
    summation: Summation,
) -> Result<Complex<T>> {
    let n_nodes = T::from_usize(terms.len()).unwrap();
    let h = p.contour.period() / n_nodes;
    let two_pi = T::c(2.0) * T::PI();
    let s = sum_terms(terms, summation);
    // (h/2πi)·s = (h/2π)·(s/i) = (h/2π)·(im − i·re)
    let loop_part = Complex::new(s.im, -s.re).scale(h / two_pi);
    let corr = correction_sum(derivs, p.n)?;
    Ok(loop_part - corr)
}

fn node_terms<T: Scalar>(p: &FpProblem<T>, n: usize) -> Result<Vec<Complex<T>>> {
    let period = p.contour.period();
    let n_t = T::from_usize(n).unwrap();
    (0..n)
        .map(|k| {
            let u = period * (T::from_usize(k).unwrap() / n_t);
            node_term(p, u, k)
        })
        .collect()
}

fn apply_real_policy<T: Scalar>(p: &FpProblem<T>, raw: Complex<T>) -> (Complex<T>, T) {
    if p.f.real_on_interval {
        (Complex::new(raw.re, T::zero()), raw.im.abs())
    } else {
        (raw, T::zero())
    }
}

/// The N-node trapezoidal approximation of the loop integral, minus the
/// correction sum. Performs exactly N integrand evaluations.
pub fn fp_integral_full<T: Scalar>(p: &FpProblem<T>, n_samples: usize) -> Result<FpResult<T>> {
    fp_integral_full_with(p, n_samples, Summation::Compensated)
}

pub fn fp_integral_full_with<T: Scalar>(
    p: &FpProblem<T>,
    n_samples: usize,
    summation: Summation,
) -> Result<FpResult<T>> {
    if n_samples < 4 {
        return Err(FpError::InvalidParameter("full rule needs N >= 4".into()));
    }
    let derivs = resolve_derivs(&p.f, p.n.saturating_sub(1) as usize)?;
    let terms = node_terms(p, n_samples)?;
    let raw = full_raw(p, &terms, &derivs, summation)?;
    let (value, imag_residual) = apply_real_policy(p, raw);
    Ok(FpResult {
        value,
        n_samples,
        err_estimate: None,
        imag_residual,
    })
}

/// Symmetry-reduced rule: for `f` real on `[0,1]` and a contour symmetric
/// about the real axis, the 2N-node full rule folds into N+1 evaluations on
/// the upper half parameter range.
///
/// With `g` the trapezoidal term, the reflection principle gives
/// `g(u_p − u) = −conj(g(u))`, so conjugate pairs contribute `2i·Im g` and the
/// two real-axis endpoint terms are purely imaginary. By construction this
/// equals `Re(fp_integral_full(p, 2N))` up to roundoff — that identity, not
/// the folded display, is the normative definition here.
pub fn fp_integral_symmetric<T: Scalar>(p: &FpProblem<T>, n_half: usize) -> Result<FpResult<T>> {
    fp_integral_symmetric_with(p, n_half, Summation::Compensated)
}

pub fn fp_integral_symmetric_with<T: Scalar>(
    p: &FpProblem<T>,
    n_half: usize,
    summation: Summation,
) -> Result<FpResult<T>> {
    if !p.f.real_on_interval || !p.contour.is_symmetric() {
        return Err(FpError::SymmetryRequirement);
    }
    if n_half < 2 {
        return Err(FpError::InvalidParameter(
            "symmetric rule needs N >= 2".into(),
        ));
    }
    let derivs = resolve_derivs(&p.f, p.n.saturating_sub(1) as usize)?;
    let period = p.contour.period();
    let two_n = T::from_usize(2 * n_half).unwrap();
    let h = period / two_n;
    let two_pi = T::c(2.0) * T::PI();

    // N+1 distinct nodes: u = 0, h, …, u_p/2
    let mut imags = Vec::with_capacity(n_half + 1);
    for k in 0..=n_half {
        let u = period * (T::from_usize(k).unwrap() / two_n);
        imags.push(node_term(p, u, k)?.im);
    }
    let endpoint = imags[0] + imags[n_half];
    let interior = match summation {
        Summation::Sequential => imags[1..n_half].iter().fold(T::zero(), |a, &t| a + t),
        Summation::Compensated => {
            let mut acc = KahanComplex::new();
            for &t in &imags[1..n_half] {
                acc.add(Complex::new(t, T::zero()));
            }
            acc.sum().re
        }
    };
    let corr = correction_sum(&derivs, p.n)?;
    let value = h / two_pi * endpoint + h / T::PI() * interior - corr.re;
    Ok(FpResult {
        value: Complex::new(value, T::zero()),
        n_samples: n_half + 1,
        err_estimate: None,
        imag_residual: corr.im.abs(),
    })
}

/// Doubles N until `|I_{2N} − I_N| ≤ rel_tol·max(1,|I_{2N}|)` or the node
/// budget runs out. Already-computed node terms are reused on the doubled
/// grid (even-index nodes coincide exactly).
pub fn fp_integral_adaptive<T: Scalar>(
    p: &FpProblem<T>,
    cfg: &QuadratureConfig<T>,
) -> Result<FpResult<T>> {
    cfg.validate()?;
    let derivs = resolve_derivs(&p.f, p.n.saturating_sub(1) as usize)?;
    let period = p.contour.period();

    let mut n = cfg.n_samples;
    let mut terms = node_terms(p, n)?;
    let mut prev = full_raw(p, &terms, &derivs, cfg.summation)?;
    let mut last_diff = T::infinity();

    while 2 * n <= cfg.n_max {
        let n2 = 2 * n;
        let n2_t = T::from_usize(n2).unwrap();
        let mut doubled = Vec::with_capacity(n2);
        for k in 0..n2 {
            if k % 2 == 0 {
                doubled.push(terms[k / 2]);
            } else {
                let u = period * (T::from_usize(k).unwrap() / n2_t);
                doubled.push(node_term(p, u, k)?);
            }
        }
        let cur = full_raw(p, &doubled, &derivs, cfg.summation)?;
        let diff = (cur - prev).norm();
        let scale = T::one().max(cur.norm());
        terms = doubled;
        n = n2;
        if diff <= cfg.rel_tol * scale {
            let (value, imag_residual) = apply_real_policy(p, cur);
            return Ok(FpResult {
                value,
                n_samples: n,
                err_estimate: Some(diff),
                imag_residual,
            });
        }
        prev = cur;
        last_diff = diff;
    }
    Err(FpError::NonConvergence {
        n_samples: n,
        estimate: prev.re.to_f64().unwrap_or(f64::NAN),
        err_bound: last_diff.to_f64().unwrap_or(f64::NAN),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ellipse_contour;
    use crate::{Complex64, Integrand64};

    fn exp_integrand() -> Integrand64 {
        Integrand64::new(|z: Complex64| z.exp()).real_on_interval(true)
    }

    fn recip_integrand() -> Integrand64 {
        Integrand64::new(|z: Complex64| (Complex64::new(1.0, 0.0) + z).inv())
            .real_on_interval(true)
            .with_singularities(vec![Complex64::new(-1.0, 0.0)])
    }

    fn one_integrand() -> Integrand64 {
        Integrand64::new(|_| Complex64::new(1.0, 0.0)).real_on_interval(true)
    }

    fn problem(n: u32, f: Integrand64, rho: f64) -> FpProblem<f64> {
        FpProblem::new(n, f, ellipse_contour(rho).unwrap()).unwrap()
    }

    #[test]
    fn log_ratio_values() {
        // z = 2 → ln 2
        let v = principal_log_ratio(Complex64::new(2.0, 0.0)).unwrap();
        assert!((v - Complex64::new(std::f64::consts::LN_2, 0.0)).norm() < 1e-15);
        // z = 0.5+0.5i → ratio −i → −iπ/2
        let v = principal_log_ratio(Complex64::new(0.5, 0.5)).unwrap();
        assert!((v - Complex64::new(0.0, -std::f64::consts::FRAC_PI_2)).norm() < 1e-15);
        // z = −1 → ratio 1/2 → −ln 2
        let v = principal_log_ratio(Complex64::new(-1.0, 0.0)).unwrap();
        assert!((v - Complex64::new(-std::f64::consts::LN_2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn log_ratio_rejects_cut() {
        assert!(principal_log_ratio(Complex64::new(0.5, 0.0)).is_err());
        assert!(principal_log_ratio(Complex64::new(0.5, 1e-15)).is_err());
        assert!(principal_log_ratio(Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn log_ratio_continuous_on_contour() {
        // a branch error would show up as a ≈2π jump between adjacent nodes
        let c = ellipse_contour(2.0).unwrap();
        let n = 256;
        let mut prev: Option<Complex64> = None;
        let mut max_jump: f64 = 0.0;
        for k in 0..=n {
            let u = c.period() * k as f64 / n as f64;
            let v = principal_log_ratio(c.phi(u)).unwrap();
            if let Some(p) = prev {
                max_jump = max_jump.max((v - p).norm());
            }
            prev = Some(v);
        }
        assert!(max_jump < 0.2, "max jump {max_jump}");
    }

    #[test]
    fn correction_sum_cases() {
        let one = Complex64::new(1.0, 0.0);
        // n = 1: empty sum regardless of derivs
        assert_eq!(
            correction_sum::<f64>(&[], 1).unwrap(),
            Complex64::new(0.0, 0.0)
        );
        // n = 2, f = exp
        let v = correction_sum(&[one], 2).unwrap();
        assert!((v - one).norm() < 1e-15);
        // n = 3, f = exp: 1/2 + 1 = 1.5
        let v = correction_sum(&[one, one], 3).unwrap();
        assert!((v - Complex64::new(1.5, 0.0)).norm() < 1e-15);
        // short derivs
        assert!(matches!(
            correction_sum(&[one], 3),
            Err(FpError::MissingDerivatives { needed: 2, have: 1 })
        ));
    }

    #[test]
    fn cauchy_derivatives_exp() {
        let d = derivatives_at_zero_cauchy(&exp_integrand(), 3, 0.5, 64).unwrap();
        for (k, v) in d.iter().enumerate() {
            assert!(
                (v - Complex64::new(1.0, 0.0)).norm() < 1e-12,
                "k={k}, got {v}"
            );
        }
    }

    #[test]
    fn cauchy_derivatives_reciprocal() {
        // f(z) = 1/(1+z): f^(k)(0) = (−1)^k k!
        let d = derivatives_at_zero_cauchy(&recip_integrand(), 2, 0.5, 64).unwrap();
        let expect = [1.0, -1.0, 2.0];
        for (k, v) in d.iter().enumerate() {
            assert!(
                (v - Complex64::new(expect[k], 0.0)).norm() < 1e-10,
                "k={k}, got {v}"
            );
        }
    }

    #[test]
    fn cauchy_derivatives_constant() {
        let f = Integrand64::new(|_| Complex64::new(7.0, 0.0));
        let d = derivatives_at_zero_cauchy(&f, 4, 0.25, 64).unwrap();
        assert!((d[0] - Complex64::new(7.0, 0.0)).norm() < 1e-13);
        for v in &d[1..] {
            assert!(v.norm() < 1e-11, "got {v}");
        }
    }

    #[test]
    fn full_rule_known_values() {
        // n=1, f ≡ 1 → 0
        let p = problem(1, one_integrand(), 2.0);
        let r = fp_integral_full(&p, 64).unwrap();
        assert!(r.real().abs() < 1e-12, "got {}", r.real());
        assert_eq!(r.n_samples, 64);

        // n=2, f ≡ 1 → −1
        let p = problem(2, one_integrand().with_real_derivs_at_zero(&[1.0]), 2.0);
        let r = fp_integral_full(&p, 64).unwrap();
        assert!((r.real() + 1.0).abs() < 1e-10, "got {}", r.real());

        // n=1, f = exp, ρ=10
        let p = problem(1, exp_integrand(), 10.0);
        let r = fp_integral_full(&p, 32).unwrap();
        assert!(
            (r.real() - 1.3179021514544038).abs() < 1e-10,
            "got {}",
            r.real()
        );

        // n=2, f = exp, ρ=10
        let p = problem(2, exp_integrand().with_real_derivs_at_zero(&[1.0]), 10.0);
        let r = fp_integral_full(&p, 32).unwrap();
        assert!(
            (r.real() + 0.4003796770046413).abs() < 1e-6,
            "got {}",
            r.real()
        );

        // n=1, f = 1/(1+x), ρ=2 → −ln 2
        let p = problem(1, recip_integrand(), 2.0);
        let r = fp_integral_full(&p, 64).unwrap();
        assert!(
            (r.real() + std::f64::consts::LN_2).abs() < 1e-10,
            "got {}",
            r.real()
        );
    }

    #[test]
    fn conjugate_symmetry_residual() {
        let p = problem(1, exp_integrand(), 10.0);
        let r = fp_integral_full(&p, 64).unwrap();
        assert!(r.imag_residual <= 1e-10 * r.real().abs().max(1.0));
    }

    #[test]
    fn symmetric_rule_matches_full() {
        let p = problem(1, exp_integrand(), 10.0);
        let s = fp_integral_symmetric(&p, 16).unwrap();
        let f = fp_integral_full(&p, 32).unwrap();
        let rel = (s.real() - f.real()).abs() / f.real().abs().max(1.0);
        assert!(rel <= 1e-13, "rel {rel}");
        assert_eq!(s.n_samples, 17);
    }

    #[test]
    fn symmetric_rule_known_values() {
        let p = problem(1, one_integrand(), 2.0);
        let r = fp_integral_symmetric(&p, 32).unwrap();
        assert!(r.real().abs() < 1e-12);

        // n=3, f = 1/(1+x), ρ=2 → −(ln2 − 1 + 1/2)
        let p = problem(
            3,
            recip_integrand().with_real_derivs_at_zero(&[1.0, -1.0, 2.0]),
            2.0,
        );
        let r = fp_integral_symmetric(&p, 64).unwrap();
        let exact = -(std::f64::consts::LN_2 - 0.5);
        assert!((r.real() - exact).abs() < 1e-9, "got {}", r.real());
    }

    #[test]
    fn symmetric_rule_rejects_asymmetric_input() {
        let f = Integrand64::new(|z: Complex64| z.exp()); // real_on_interval not set
        let p = problem(1, f, 2.0);
        assert!(matches!(
            fp_integral_symmetric(&p, 16),
            Err(FpError::SymmetryRequirement)
        ));
    }

    #[test]
    fn adaptive_converges() {
        let p = problem(1, exp_integrand(), 10.0);
        let cfg = QuadratureConfig {
            rel_tol: 1e-10,
            ..Default::default()
        };
        let r = fp_integral_adaptive(&p, &cfg).unwrap();
        assert!(r.n_samples <= 64, "N = {}", r.n_samples);
        assert!((r.real() - 1.3179021514544038).abs() < 1e-9);
        assert!(r.err_estimate.is_some());

        let p = problem(1, recip_integrand(), 2.0);
        let cfg = QuadratureConfig {
            rel_tol: 1e-8,
            ..Default::default()
        };
        let r = fp_integral_adaptive(&p, &cfg).unwrap();
        assert!(r.n_samples <= 128, "N = {}", r.n_samples);
        assert!((r.real() + std::f64::consts::LN_2).abs() < 1e-7);
    }

    #[test]
    fn adaptive_reports_non_convergence() {
        let p = problem(1, exp_integrand(), 10.0);
        let cfg = QuadratureConfig {
            n_samples: 4,
            n_max: 8,
            rel_tol: 1e-14,
            ..Default::default()
        };
        assert!(matches!(
            fp_integral_adaptive(&p, &cfg),
            Err(FpError::NonConvergence { .. })
        ));
    }

    #[test]
    fn pole_inside_contour_gives_wrong_value() {
        // representation hypothesis violated by construction: 1/(1+z) with ρ=10
        // encloses the pole at −1. The rule converges to something — just not
        // the finite-part integral. Preflight exists to reject this input.
        let p = problem(1, recip_integrand(), 10.0);
        let r = fp_integral_full(&p, 256).unwrap();
        assert!((r.real() + std::f64::consts::LN_2).abs() > 1e-3);
        let rep = crate::model::preflight(&p, 128).unwrap();
        assert!(!rep.ok());
    }
}
