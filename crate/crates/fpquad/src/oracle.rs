//! Independent reference evaluators.
//!
//! [`fp_limit_oracle`] computes the finite part straight from its defining
//! ε-limit: integrate `x⁻ⁿ f(x)` over `[ε,1]` with conventional quadrature,
//! subtract the singular terms, add the log term, and extrapolate ε → 0. It
//! never touches the loop-integral representation, so agreement between the
//! two routes validates the sign and index conventions of both.
//!
//! The oracle certifies ~6–8 digits; the contour method is the precision
//! instrument.

use num_complex::Complex;

use crate::error::{FpError, Result};
use crate::model::Integrand;
use crate::quadrature::resolve_derivs;
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Extrapolation {
    /// Take `F(ε_last)` as is.
    LastValue,
    /// Iterated linear Richardson (Neville tableau evaluated at ε = 0).
    #[default]
    RichardsonLinear,
}

#[derive(Clone, Debug)]
pub struct OracleConfig<T: Scalar> {
    /// Strictly decreasing ε values in (0, 0.5).
    pub eps_sequence: Vec<T>,
    pub inner_tol: T,
    pub extrapolation: Extrapolation,
}

impl<T: Scalar> Default for OracleConfig<T> {
    fn default() -> Self {
        Self {
            eps_sequence: (0..=10).map(|j| T::c(1e-3) * T::c(0.5).powi(j)).collect(),
            inner_tol: T::c(1e-13),
            extrapolation: Extrapolation::RichardsonLinear,
        }
    }
}

impl<T: Scalar> OracleConfig<T> {
    /// Sequence tuned for singularity order `n`.
    ///
    /// `F(ε)` is evaluated as a difference of quantities of size `ε^{1−n}`,
    /// so its floating-point noise floor is about `ε^{1−n}·ulp`. Larger `n`
    /// therefore needs larger ε values (and pays with fewer usable
    /// extrapolation levels).
    pub fn for_order(n: u32) -> Self {
        let levels = match n {
            0..=3 => 8,
            4 => 7,
            _ => 6,
        };
        Self {
            eps_sequence: (0..levels).map(|j| T::c(0.45) * T::c(0.5).powi(j)).collect(),
            inner_tol: T::c(1e-15),
            extrapolation: Extrapolation::RichardsonLinear,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps_sequence.is_empty() {
            return Err(FpError::InvalidParameter("empty eps sequence".into()));
        }
        let half = T::c(0.5);
        for w in self.eps_sequence.windows(2) {
            if !(w[1] < w[0]) {
                return Err(FpError::InvalidParameter(
                    "eps sequence must be strictly decreasing".into(),
                ));
            }
        }
        for &e in &self.eps_sequence {
            if !(e > T::zero() && e < half) {
                return Err(FpError::InvalidParameter(
                    "eps values must lie in (0, 0.5)".into(),
                ));
            }
        }
        if !(self.inner_tol > T::zero()) {
            return Err(FpError::InvalidParameter(
                "inner_tol must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Extrapolated oracle value plus its convergence diagnostics.
#[derive(Clone, Debug)]
pub struct OracleEstimate<T: Scalar> {
    pub value: T,
    /// `|F(ε_last) − F(ε_prev)|` of the raw sequence.
    pub last_diff: T,
    /// The raw `F(ε_j)` values, for inspection.
    pub f_values: Vec<T>,
}

const GAUSS_ORDER: usize = 15;
const MAX_DEPTH: usize = 48;

/// Gauss–Legendre nodes and weights on [−1, 1], by Newton iteration on the
/// Legendre polynomial.
fn gauss_legendre_rule<T: Scalar>(order: usize) -> Vec<(T, T)> {
    let mut rule = Vec::with_capacity(order);
    let n_t = T::from_usize(order).unwrap();
    for i in 1..=order {
        // Chebyshev-like initial guess
        let guess = (T::PI() * (T::from_usize(i).unwrap() - T::c(0.25))
            / (n_t + T::c(0.5)))
        .cos();
        let mut x = guess;
        let mut dp = T::one();
        for _ in 0..100 {
            // evaluate P_n and P_n' by the three-term recurrence
            let mut p0 = T::one();
            let mut p1 = x;
            for k in 2..=order {
                let k_t = T::from_usize(k).unwrap();
                let p2 = ((T::c(2.0) * k_t - T::one()) * x * p1 - (k_t - T::one()) * p0) / k_t;
                p0 = p1;
                p1 = p2;
            }
            dp = n_t * (x * p1 - p0) / (x * x - T::one());
            let dx = p1 / dp;
            x = x - dx;
            if dx.abs() <= T::epsilon() * T::c(2.0) {
                break;
            }
        }
        let w = T::c(2.0) / ((T::one() - x * x) * dp * dp);
        rule.push((x, w));
    }
    rule
}

fn gauss_panel<T: Scalar>(f: &dyn Fn(T) -> T, a: T, b: T, rule: &[(T, T)]) -> T {
    let mid = (a + b) * T::c(0.5);
    let rad = (b - a) * T::c(0.5);
    let mut s = T::zero();
    for &(x, w) in rule {
        s = s + w * f(mid + rad * x);
    }
    s * rad
}

fn adapt<T: Scalar>(
    f: &dyn Fn(T) -> T,
    a: T,
    b: T,
    tol: T,
    whole: T,
    rule: &[(T, T)],
    depth: usize,
) -> Result<T> {
    let mid = (a + b) * T::c(0.5);
    let left = gauss_panel(f, a, mid, rule);
    let right = gauss_panel(f, mid, b, rule);
    let two = left + right;
    // per-panel relative acceptance: total error <= tol * ∫|f|
    if (two - whole).abs() <= tol * two.abs().max(T::min_positive_value()) {
        return Ok(two);
    }
    if depth >= MAX_DEPTH {
        return Err(FpError::InnerQuadrature);
    }
    Ok(adapt(f, a, mid, tol, left, rule, depth + 1)?
        + adapt(f, mid, b, tol, right, rule, depth + 1)?)
}

/// Adaptive Gauss–Legendre quadrature of a smooth real function on `[a,b]`,
/// with estimated error ≤ `tol·max(1,|result|)`.
pub fn gauss_quad<T: Scalar>(f: impl Fn(T) -> T, a: T, b: T, tol: T) -> Result<T> {
    assert!(a < b, "gauss_quad needs a < b");
    assert!(tol > T::zero(), "gauss_quad needs tol > 0");
    let rule = gauss_legendre_rule::<T>(GAUSS_ORDER);
    let whole = gauss_panel(&f, a, b, &rule);
    adapt(&f, a, b, tol, whole, &rule, 0)
}

/// `F(ε)` of the finite-part definition:
/// `∫_ε^1 x⁻ⁿ f dx − Σ_{k=0}^{n−2} ε^{k+1−n} f⁽ᵏ⁾(0)/(k!(n−1−k))
///  + (log ε/(n−1)!) f⁽ⁿ⁻¹⁾(0)`.
fn f_of_eps<T: Scalar>(
    f: &Integrand<T>,
    n: u32,
    derivs: &[T],
    eps: T,
    inner_tol: T,
) -> Result<T> {
    let n_i = n as i32;
    let integral = gauss_quad(
        |x: T| x.powi(-n_i) * f.eval(Complex::new(x, T::zero())).re,
        eps,
        T::one(),
        inner_tol,
    )?;
    let mut sing = T::zero();
    let mut k_fact = T::one();
    for (k, &dk) in derivs
        .iter()
        .enumerate()
        .take((n as usize).saturating_sub(1))
    {
        if k > 0 {
            k_fact = k_fact * T::from_usize(k).unwrap();
        }
        let power = eps.powi(k as i32 + 1 - n_i);
        sing = sing + power * dk / (k_fact * T::from_usize(n as usize - 1 - k).unwrap());
    }
    let mut nm1_fact = T::one();
    for k in 2..n as usize {
        nm1_fact = nm1_fact * T::from_usize(k).unwrap();
    }
    let log_term = eps.ln() / nm1_fact * derivs[n as usize - 1];
    Ok(integral - sing + log_term)
}

/// Neville tableau of the polynomial through `(ε_j, F_j)`, evaluated at 0.
/// Returns the deepest entry and the magnitude of the last correction.
fn neville_at_zero<T: Scalar>(eps: &[T], f_vals: &[T]) -> (T, T) {
    let n = f_vals.len();
    let mut col = f_vals.to_vec();
    let mut last_corr = T::zero();
    for k in 1..n {
        let mut next = Vec::with_capacity(n - k);
        for i in 0..(n - k) {
            // interpolant through eps[i..=i+k], evaluated at eps = 0
            let num = eps[i] * col[i + 1] - eps[i + k] * col[i];
            next.push(num / (eps[i] - eps[i + k]));
        }
        last_corr = (next[next.len() - 1] - col[col.len() - 1]).abs();
        col = next;
    }
    (col[0], last_corr)
}

/// Definition-based reference value of `fp∫₀¹ x⁻ⁿ f(x) dx`.
///
/// Needs `f` real-analytic on `[0,1]` with derivatives at 0 up to order
/// `n−1` (exact or via the Cauchy circle).
pub fn fp_limit_oracle<T: Scalar>(
    f: &Integrand<T>,
    n: u32,
    cfg: &OracleConfig<T>,
) -> Result<OracleEstimate<T>> {
    cfg.validate()?;
    if n < 1 {
        return Err(FpError::InvalidParameter("n must be >= 1".into()));
    }
    let derivs: Vec<T> = resolve_derivs(f, n as usize)?
        .into_iter()
        .map(|c| c.re)
        .collect();

    let mut f_vals = Vec::with_capacity(cfg.eps_sequence.len());
    for &eps in &cfg.eps_sequence {
        f_vals.push(f_of_eps(f, n, &derivs, eps, cfg.inner_tol)?);
    }

    let m = f_vals.len();
    let last_diff = if m >= 2 {
        (f_vals[m - 1] - f_vals[m - 2]).abs()
    } else {
        T::zero()
    };

    // Stability screen: the tail of the sequence must not be dominated by
    // noise. A diverging final difference relative to the best interior
    // difference signals ε values small enough that cancellation noise of
    // size ~ε^{1−n}·ulp swamps the limit.
    if m >= 4 {
        let diffs: Vec<T> = f_vals.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        let min_diff = diffs
            .iter()
            .cloned()
            .fold(T::infinity(), |a, b| if b > T::zero() { a.min(b) } else { a });
        let scale = T::one().max(f_vals[m - 1].abs());
        if min_diff.is_finite()
            && last_diff > T::c(1e-4) * scale
            && last_diff > T::c(100.0) * min_diff
        {
            return Err(FpError::OracleUnstable(
                f_vals.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect(),
            ));
        }
    }

    let value = match cfg.extrapolation {
        Extrapolation::LastValue => f_vals[m - 1],
        Extrapolation::RichardsonLinear => neville_at_zero(&cfg.eps_sequence, &f_vals).0,
    };
    Ok(OracleEstimate {
        value,
        last_diff,
        f_values: f_vals,
    })
}

/// Closed form of `fp∫₀¹ x⁻ⁿ eˣ dx = Σ_{k≥0, k≠n−1} 1/(k!(k−n+1))`,
/// truncated after `n_terms` terms. The factorial tail puts the truncation
/// error below 1e−15 for `n_terms ≥ 30`.
pub fn exact_exp_series<T: Scalar>(n: u32, n_terms: usize) -> T {
    assert!(n_terms >= n as usize + 20, "too few terms for order {n}");
    let mut sum = T::zero();
    let mut inv_fact = T::one();
    for k in 0..n_terms {
        if k > 0 {
            inv_fact = inv_fact / T::from_usize(k).unwrap();
        }
        if k + 1 != n as usize {
            let denom = T::from_isize(k as isize - n as isize + 1).unwrap();
            sum = sum + inv_fact / denom;
        }
    }
    sum
}

/// Closed form of `fp∫₀¹ x⁻ⁿ/(1+x) dx = (−1)ⁿ {log 2 + Σ_{l=1}^{n−1} (−1)ˡ/l}`.
pub fn exact_reciprocal<T: Scalar>(n: u32) -> T {
    assert!(n >= 1);
    let mut sum = T::LN_2();
    for l in 1..n as usize {
        let term = T::from_usize(l).unwrap().recip();
        if l % 2 == 1 {
            sum = sum - term;
        } else {
            sum = sum + term;
        }
    }
    if n % 2 == 1 {
        -sum
    } else {
        sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Complex64, Integrand64};

    #[test]
    fn gauss_quad_polynomial() {
        let v = gauss_quad(|x: f64| x * x, 0.0, 1.0, 1e-13).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn gauss_quad_exponential() {
        let v = gauss_quad(|x: f64| x.exp(), 0.0, 1.0, 1e-13).unwrap();
        assert!((v - (std::f64::consts::E - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn gauss_quad_near_singular() {
        let v = gauss_quad(|x: f64| 1.0 / x, 1e-3, 1.0, 1e-13).unwrap();
        assert!((v - 1000.0_f64.ln()).abs() < 1e-11, "got {v}");
    }

    fn exp_integrand() -> Integrand64 {
        Integrand64::new(|z: Complex64| z.exp()).real_on_interval(true)
    }

    fn one_integrand() -> Integrand64 {
        Integrand64::new(|_| Complex64::new(1.0, 0.0))
            .real_on_interval(true)
            .with_real_derivs_at_zero(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0])
    }

    #[test]
    fn oracle_trivial_n1() {
        // ∫_ε^1 dx/x + log ε = 0 exactly for every ε
        let est = fp_limit_oracle(&one_integrand(), 1, &OracleConfig::default()).unwrap();
        assert!(est.value.abs() < 1e-8, "got {}", est.value);
    }

    #[test]
    fn oracle_constant_n2_is_exactly_flat() {
        // F(ε) = (1/ε − 1) − 1/ε = −1: both singular terms cancel exactly
        let est = fp_limit_oracle(&one_integrand(), 2, &OracleConfig::default()).unwrap();
        assert!((est.value + 1.0).abs() < 1e-8);
        // the subtraction cancels exactly in exact arithmetic; what is left
        // is the inner quadrature's relative error against a 1/ε-sized integral
        for v in &est.f_values {
            assert!((v + 1.0).abs() < 1e-9, "F(eps) = {v}");
        }
    }

    #[test]
    fn oracle_exp_n2() {
        let est = fp_limit_oracle(&exp_integrand(), 2, &OracleConfig::for_order(2)).unwrap();
        assert!(
            (est.value + 0.4003796770046413).abs() < 1e-6,
            "got {}",
            est.value
        );
    }

    #[test]
    fn exp_series_values() {
        let v: f64 = exact_exp_series(1, 30);
        assert!((v - 1.3179021514544038).abs() < 1e-15);
        let v: f64 = exact_exp_series(2, 30);
        assert!((v + 0.4003796770046413).abs() < 1e-14);
        // tail bound: 30 vs 60 terms
        for n in 1..=5 {
            let a: f64 = exact_exp_series(n, 30);
            let b: f64 = exact_exp_series(n, 60);
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn reciprocal_closed_form() {
        let ln2 = std::f64::consts::LN_2;
        assert!((exact_reciprocal::<f64>(1) + ln2).abs() < 1e-15);
        assert!((exact_reciprocal::<f64>(2) - (ln2 - 1.0)).abs() < 1e-15);
        assert!((exact_reciprocal::<f64>(3) + (ln2 - 0.5)).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        let mut cfg = OracleConfig::<f64> {
            eps_sequence: vec![0.6],
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        cfg.eps_sequence = vec![0.1, 0.1];
        assert!(cfg.validate().is_err());
        cfg.eps_sequence = vec![0.1, 0.2];
        assert!(cfg.validate().is_err());
    }
}
