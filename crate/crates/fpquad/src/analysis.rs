//! Error-model diagnostics: the theoretical bound for the trapezoidal rule on
//! a periodic analytic integrand, the strip-supremum constant it needs, and
//! least-squares fitting of empirical decay rates.

use num_complex::Complex;

use crate::error::{FpError, Result};
use crate::model::{Contour, Integrand};
use crate::Scalar;

/// Parameters of the exponential error bound.
///
/// `d` is the analyticity strip half-width of the parameterization, `d'` any
/// value in `(0, d)`, `u_p` the period, and `script_n` the kernel supremum on
/// the lines `|Im w| = d'`.
#[derive(Clone, Copy, Debug)]
pub struct BoundParams<T: Scalar> {
    pub d: T,
    pub d_prime: T,
    pub u_p: T,
    pub script_n: T,
}

impl<T: Scalar> BoundParams<T> {
    /// `d` defaults to `2·d'`: the bound holds for any `d' < d` and the
    /// choice affects only the constant, not the rate.
    pub fn with_default_d(d_prime: T, u_p: T, script_n: T) -> Self {
        Self {
            d: T::c(2.0) * d_prime,
            d_prime,
            u_p,
            script_n,
        }
    }
}

/// `(d/π)·𝒩·q/(1−q)` with `q = exp(−2π d' N / u_p)`.
pub fn theoretical_bound<T: Scalar>(bp: &BoundParams<T>, n_samples: usize) -> T {
    debug_assert!(bp.d_prime > T::zero() && bp.d_prime <= bp.d);
    let q = (-(T::c(2.0) * T::PI() * bp.d_prime * T::from_usize(n_samples).unwrap()) / bp.u_p)
        .exp();
    bp.d / T::PI() * bp.script_n * q / (T::one() - q)
}

/// Sampled maximum of `|φ(w)⁻ⁿ f(φ(w)) log(φ(w)/(1−φ(w)))|` over the two
/// lines `Im w = ±d'`, a lower estimate of the true supremum.
///
/// Errors when the sampled kernel is non-finite or a declared singularity of
/// `f` lies inside the image of the strip — both signal `d'` too large.
pub fn estimate_script_n<T: Scalar>(
    f: &Integrand<T>,
    n: u32,
    c: &Contour<T>,
    d_prime: T,
    grid: usize,
) -> Result<T> {
    if c.phi_analytic(Complex::new(T::zero(), T::zero())).is_none() {
        return Err(FpError::NoAnalyticExtension);
    }
    if !(d_prime > T::zero()) {
        return Err(FpError::InvalidParameter("d_prime must be positive".into()));
    }

    // A singularity of f in the strip image shows up as differing winding
    // numbers of the two boundary curves around it.
    for s in &f.singularities {
        let w_plus = boundary_winding(c, d_prime, *s, grid.max(64))?;
        let w_minus = boundary_winding(c, -d_prime, *s, grid.max(64))?;
        if w_plus != w_minus {
            return Err(FpError::AnalyticityViolated(format!(
                "singularity {s} lies inside the image of the strip |Im w| <= {d_prime}"
            )));
        }
    }

    // The cut [0,1] must stay outside the strip image as well. Level curves
    // deform continuously in v, so a cut point swept over at some interior
    // level flips the boundary winding around it away from +1 — this catches
    // collapses that a boundary-distance check can step over.
    for t in [0.0, 0.5, 1.0] {
        let point = Complex::new(T::c(t), T::zero());
        for v in [d_prime, -d_prime] {
            if boundary_winding(c, v, point, grid.max(64))? != 1 {
                return Err(FpError::AnalyticityViolated(format!(
                    "strip |Im w| <= {d_prime} sweeps across the cut point {t}"
                )));
            }
        }
    }

    let mut max = T::zero();
    let g = T::from_usize(grid).unwrap();
    for sign in [T::one(), -T::one()] {
        for j in 0..grid {
            let u = c.period() * (T::from_usize(j).unwrap() / g);
            let w = Complex::new(u, sign * d_prime);
            let z = c.phi_analytic(w).expect("checked above");
            let fz = f.eval(z);
            let kernel = z.powi(-(n as i32)) * fz * (z / (Complex::new(T::one(), T::zero()) - z)).ln();
            let mag = kernel.norm();
            if !mag.is_finite() {
                return Err(FpError::AnalyticityViolated(format!(
                    "non-finite kernel at w = {w} (z = {z})"
                )));
            }
            if mag > max {
                max = mag;
            }
        }
    }
    Ok(max)
}

/// Winding number of the curve `u ↦ φ(u + i·v)` around `point`, by numerical
/// differentiation along the sampled curve.
fn boundary_winding<T: Scalar>(
    c: &Contour<T>,
    v: T,
    point: Complex<T>,
    grid: usize,
) -> Result<i32> {
    let mut total = T::zero();
    let g = T::from_usize(grid).unwrap();
    let mut prev_arg: Option<T> = None;
    let mut first_arg = T::zero();
    for j in 0..=grid {
        let u = c.period() * (T::from_usize(j % grid).unwrap() / g);
        let w = Complex::new(u, v);
        let z = c.phi_analytic(w).ok_or(FpError::NoAnalyticExtension)? - point;
        if z.norm() < T::c(1e-12) {
            return Err(FpError::AnalyticityViolated(format!(
                "strip boundary passes through {point}"
            )));
        }
        let arg = z.arg();
        if let Some(p) = prev_arg {
            let mut delta = arg - p;
            let pi = T::PI();
            while delta > pi {
                delta = delta - T::c(2.0) * pi;
            }
            while delta < -pi {
                delta = delta + T::c(2.0) * pi;
            }
            total = total + delta;
        } else {
            first_arg = arg;
        }
        prev_arg = Some(arg);
    }
    let _ = first_arg;
    let turns = total / (T::c(2.0) * T::PI());
    Ok(turns.round().to_f64().unwrap_or(f64::NAN) as i32)
}

/// Largest `d'` (on a fixed sweep grid) for which the kernel stays analytic
/// and finite on the strip boundary and the strip image avoids `[0,1]`.
pub fn largest_safe_d_prime<T: Scalar>(
    f: &Integrand<T>,
    n: u32,
    c: &Contour<T>,
    grid: usize,
) -> Option<T> {
    let step = T::c(0.02);
    let mut best = None;
    let mut d = step;
    let limit = T::c(5.0);
    while d < limit {
        if strip_is_safe(f, n, c, d, grid) {
            best = Some(d);
        } else {
            break;
        }
        d = d + step;
    }
    best
}

fn strip_is_safe<T: Scalar>(f: &Integrand<T>, n: u32, c: &Contour<T>, d_prime: T, grid: usize) -> bool {
    // boundary curves must keep clear of the cut [0,1]
    let g = T::from_usize(grid).unwrap();
    for sign in [T::one(), -T::one()] {
        for j in 0..grid {
            let u = c.period() * (T::from_usize(j).unwrap() / g);
            let z = match c.phi_analytic(Complex::new(u, sign * d_prime)) {
                Some(z) => z,
                None => return false,
            };
            if crate::quadrature::dist_to_unit_segment(z) < T::c(1e-6) {
                return false;
            }
        }
    }
    estimate_script_n(f, n, c, d_prime, grid).is_ok()
}

/// Least-squares fit of `ln error = ln A + N·ln rate`.
#[derive(Clone, Copy, Debug)]
pub struct DecayFit<T: Scalar> {
    /// Per-step error contraction factor, `exp(slope)`.
    pub rate: T,
    pub log_prefactor: T,
    pub r_squared: T,
    pub points_used: usize,
}

/// Fits a line through `(N, ln error)` using only samples with `error >
/// floor`. Saturated (floor-level) points would bias the slope toward 1, so
/// callers pass a floor around `100·ε_machine` relative to the exact value.
pub fn fit_decay_rate<T: Scalar>(samples: &[(usize, T)], floor: T) -> Result<DecayFit<T>> {
    let usable: Vec<(T, T)> = samples
        .iter()
        .filter(|(_, e)| *e > floor && e.is_finite())
        .map(|(n, e)| (T::from_usize(*n).unwrap(), e.ln()))
        .collect();
    if usable.len() < 4 {
        return Err(FpError::InsufficientData {
            have: usable.len(),
            need: 4,
        });
    }
    let m = T::from_usize(usable.len()).unwrap();
    let sx = usable.iter().fold(T::zero(), |a, (x, _)| a + *x);
    let sy = usable.iter().fold(T::zero(), |a, (_, y)| a + *y);
    let xm = sx / m;
    let ym = sy / m;
    let sxx = usable
        .iter()
        .fold(T::zero(), |a, (x, _)| a + (*x - xm) * (*x - xm));
    let sxy = usable
        .iter()
        .fold(T::zero(), |a, (x, y)| a + (*x - xm) * (*y - ym));
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let ss_res = usable.iter().fold(T::zero(), |a, (x, y)| {
        let r = *y - (slope * *x + intercept);
        a + r * r
    });
    let ss_tot = usable
        .iter()
        .fold(T::zero(), |a, (_, y)| a + (*y - ym) * (*y - ym));
    let r_squared = if ss_tot > T::zero() {
        T::one() - ss_res / ss_tot
    } else {
        T::one()
    };
    Ok(DecayFit {
        rate: slope.exp(),
        log_prefactor: intercept,
        r_squared,
        points_used: usable.len(),
    })
}
