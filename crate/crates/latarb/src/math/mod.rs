//! Numeric kernels: normal distribution functions, adaptive Simpson
//! quadrature, and one-dimensional search.

pub mod erf;

use crate::scalar::Real;

/// Standard normal CDF, evaluated through `erfc` so both tails keep full
/// relative precision.
#[inline]
pub fn normal_cdf<F: Real>(z: F) -> F {
    let half = F::c(0.5);
    let inv_sqrt2 = F::c(std::f64::consts::FRAC_1_SQRT_2);
    half * (-z * inv_sqrt2).erfc()
}

/// Standard normal density.
#[inline]
pub fn normal_pdf<F: Real>(z: F) -> F {
    let inv_sqrt_2pi = F::c(0.3989422804014327);
    inv_sqrt_2pi * (-z * z * F::c(0.5)).exp()
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` with absolute tolerance
/// `tol` and recursion limited to `max_depth` levels.
pub fn adaptive_simpson<F: Real>(f: &dyn Fn(F) -> F, a: F, b: F, tol: F, max_depth: u32) -> F {
    let c = (a + b) * F::c(0.5);
    let fa = f(a);
    let fb = f(b);
    let fc = f(c);
    let whole = simpson_slice(a, b, fa, fc, fb);
    simpson_recurse(f, a, b, fa, fb, fc, whole, tol, max_depth)
}

#[inline]
fn simpson_slice<F: Real>(a: F, b: F, fa: F, fm: F, fb: F) -> F {
    (b - a) / F::c(6.0) * (fa + F::c(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_recurse<F: Real>(
    f: &dyn Fn(F) -> F,
    a: F,
    b: F,
    fa: F,
    fb: F,
    fc: F,
    whole: F,
    tol: F,
    depth: u32,
) -> F {
    let c = (a + b) * F::c(0.5);
    let lm = (a + c) * F::c(0.5);
    let rm = (c + b) * F::c(0.5);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson_slice(a, c, fa, flm, fc);
    let right = simpson_slice(c, b, fc, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= F::c(15.0) * tol {
        // Richardson extrapolation of the two half-interval estimates.
        return left + right + delta / F::c(15.0);
    }
    let half_tol = tol * F::c(0.5);
    simpson_recurse(f, a, c, fa, fc, flm, left, half_tol, depth - 1)
        + simpson_recurse(f, c, b, fc, fb, frm, right, half_tol, depth - 1)
}

/// Golden-section minimization of a unimodal `f` on `[a, b]`, terminating
/// when the bracket is narrower than `xtol`. Returns the abscissa.
pub fn golden_section_min<F: Real>(f: &dyn Fn(F) -> F, mut a: F, mut b: F, xtol: F) -> F {
    let inv_phi = F::c(0.618_033_988_749_894_8);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a).abs() > xtol {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    (a + b) * F::c(0.5)
}

/// Minimum of `f` over `[lo, hi]`: coarse grid of the given step, then
/// golden-section refinement around the best grid point down to `xtol`.
/// Returns `(argmin, min, interior)`; `interior` is false when the minimum
/// sits on the interval boundary.
pub fn grid_then_golden<F: Real>(
    f: &dyn Fn(F) -> F,
    lo: F,
    hi: F,
    step: F,
    xtol: F,
) -> (F, F, bool) {
    let mut best_x = lo;
    let mut best_f = f(lo);
    let mut x = lo + step;
    while x <= hi {
        let v = f(x);
        if v < best_f {
            best_f = v;
            best_x = x;
        }
        x = x + step;
    }
    let a = if best_x - step > lo { best_x - step } else { lo };
    let b = if best_x + step < hi { best_x + step } else { hi };
    let xm = golden_section_min(f, a, b, xtol);
    let fm = f(xm);
    let (x_star, f_star) = if fm < best_f { (xm, fm) } else { (best_x, best_f) };
    let interior = x_star - lo > xtol && hi - x_star > xtol;
    (x_star, f_star, interior)
}

/// Smallest `t` in `[lo, hi]` with `g(t) >= target`, for nondecreasing `g`,
/// located by bisection to `xtol`. Assumes `g(hi) >= target`.
pub fn bisect_first_at_least<F: Real>(g: &dyn Fn(F) -> F, lo: F, hi: F, target: F, xtol: F) -> F {
    if g(lo) >= target {
        return lo;
    }
    let mut lo = lo;
    let mut hi = hi;
    while hi - lo > xtol {
        let mid = (lo + hi) * F::c(0.5);
        if g(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}
