//! Standard bivariate normal probabilities over axis-aligned rectangles.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};
use crate::quadrature::integrate_with_breaks;

/// Largest |rho| accepted by [`rectangle_probability`].
pub const MAX_ABS_RHO: f64 = 1.0 - 1e-12;

const KERNEL_TOL: f64 = 1e-13;
// exp(-x^2/2) underflows to zero past this point.
const TAIL_CUTOFF: f64 = 38.5;

/// Standard normal density.
#[inline]
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal CDF.
#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// `Phi(hi) - Phi(lo)` without cancellation in either tail.
pub fn normal_interval(lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let upper_tail = |x: f64| 0.5 * libm::erfc(x * FRAC_1_SQRT_2);
    if lo >= 0.0 {
        upper_tail(lo) - upper_tail(hi)
    } else if hi <= 0.0 {
        upper_tail(-hi) - upper_tail(-lo)
    } else {
        1.0 - upper_tail(hi) - upper_tail(-lo)
    }
}

/// Probability that a standard bivariate normal with correlation `rho` lies
/// in `[a_lo, a_hi] x [b_lo, b_hi]`. Infinite bounds are allowed.
///
/// Reduces to a one-dimensional integral over the first coordinate of the
/// conditional probability of the second,
/// `int phi(x) [Phi((b_hi - rho x)/s) - Phi((b_lo - rho x)/s)] dx` with
/// `s = sqrt(1 - rho^2)`, evaluated by adaptive Gauss-Kronrod with the
/// interval split where the conditional mean crosses each `b` bound.
pub fn rectangle_probability(rho: f64, a_lo: f64, a_hi: f64, b_lo: f64, b_hi: f64) -> Result<f64> {
    if !rho.is_finite() || rho.abs() > MAX_ABS_RHO {
        return Err(Error::DegenerateCorrelation(rho));
    }
    if [a_lo, a_hi, b_lo, b_hi].iter().any(|v| v.is_nan()) {
        return Err(Error::invalid("rectangle bounds", "NaN bound"));
    }
    if a_lo > a_hi || b_lo > b_hi {
        return Err(Error::invalid("rectangle bounds", "lower bound exceeds upper bound"));
    }
    if rho == 0.0 {
        return Ok(normal_interval(a_lo, a_hi) * normal_interval(b_lo, b_hi));
    }

    let lo = a_lo.max(-TAIL_CUTOFF);
    let hi = a_hi.min(TAIL_CUTOFF);
    if lo >= hi || b_lo == b_hi {
        return Ok(0.0);
    }

    let s = (1.0 - rho * rho).sqrt();
    let integrand = |x: f64| {
        let shift = rho * x;
        normal_pdf(x) * normal_interval((b_lo - shift) / s, (b_hi - shift) / s)
    };
    let mut breaks = Vec::with_capacity(8);
    for b in [b_lo, b_hi] {
        if b.is_finite() {
            let centre = b / rho;
            let width = s / rho.abs();
            breaks.extend([centre - 4.0 * width, centre, centre + 4.0 * width]);
        }
    }
    breaks.push(0.0);
    let r = integrate_with_breaks(&integrand, lo, hi, &breaks, KERNEL_TOL);
    if !r.value.is_finite() {
        return Err(Error::Numerical(format!(
            "rectangle integral diverged for rho={rho}, a=[{a_lo},{a_hi}], b=[{b_lo},{b_hi}]"
        )));
    }
    Ok(r.value.clamp(0.0, 1.0))
}
