use num_traits::{Float, FromPrimitive};

use super::special::{gamma_p, ln_gamma};
use crate::error::{domain, Result};
use crate::lit;

/// Chi-square CDF with `dof` degrees of freedom.
pub fn chi2_cdf<T: Float + FromPrimitive>(x: T, dof: u32) -> T {
    gamma_p(lit::<T>(dof as f64 * 0.5), x * lit(0.5))
}

/// Inverse chi-square CDF, by safeguarded Newton iteration on the regularized
/// incomplete gamma function.
pub fn chi2_quantile<T: Float + FromPrimitive>(p: T, dof: u32) -> Result<T> {
    if !(p > T::zero() && p < T::one()) {
        return Err(domain("chi2_quantile", "p must lie in (0, 1)"));
    }
    if dof == 0 {
        return Err(domain("chi2_quantile", "dof must be >= 1"));
    }
    let k = lit::<T>(dof as f64);
    let half = lit::<T>(0.5);
    let ln_norm = ln_gamma(k * half) + k * half * lit::<T>(std::f64::consts::LN_2);
    let pdf = |x: T| ((k * half - T::one()) * x.ln() - x * half - ln_norm).exp();

    let mut lo = T::zero();
    let mut hi = k.max(T::one());
    while chi2_cdf(hi, dof) < p {
        lo = hi;
        hi = hi + hi;
    }
    let mut x = (lo + hi) * half;
    for _ in 0..200 {
        let f = chi2_cdf(x, dof) - p;
        if f > T::zero() {
            hi = x;
        } else {
            lo = x;
        }
        let step = f / pdf(x);
        let mut next = x - step;
        if !(next > lo && next < hi) {
            next = (lo + hi) * half;
        }
        if (next - x).abs() <= x * T::epsilon() * lit(4.0) || hi - lo <= hi * T::epsilon() {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}
