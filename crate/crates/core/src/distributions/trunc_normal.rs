use num_traits::{Float, FromPrimitive};
use serde::{Deserialize, Serialize};

use super::special::{erfcx, erfcx_cf_tail, std_normal_cdf, std_normal_pdf};
use crate::error::{domain, Result};
use crate::lit;

/// First two raw moments of a normal variable truncated to `[0, ∞)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncNormalMoments<T> {
    pub mean: T,
    pub second_moment: T,
}

/// Below this standardized location the moments come straight from the
/// continued fraction of the scaled complementary error function.
const DEEP_TAIL: f64 = -5.0;

/// Mean and second moment of `N(m, s2)` truncated to the nonnegative half-line.
///
/// With `a = m/s`, `E[u] = m + s·φ(a)/Φ(a)` and `E[u²] = s2 + m·E[u]`. For
/// `a < -5` both are rewritten in terms of the continued-fraction tail of
/// `erfcx` so neither `Φ(a)` nor the cancellation in `m + s·λ` appear.
pub fn trunc_normal_moments<T: Float + FromPrimitive>(m: T, s2: T) -> Result<TruncNormalMoments<T>> {
    if !(s2.is_finite() && s2 > T::zero()) {
        return Err(domain("trunc_normal_moments", "s2 must be finite and > 0"));
    }
    if !m.is_finite() {
        return Err(domain("trunc_normal_moments", "m must be finite"));
    }
    let s = s2.sqrt();
    let a = m / s;
    if a < lit(DEEP_TAIL) {
        // x = -a/√2, λ = √2(x + F₁), F₁ = ½/(x + F₂):
        //   E[u]/s = a + λ = 1/(√2(x + F₂)),  E[u²]/s² = 1 + a(a + λ) = F₂/(x + F₂)
        let x = -a * lit(std::f64::consts::FRAC_1_SQRT_2);
        let f2 = erfcx_cf_tail(x, 2);
        let denom = x + f2;
        return Ok(TruncNormalMoments {
            mean: s / (denom * lit(std::f64::consts::SQRT_2)),
            second_moment: s2 * f2 / denom,
        });
    }
    // inverse Mills ratio φ(a)/Φ(a)
    let lambda = if a > T::zero() {
        std_normal_pdf(a) / std_normal_cdf(a)
    } else {
        lit::<T>((2.0 / std::f64::consts::PI).sqrt()) / erfcx(-a * lit(std::f64::consts::FRAC_1_SQRT_2))
    };
    let mean = m + s * lambda;
    Ok(TruncNormalMoments {
        mean,
        second_moment: s2 + m * mean,
    })
}
