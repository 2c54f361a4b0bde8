use num_traits::{Float, FromPrimitive};

use super::special::{
    beta_reg_parts, ln_beta, ln_gamma_half_ratio, std_normal_cdf, std_normal_pdf,
};
use crate::error::{domain, Result};
use crate::lit;

pub(crate) fn check_dof<T: Float>(function: &'static str, nu: T) -> Result<()> {
    if !(nu.is_finite() && nu > T::zero()) {
        return Err(domain(function, "degrees of freedom must be finite and > 0"));
    }
    Ok(())
}

/// Log density of the location-scale Student-t distribution with squared
/// scale `sigma2`.
pub fn student_t_ln_pdf<T: Float + FromPrimitive>(z: T, mu: T, sigma2: T, nu: T) -> Result<T> {
    check_dof("student_t_pdf", nu)?;
    if !(sigma2.is_finite() && sigma2 > T::zero()) {
        return Err(domain("student_t_pdf", "sigma2 must be finite and > 0"));
    }
    if !(z.is_finite() && mu.is_finite()) {
        return Err(domain("student_t_pdf", "z and mu must be finite"));
    }
    Ok(ln_pdf_unchecked(z - mu, sigma2, nu))
}

pub(crate) fn ln_pdf_unchecked<T: Float + FromPrimitive>(r: T, sigma2: T, nu: T) -> T {
    let half: T = lit(0.5);
    ln_gamma_half_ratio(nu * half)
        - half * (nu * sigma2 * lit(std::f64::consts::PI)).ln()
        - (nu + T::one()) * half * (r * r / (nu * sigma2)).ln_1p()
}

/// Density of the location-scale Student-t distribution.
pub fn student_t_pdf<T: Float + FromPrimitive>(z: T, mu: T, sigma2: T, nu: T) -> Result<T> {
    student_t_ln_pdf(z, mu, sigma2, nu).map(Float::exp)
}

/// CDF of the standard Student-t distribution, through the regularized
/// incomplete beta function.
pub fn student_t_cdf<T: Float + FromPrimitive>(z: T, nu: T) -> Result<T> {
    check_dof("student_t_cdf", nu)?;
    if z.is_nan() {
        return Err(domain("student_t_cdf", "z is NaN"));
    }
    Ok(cdf_unchecked(z, nu))
}

/// Above this the incomplete-beta argument `1 - x ≈ z²/ν` loses more digits
/// than the large-ν expansion of the CDF leaves out.
const LARGE_DOF: f64 = 1e7;

// T(z; ν) = Φ(z) - φ(z)·(g₁(z)/ν + g₂(z)/ν²) + O(ν⁻³)
fn large_dof_cdf<T: Float + FromPrimitive>(z: T, nu: T) -> T {
    let z2 = z * z;
    let g1 = (z2 + T::one()) * z / lit(4.0);
    let g2 = (((lit::<T>(3.0) * z2 - lit(7.0)) * z2 - lit(5.0)) * z2 - lit(3.0)) * z / lit(96.0);
    let r = nu.recip();
    std_normal_cdf(z) - std_normal_pdf(z) * r * (g1 + g2 * r)
}

pub(crate) fn cdf_unchecked<T: Float + FromPrimitive>(z: T, nu: T) -> T {
    let half: T = lit(0.5);
    if z == T::zero() {
        return half;
    }
    if z.is_infinite() {
        return if z > T::zero() { T::one() } else { T::zero() };
    }
    if nu > lit(LARGE_DOF) {
        return large_dof_cdf(z, nu);
    }
    // tail = ½ I_x(ν/2, ½) with x = ν/(ν+z²)
    let z2 = z * z;
    let x = nu / (nu + z2);
    let y = z2 / (nu + z2);
    let ln_x = -(z2 / nu).ln_1p();
    let ln_y = -(nu / z2).ln_1p();
    let a = nu * half;
    let tail = half * beta_reg_parts(a, half, x, y, ln_x, ln_y, ln_beta(a, half));
    if z > T::zero() {
        T::one() - tail
    } else {
        tail
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pdf_closed_forms() {
        assert_relative_eq!(student_t_pdf(0.0, 0.0, 1.0, 4.0).unwrap(), 0.375, epsilon = 1e-15);
        let normal = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        assert!((student_t_pdf(0.0, 0.0, 1.0, 1e12).unwrap() - normal).abs() < 1e-6);
        // Cauchy
        assert_relative_eq!(
            student_t_pdf(1.0, 0.0, 1.0, 1.0).unwrap(),
            1.0 / (2.0 * std::f64::consts::PI),
            max_relative = 1e-14
        );
    }

    #[test]
    fn pdf_domain_errors() {
        assert!(student_t_pdf(0.0, 0.0, 0.0, 4.0).is_err());
        assert!(student_t_pdf(0.0, 0.0, 1.0, -1.0).is_err());
        assert!(student_t_pdf(f64::NAN, 0.0, 1.0, 4.0).is_err());
        assert!(student_t_pdf(0.0, 0.0, f64::INFINITY, 4.0).is_err());
    }

    #[test]
    fn cdf_closed_forms() {
        assert_eq!(student_t_cdf(0.0, 5.0).unwrap(), 0.5);
        assert_relative_eq!(student_t_cdf(1.0, 1.0).unwrap(), 0.75, epsilon = 1e-14);
        assert!(student_t_cdf(1.0, 0.0).is_err());
        assert_eq!(student_t_cdf(f64::NEG_INFINITY, 3.0).unwrap(), 0.0);
        // ν = 2: T(z) = ½ + z / (2√(2 + z²))
        for &z in &[-7.0, -1.5, 0.3, 2.0, 40.0] {
            let exact = 0.5 + z / (2.0 * (2.0f64 + z * z).sqrt());
            assert_relative_eq!(student_t_cdf(z, 2.0).unwrap(), exact, epsilon = 1e-14);
        }
    }

    #[test]
    fn cdf_gaussian_limit() {
        for &z in &[-3.0, -1.0, 0.5, 2.0] {
            let phi = super::super::special::std_normal_cdf(z);
            assert!((student_t_cdf(z, 1e12).unwrap() - phi).abs() < 1e-9);
        }
        // both sides of the large-dof switch agree
        for &z in &[-8.0, -3.0, -0.7, 1.2, 5.0] {
            let below = student_t_cdf(z, 0.999_999_9e7).unwrap();
            let above = student_t_cdf(z, 1.000_000_1e7).unwrap();
            assert!((below - above).abs() <= 1e-9 * below.min(1.0 - below) + 1e-15, "z={z}");
        }
    }
}
