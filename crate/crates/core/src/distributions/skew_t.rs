use num_traits::{Float, FromPrimitive};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use super::special::ln_gamma_half_ratio;
use super::student_t::{cdf_unchecked, ln_pdf_unchecked};
use crate::error::{domain, Error, Result};
use crate::lit;

/// Parameters of a univariate skew-t distribution: location `mu`, squared
/// spread `sigma2`, shape `delta` and degrees of freedom `nu`.
///
/// The noise `e = mu + delta·u + ε` with `Λ ~ Gamma(ν/2, ν/2)`,
/// `u | Λ ~ N₊(0, 1/Λ)` and `ε | Λ ~ N(0, σ²/Λ)` has this distribution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkewTParams<T> {
    pub mu: T,
    pub sigma2: T,
    pub delta: T,
    pub nu: T,
}

impl<T: Float + FromPrimitive> SkewTParams<T> {
    pub fn new(mu: T, sigma2: T, delta: T, nu: T) -> Result<Self> {
        let p = Self {
            mu,
            sigma2,
            delta,
            nu,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma2.is_finite() && self.sigma2 > T::zero()) {
            return Err(domain("skew_t", "sigma2 must be finite and > 0"));
        }
        if !(self.nu.is_finite() && self.nu > T::zero()) {
            return Err(domain("skew_t", "nu must be finite and > 0"));
        }
        if !(self.mu.is_finite() && self.delta.is_finite()) {
            return Err(domain("skew_t", "mu and delta must be finite"));
        }
        Ok(())
    }

    /// Density evaluator with the normalizing constants precomputed.
    pub fn log_density(&self) -> Result<SkewTLogDensity<T>> {
        self.validate()?;
        Ok(SkewTLogDensity {
            params: *self,
            scale2: self.delta * self.delta + self.sigma2,
            delta_over_sigma: self.delta / self.sigma2.sqrt(),
        })
    }

    /// One draw through the gamma / truncated-normal hierarchy.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        let nu = self.nu.to_f64().unwrap_or(f64::NAN);
        let lambda = Gamma::new(0.5 * nu, 2.0 / nu)
            .expect("validated degrees of freedom")
            .sample(rng);
        let inv_sqrt_lambda = lambda.sqrt().recip();
        let u: f64 = rng.sample::<f64, _>(StandardNormal).abs() * inv_sqrt_lambda;
        let eps: f64 = rng.sample::<f64, _>(StandardNormal) * inv_sqrt_lambda;
        let sigma = self.sigma2.sqrt();
        self.mu + self.delta * lit(u) + sigma * lit(eps)
    }
}

/// Precomputed skew-t log density.
#[derive(Clone, Copy, Debug)]
pub struct SkewTLogDensity<T> {
    params: SkewTParams<T>,
    scale2: T,
    delta_over_sigma: T,
}

impl<T: Float + FromPrimitive> SkewTLogDensity<T> {
    pub fn params(&self) -> &SkewTParams<T> {
        &self.params
    }

    pub fn ln_pdf(&self, z: T) -> T {
        let p = &self.params;
        let r = z - p.mu;
        let ln_t = ln_pdf_unchecked(r, self.scale2, p.nu);
        if p.delta == T::zero() {
            return ln_t;
        }
        let nu1 = p.nu + T::one();
        let z_tilde = r * self.delta_over_sigma * (nu1 / (p.nu * self.scale2 + r * r)).sqrt();
        lit::<T>(std::f64::consts::LN_2) + ln_t + cdf_unchecked(z_tilde, nu1).ln()
    }

    pub fn pdf(&self, z: T) -> T {
        self.ln_pdf(z).exp()
    }
}

/// Skew-t density `2·t(z; μ, δ²+σ², ν)·T(z̃; ν+1)`.
pub fn skew_t_pdf<T: Float + FromPrimitive>(z: T, p: &SkewTParams<T>) -> Result<T> {
    skew_t_ln_pdf(z, p).map(Float::exp)
}

pub fn skew_t_ln_pdf<T: Float + FromPrimitive>(z: T, p: &SkewTParams<T>) -> Result<T> {
    if !z.is_finite() {
        return Err(domain("skew_t_pdf", "z must be finite"));
    }
    Ok(p.log_density()?.ln_pdf(z))
}

/// Mean and variance of the skew-t distribution. Requires `nu > 2`.
///
/// `E[u] = √(ν/π)·Γ((ν-1)/2)/Γ(ν/2)` and `E[(e-μ)²] = (δ²+σ²)·ν/(ν-2)`.
pub fn skew_t_moments<T: Float + FromPrimitive>(p: &SkewTParams<T>) -> Result<(T, T)> {
    p.validate()?;
    let two: T = lit(2.0);
    if p.nu <= two {
        return Err(Error::MomentUndefined(format!(
            "skew-t variance requires nu > 2, got {:?}",
            p.nu.to_f64()
        )));
    }
    let half: T = lit(0.5);
    let eu = (p.nu / lit(std::f64::consts::PI)).sqrt()
        * (-ln_gamma_half_ratio((p.nu - T::one()) * half)).exp();
    let shift = p.delta * eu;
    let second = (p.delta * p.delta + p.sigma2) * p.nu / (p.nu - two);
    Ok((p.mu + shift, second - shift * shift))
}

/// `n` independent skew-t draws.
pub fn sample_skew_t<T, R>(p: &SkewTParams<T>, n: usize, rng: &mut R) -> Result<Vec<T>>
where
    T: Float + FromPrimitive,
    R: Rng + ?Sized,
{
    p.validate()?;
    Ok((0..n).map(|_| p.draw(rng)).collect())
}
