use nalgebra::{DMatrix, DVector};

use super::GaussianBelief;
use crate::distributions::{chi2_quantile, skew_t_moments};
use crate::error::{Error, Result};
use crate::linalg::{quad_form_diag, spd_solve, symmetrize};
use crate::statespace::StateSpaceModel;
use crate::Scalar;

/// `x ← A x`, `P ← A P Aᵀ + Q`.
pub fn kf_predict<T: Scalar>(model: &StateSpaceModel<T>, b: &GaussianBelief<T>) -> GaussianBelief<T> {
    let mean = &model.a * &b.mean;
    let mut cov = &model.a * &b.cov * model.a.transpose() + &model.q;
    symmetrize(&mut cov);
    GaussianBelief { mean, cov }
}

/// Kalman measurement update with noise `N(noise_mean, diag(noise_cov))`.
pub fn kf_update<T: Scalar>(
    b: &GaussianBelief<T>,
    y: &DVector<T>,
    c: &DMatrix<T>,
    noise_mean: &DVector<T>,
    noise_cov: &DVector<T>,
) -> Result<GaussianBelief<T>> {
    let cp = c * &b.cov;
    let mut s = &cp * c.transpose();
    for i in 0..s.nrows() {
        s[(i, i)] += noise_cov[i];
    }
    // Kᵀ = S⁻¹ C P
    let gain_t = spd_solve(&s, &cp).ok_or(Error::Numerical {
        context: "innovation covariance solve",
        iteration: None,
    })?;
    let innovation = y - c * &b.mean - noise_mean;
    let mean = &b.mean + gain_t.tr_mul(&innovation);
    let mut cov = &b.cov - gain_t.tr_mul(&cp);
    symmetrize(&mut cov);
    Ok(GaussianBelief { mean, cov })
}

/// Kalman update that first drops every component whose normalized squared
/// innovation `νᵢ²/Sᵢᵢ` strictly exceeds the `gate_p` quantile of χ²₁.
///
/// Returns the posterior and the mask of kept components.
pub fn kf_gated_update<T: Scalar>(
    b: &GaussianBelief<T>,
    y: &DVector<T>,
    c: &DMatrix<T>,
    noise_mean: &DVector<T>,
    noise_cov: &DVector<T>,
    gate_p: T,
) -> Result<(GaussianBelief<T>, Vec<bool>)> {
    let threshold = chi2_quantile(gate_p, 1)?;
    gated_update(b, y, c, noise_mean, noise_cov, threshold)
}

fn gated_update<T: Scalar>(
    b: &GaussianBelief<T>,
    y: &DVector<T>,
    c: &DMatrix<T>,
    noise_mean: &DVector<T>,
    noise_cov: &DVector<T>,
    threshold: T,
) -> Result<(GaussianBelief<T>, Vec<bool>)> {
    let innovation = y - c * &b.mean - noise_mean;
    let s_diag = quad_form_diag(c, &b.cov) + noise_cov;
    let mask: Vec<bool> = (0..y.len())
        .map(|i| innovation[i] * innovation[i] / s_diag[i] <= threshold)
        .collect();
    let kept: Vec<usize> = (0..y.len()).filter(|&i| mask[i]).collect();
    if kept.is_empty() {
        return Ok((b.clone(), mask));
    }
    if kept.len() == y.len() {
        return Ok((kf_update(b, y, c, noise_mean, noise_cov)?, mask));
    }
    let post = kf_update(
        b,
        &y.select_rows(&kept),
        &c.select_rows(&kept),
        &noise_mean.select_rows(&kept),
        &noise_cov.select_rows(&kept),
    )?;
    Ok((post, mask))
}

/// Measurement noise summarized by its exact mean and variance, as used by
/// the KF, KF-G and RTSS baselines.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentNoise<T: Scalar> {
    pub mean: DVector<T>,
    pub var: DVector<T>,
}

impl<T: Scalar> MomentNoise<T> {
    /// Mean and variance of each skew-t component of the model.
    pub fn from_model(model: &StateSpaceModel<T>) -> Result<Self> {
        let ny = model.ny();
        let mut mean = DVector::zeros(ny);
        let mut var = DVector::zeros(ny);
        for i in 0..ny {
            let (m, v) = skew_t_moments(&model.noise_params(i))?;
            mean[i] = m;
            var[i] = v;
        }
        Ok(Self { mean, var })
    }
}

/// Gated Kalman update with the χ² threshold computed once.
#[derive(Clone, Copy, Debug)]
pub struct GatedKalman<T> {
    pub threshold: T,
}

impl<T: Scalar> GatedKalman<T> {
    pub fn new(gate_p: T) -> Result<Self> {
        Ok(Self {
            threshold: chi2_quantile(gate_p, 1)?,
        })
    }

    pub fn update(
        &self,
        b: &GaussianBelief<T>,
        y: &DVector<T>,
        c: &DMatrix<T>,
        noise: &MomentNoise<T>,
    ) -> Result<(GaussianBelief<T>, Vec<bool>)> {
        gated_update(b, y, c, &noise.mean, &noise.var, self.threshold)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::chi2_quantile;
    use approx::assert_relative_eq;

    fn scalar(m: f64, p: f64) -> GaussianBelief<f64> {
        GaussianBelief::new(DVector::from_element(1, m), DMatrix::from_element(1, 1, p))
    }

    fn one(v: f64) -> DVector<f64> {
        DVector::from_element(1, v)
    }

    #[test]
    fn predict_scalar() {
        let m = crate::statespace::tests_support::scalar_model(1.0, 0.0, 4.0);
        let b = kf_predict(&m, &scalar(0.0, 1.0));
        assert_eq!((b.mean[0], b.cov[(0, 0)]), (0.0, 2.0));
        let mut m0 = m.clone();
        m0.a[(0, 0)] = 0.0;
        m0.q[(0, 0)] = 3.0;
        let b = kf_predict(&m0, &scalar(4.0, 1.0));
        assert_eq!((b.mean[0], b.cov[(0, 0)]), (0.0, 3.0));
    }

    #[test]
    fn update_scalar() {
        let c = DMatrix::from_element(1, 1, 1.0);
        let post = kf_update(&scalar(0.0, 1.0), &one(2.0), &c, &one(0.0), &one(1.0)).unwrap();
        assert_relative_eq!(post.mean[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(post.cov[(0, 0)], 0.5, epsilon = 1e-15);
        let post = kf_update(&scalar(0.3, 1.0), &one(50.0), &c, &one(0.0), &one(1e12)).unwrap();
        assert!((post.mean[0] - 0.3).abs() < 1e-6 && (post.cov[(0, 0)] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn update_reports_solve_failure() {
        let c = DMatrix::from_element(1, 1, 1.0);
        let err = kf_update(&scalar(0.0, 0.0), &one(1.0), &c, &one(0.0), &one(0.0)).unwrap_err();
        assert!(matches!(err, Error::Numerical { .. }));
    }

    #[test]
    fn gate_keeps_zero_innovation() {
        let c = DMatrix::from_row_slice(2, 1, &[1.0, 1.0]);
        let y = DVector::from_vec(vec![0.0, 0.0]);
        let z = DVector::zeros(2);
        let r = DVector::from_element(2, 1.0);
        let (g, mask) = kf_gated_update(&scalar(0.0, 1.0), &y, &c, &z, &r, 0.99).unwrap();
        assert_eq!(mask, vec![true, true]);
        assert_eq!(g, kf_update(&scalar(0.0, 1.0), &y, &c, &z, &r).unwrap());
    }

    #[test]
    fn gate_drops_outlier() {
        let c = DMatrix::from_row_slice(3, 1, &[1.0, 1.0, 1.0]);
        let r = DVector::from_element(3, 1.0);
        let z = DVector::zeros(3);
        // S_ii = 1 + 1 = 2
        let y = DVector::from_vec(vec![0.1, 100.0 * 2f64.sqrt(), -0.2]);
        let (g, mask) = kf_gated_update(&scalar(0.0, 1.0), &y, &c, &z, &r, 0.99).unwrap();
        assert_eq!(mask, vec![true, false, true]);
        let keep = [0usize, 2];
        let expected = kf_update(&scalar(0.0, 1.0), &y.select_rows(&keep), &c.select_rows(&keep), &z.select_rows(&keep), &r.select_rows(&keep)).unwrap();
        assert_eq!(g, expected);
    }

    #[test]
    fn gate_boundary_is_inclusive() {
        let threshold = chi2_quantile(0.99, 1).unwrap();
        let c = DMatrix::from_element(1, 1, 1.0);
        // S = 1 + 1 = 2, ν² / S = threshold exactly when ν = √(2·threshold)
        let gate = GatedKalman { threshold: 8.0 };
        let y = one(4.0); // 16 / 2 = 8
        let noise = MomentNoise { mean: one(0.0), var: one(1.0) };
        let (_, mask) = gate.update(&scalar(0.0, 1.0), &y, &c, &noise).unwrap();
        assert_eq!(mask, vec![true]);
        let (_, mask) = gate.update(&scalar(0.0, 1.0), &one(4.0 + 1e-9), &c, &noise).unwrap();
        assert_eq!(mask, vec![false]);
        assert!(threshold > 6.6);
    }

    #[test]
    fn all_gated_returns_prior() {
        let c = DMatrix::from_element(1, 1, 1.0);
        let prior = scalar(0.0, 1.0);
        let (g, mask) = kf_gated_update(&prior, &one(1e6), &c, &one(0.0), &one(1.0), 0.99).unwrap();
        assert_eq!(mask, vec![false]);
        assert_eq!(g, prior);
    }

    #[test]
    fn moment_noise_of_benchmark_configuration() {
        let m = crate::statespace::tests_support::scalar_model(1.0, 5.0, 4.0);
        let n = MomentNoise::from_model(&m).unwrap();
        assert_relative_eq!(n.mean[0], 5.0, epsilon = 1e-12);
        assert_relative_eq!(n.var[0], 27.0, epsilon = 1e-10);
    }
}
