//! Variational Bayes filter for skew-t measurement noise.
//!
//! Each measurement update alternates three coordinate updates until the
//! state estimate stops moving:
//! - the state, a Kalman update with noise `N(Δū, Λ̄⁻¹R)`;
//! - the skewness latent `u`, a positively truncated normal;
//! - the gamma scale `Λ`, through `Λ̄_ii = (ν_i + 2)/(ν_i + Ψ_ii)`.
//!
//! All of `K_u`, `U` and `Λ̄` are diagonal, so the truncated normal
//! factorizes into univariate truncations and only diagonals are stored.

use nalgebra::DVector;

use super::{kf_update, GaussianBelief, VbConfig};
use crate::distributions::trunc_normal_moments;
use crate::error::{Error, Result};
use crate::linalg::quad_form_diag;
use crate::statespace::StateSpaceModel;
use crate::Scalar;

/// Latent-variable moments of one time step.
#[derive(Clone, Debug, PartialEq)]
pub struct VbLatentState<T: Scalar> {
    /// `diag(E[Λ])`.
    pub lambda_bar: DVector<T>,
    /// `E[u]`.
    pub u_bar: DVector<T>,
    /// Location of the truncated-normal factor of `u`.
    pub u_loc: DVector<T>,
    /// Diagonal squared scale of that factor.
    pub u_cov: DVector<T>,
    /// `E[u_i²]`.
    pub upsilon: DVector<T>,
    pub psi: DVector<T>,
    /// `y - C x̂`.
    pub residual: DVector<T>,
}

impl<T: Scalar> VbLatentState<T> {
    /// `Λ̄ = I`, `ū = 0`.
    pub fn initial(ny: usize) -> Self {
        Self {
            lambda_bar: DVector::from_element(ny, T::one()),
            u_bar: DVector::zeros(ny),
            u_loc: DVector::zeros(ny),
            u_cov: DVector::from_element(ny, T::one()),
            upsilon: DVector::zeros(ny),
            psi: DVector::zeros(ny),
            residual: DVector::zeros(ny),
        }
    }

    /// Noise mean `Δū` and covariance diagonal `R/Λ̄` seen by the state update.
    pub fn noise_for_state(&self, model: &StateSpaceModel<T>) -> (DVector<T>, DVector<T>) {
        (
            model.delta.component_mul(&self.u_bar),
            model.r.component_div(&self.lambda_bar),
        )
    }
}

/// Updates `q_u` and `q_Λ` given the state posterior `belief`.
///
/// `lambda_bar` is the current `E[Λ]`; the returned state carries the new one.
pub fn update_skew_t_latent<T: Scalar>(
    model: &StateSpaceModel<T>,
    y: &DVector<T>,
    belief: &GaussianBelief<T>,
    lambda_bar: &DVector<T>,
) -> Result<VbLatentState<T>> {
    let ny = model.ny();
    let residual = y - &model.c * &belief.mean;
    let cpc = quad_form_diag(&model.c, &belief.cov);
    let mut st = VbLatentState {
        lambda_bar: DVector::zeros(ny),
        u_bar: DVector::zeros(ny),
        u_loc: DVector::zeros(ny),
        u_cov: DVector::zeros(ny),
        upsilon: DVector::zeros(ny),
        psi: DVector::zeros(ny),
        residual,
    };
    let two = T::one() + T::one();
    for i in 0..ny {
        let r = model.r[i];
        let d = model.delta[i];
        let ku = d / (d * d + r);
        st.u_loc[i] = ku * st.residual[i];
        st.u_cov[i] = (T::one() - ku * d) / lambda_bar[i];
        let tn = trunc_normal_moments(st.u_loc[i], st.u_cov[i])?;
        st.u_bar[i] = tn.mean;
        st.upsilon[i] = tn.second_moment;
        let e = st.residual[i];
        st.psi[i] = (e * e + cpc[i]) / r + (d * d / r + T::one()) * st.upsilon[i]
            - two * d * st.u_bar[i] * e / r;
        st.lambda_bar[i] = (model.nu[i] + two) / (model.nu[i] + st.psi[i]);
    }
    Ok(st)
}

/// One measurement update of the skew-t VB filter.
///
/// Starts from `Λ̄ = I`, `ū = 0` and returns the filtered belief, the final
/// latent moments and the number of iterations run.
pub fn stvbf_step<T: Scalar>(
    model: &StateSpaceModel<T>,
    predicted: &GaussianBelief<T>,
    y: &DVector<T>,
    cfg: &VbConfig<T>,
) -> Result<(GaussianBelief<T>, VbLatentState<T>, usize)> {
    let mut latent = VbLatentState::initial(model.ny());
    let mut previous = predicted.mean.clone();
    let mut iter = 0;
    loop {
        iter += 1;
        let (noise_mean, noise_cov) = latent.noise_for_state(model);
        let posterior = kf_update(predicted, y, &model.c, &noise_mean, &noise_cov).map_err(|e| match e {
            Error::Numerical { context, .. } => Error::Numerical {
                context,
                iteration: Some(iter),
            },
            other => other,
        })?;
        latent = update_skew_t_latent(model, y, &posterior, &latent.lambda_bar)?;
        let change = (&posterior.mean - &previous).amax();
        previous = posterior.mean.clone();
        if cfg.converged(iter, change) {
            return Ok((posterior, latent, iter));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::kf_predict;
    use crate::statespace::tests_support::scalar_model;
    use nalgebra::{DMatrix, DVector};

    fn three_sensor(delta: f64, nu: f64) -> StateSpaceModel<f64> {
        let mut m = scalar_model(1.0, delta, nu);
        m.c = DMatrix::from_element(3, 1, 1.0);
        m.r = DVector::from_element(3, 1.0);
        m.delta = DVector::from_element(3, delta);
        m.nu = DVector::from_element(3, nu);
        m
    }

    #[test]
    fn first_iteration_is_plain_kalman() {
        let m = three_sensor(5.0, 4.0);
        let pred = kf_predict(&m, &GaussianBelief::new(m.x0.clone(), m.p0.clone()));
        let y = DVector::from_vec(vec![0.5, 7.0, 2.0]);
        let (b, _, iters) = stvbf_step(&m, &pred, &y, &VbConfig::fixed(1)).unwrap();
        assert_eq!(iters, 1);
        let kf = kf_update(&pred, &y, &m.c, &DVector::zeros(3), &m.r).unwrap();
        assert!((b.mean[0] - kf.mean[0]).abs() < 1e-12);
        assert!((b.cov[(0, 0)] - kf.cov[(0, 0)]).abs() < 1e-12);
    }

    #[test]
    fn latent_invariants_hold() {
        let m = three_sensor(5.0, 4.0);
        let pred = GaussianBelief::new(DVector::zeros(1), DMatrix::identity(1, 1));
        let y = DVector::from_vec(vec![-3.0, 40.0, 2.0]);
        for n in 1..10 {
            let (_, l, _) = stvbf_step(&m, &pred, &y, &VbConfig::fixed(n)).unwrap();
            for i in 0..3 {
                assert!(l.upsilon[i] >= l.u_bar[i] * l.u_bar[i]);
                assert!(l.lambda_bar[i] > 0.0 && l.lambda_bar[i] <= 6.0 / 4.0);
                assert!(l.u_bar[i] >= 0.0 && l.u_cov[i] > 0.0);
            }
        }
    }

    #[test]
    fn terminates_on_tolerance() {
        let m = three_sensor(5.0, 4.0);
        let pred = GaussianBelief::new(DVector::zeros(1), DMatrix::identity(1, 1));
        let y = DVector::from_vec(vec![1.0, 6.0, 3.0]);
        let (_, _, iters) = stvbf_step(&m, &pred, &y, &VbConfig::new(500, 1e-2)).unwrap();
        assert!(iters > 1 && iters < 500);
    }

    #[test]
    fn gaussian_limit_matches_kalman() {
        let m = three_sensor(0.0, 1e9);
        let pred = GaussianBelief::new(DVector::zeros(1), DMatrix::identity(1, 1) * 2.0);
        let y = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let (b, _, _) = stvbf_step(&m, &pred, &y, &VbConfig::new(100, 1e-12)).unwrap();
        let kf = kf_update(&pred, &y, &m.c, &DVector::zeros(3), &m.r).unwrap();
        assert!((b.mean[0] - kf.mean[0]).abs() < 1e-6);
        assert!((b.cov[(0, 0)] - kf.cov[(0, 0)]).abs() < 1e-6);
    }
}
