//! Variational Bayes filter for symmetric Student-t measurement noise, used as
//! a baseline. The noise is `N(m, Λ⁻¹S)` with `Λ_ii ~ Gamma(ν_i/2, ν_i/2)`,
//! where `m` and `S = (ν-2)/ν · Var` match the true noise moments.

use nalgebra::{DMatrix, DVector};

use super::{kf_update, GaussianBelief, MomentNoise, VbConfig};
use crate::error::{Error, Result};
use crate::linalg::quad_form_diag;
use crate::statespace::StateSpaceModel;
use crate::Scalar;

/// Student-t noise model `t(m_i, S_ii, ν_i)` per component.
#[derive(Clone, Debug, PartialEq)]
pub struct StudentTNoise<T: Scalar> {
    pub mean: DVector<T>,
    pub shape: DVector<T>,
    pub nu: DVector<T>,
}

impl<T: Scalar> StudentTNoise<T> {
    /// Mean of the skew-t noise and `(ν-2)/ν` times its variance as shape.
    pub fn matching_moments(model: &StateSpaceModel<T>) -> Result<Self> {
        let moments = MomentNoise::from_model(model)?;
        let two = T::one() + T::one();
        let shape = DVector::from_fn(model.ny(), |i, _| {
            (model.nu[i] - two) / model.nu[i] * moments.var[i]
        });
        Ok(Self {
            mean: moments.mean,
            shape,
            nu: model.nu.clone(),
        })
    }

    /// One measurement update; see [`tvbf_step`].
    pub fn step(
        &self,
        c: &DMatrix<T>,
        predicted: &GaussianBelief<T>,
        y: &DVector<T>,
        cfg: &VbConfig<T>,
    ) -> Result<(GaussianBelief<T>, TvbScaleState<T>, usize)> {
        let mut lambda_bar = DVector::from_element(y.len(), T::one());
        let mut previous = predicted.mean.clone();
        let mut iter = 0;
        loop {
            iter += 1;
            let noise_cov = self.shape.component_div(&lambda_bar);
            let posterior = kf_update(predicted, y, c, &self.mean, &noise_cov).map_err(|e| match e {
                Error::Numerical { context, .. } => Error::Numerical {
                    context,
                    iteration: Some(iter),
                },
                other => other,
            })?;
            let scale = update_student_t_scale(self, c, y, &posterior);
            lambda_bar = scale.lambda_bar.clone();
            let change = (&posterior.mean - &previous).amax();
            previous = posterior.mean.clone();
            if cfg.converged(iter, change) {
                return Ok((posterior, scale, iter));
            }
        }
    }
}

/// Gamma-scale moments of one time step.
#[derive(Clone, Debug, PartialEq)]
pub struct TvbScaleState<T: Scalar> {
    pub lambda_bar: DVector<T>,
    pub psi: DVector<T>,
}

/// `Λ̄_ii = (ν_i + 1)/(ν_i + Ψ_ii)` with
/// `Ψ_ii = ((y - m - C x̂)_i² + (C P Cᵀ)_ii) / S_ii`.
pub fn update_student_t_scale<T: Scalar>(
    noise: &StudentTNoise<T>,
    c: &DMatrix<T>,
    y: &DVector<T>,
    belief: &GaussianBelief<T>,
) -> TvbScaleState<T> {
    let resid = y - c * &belief.mean - &noise.mean;
    let cpc = quad_form_diag(c, &belief.cov);
    let psi = DVector::from_fn(y.len(), |i, _| (resid[i] * resid[i] + cpc[i]) / noise.shape[i]);
    let lambda_bar = DVector::from_fn(y.len(), |i, _| (noise.nu[i] + T::one()) / (noise.nu[i] + psi[i]));
    TvbScaleState { lambda_bar, psi }
}

/// One measurement update of the Student-t VB filter with noise parameters
/// matched to the model's skew-t moments.
pub fn tvbf_step<T: Scalar>(
    model: &StateSpaceModel<T>,
    predicted: &GaussianBelief<T>,
    y: &DVector<T>,
    cfg: &VbConfig<T>,
) -> Result<(GaussianBelief<T>, TvbScaleState<T>, usize)> {
    StudentTNoise::matching_moments(model)?.step(&model.c, predicted, y, cfg)
}
