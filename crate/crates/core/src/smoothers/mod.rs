//! Batch smoothers: RTS, gated RTS, and the Student-t and skew-t VB smoothers.
//!
//! Every smoother runs a Kalman-type forward pass that stores filtered and
//! predicted beliefs, followed by the RTS backward recursion
//! `G_k = P_{k|k} Aᵀ P_{k+1|k}⁻¹`.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::filters::{
    kf_predict, kf_update, update_skew_t_latent, update_student_t_scale, GatedKalman,
    GaussianBelief, MomentNoise, StudentTNoise, VbConfig, VbLatentState,
};
use crate::linalg::{spd_solve, symmetrize};
use crate::statespace::StateSpaceModel;
use crate::Scalar;

/// Filtered beliefs `x_{k|k}` and one-step predictions `x_{k|k-1}`.
#[derive(Clone, Debug)]
pub struct ForwardPass<T: Scalar> {
    pub filtered: Vec<GaussianBelief<T>>,
    pub predicted: Vec<GaussianBelief<T>>,
}

pub(crate) fn prior<T: Scalar>(model: &StateSpaceModel<T>) -> GaussianBelief<T> {
    GaussianBelief::new(model.x0.clone(), model.p0.clone())
}

/// Kalman forward pass where step `k` uses noise `N(mean_k, diag(cov_k))`.
pub fn kalman_forward<T, F>(model: &StateSpaceModel<T>, ys: &[DVector<T>], mut noise: F) -> Result<ForwardPass<T>>
where
    T: Scalar,
    F: FnMut(usize) -> (DVector<T>, DVector<T>),
{
    let mut filtered = Vec::with_capacity(ys.len());
    let mut predicted = Vec::with_capacity(ys.len());
    let mut pred = prior(model);
    for (k, y) in ys.iter().enumerate() {
        if k > 0 {
            pred = kf_predict(model, &filtered[k - 1]);
        }
        let (m, c) = noise(k);
        filtered.push(kf_update(&pred, y, &model.c, &m, &c)?);
        predicted.push(pred.clone());
    }
    Ok(ForwardPass { filtered, predicted })
}

/// RTS backward pass. `predicted[k]` is `x_{k|k-1}`; the last smoothed belief
/// is the last filtered one.
pub fn rtss<T: Scalar>(
    model: &StateSpaceModel<T>,
    filtered: &[GaussianBelief<T>],
    predicted: &[GaussianBelief<T>],
) -> Result<Vec<GaussianBelief<T>>> {
    if filtered.len() != predicted.len() {
        return Err(Error::Invalid(format!(
            "filtered and predicted sequences differ in length ({} vs {})",
            filtered.len(),
            predicted.len()
        )));
    }
    let n = filtered.len();
    let mut smoothed = filtered.to_vec();
    for k in (0..n.saturating_sub(1)).rev() {
        let f = &filtered[k];
        let next_pred = &predicted[k + 1];
        // P_{k+1|k} Gᵀ = A P_{k|k}
        let gain_t = spd_solve(&next_pred.cov, &(&model.a * &f.cov)).ok_or(Error::Numerical {
            context: "smoother gain solve",
            iteration: None,
        })?;
        let gain = gain_t.transpose();
        let mean = &f.mean + &gain * (&smoothed[k + 1].mean - &next_pred.mean);
        let mut cov = &f.cov + &gain * (&smoothed[k + 1].cov - &next_pred.cov) * &gain_t;
        symmetrize(&mut cov);
        smoothed[k] = GaussianBelief { mean, cov };
    }
    Ok(smoothed)
}

/// Output of a VB smoother.
#[derive(Clone, Debug)]
pub struct VbSmootherOutput<T: Scalar, L> {
    pub smoothed: Vec<GaussianBelief<T>>,
    pub latent: Vec<L>,
    pub iters: usize,
}

fn max_change<T: Scalar>(a: &[GaussianBelief<T>], b: &[GaussianBelief<T>]) -> T {
    a.iter()
        .zip(b)
        .map(|(x, y)| (&x.mean - &y.mean).amax())
        .fold(T::zero(), |m, v| num_traits::Float::max(m, v))
}

fn with_iteration(e: Error, iter: usize) -> Error {
    match e {
        Error::Numerical { context, .. } => Error::Numerical {
            context,
            iteration: Some(iter),
        },
        other => other,
    }
}

/// Skew-t VB smoother. The outer loop alternates a Kalman forward pass with
/// noise `N(Δū_k, Λ̄_k⁻¹R)`, the RTS backward pass, and per-step updates of
/// the latent moments from the smoothed beliefs.
pub fn stvbs<T: Scalar>(
    model: &StateSpaceModel<T>,
    ys: &[DVector<T>],
    cfg: &VbConfig<T>,
) -> Result<VbSmootherOutput<T, VbLatentState<T>>> {
    model.validate()?;
    if ys.is_empty() {
        return Err(Error::Invalid("smoother needs at least one measurement".into()));
    }
    let mut latent = vec![VbLatentState::initial(model.ny()); ys.len()];
    let mut previous: Option<Vec<GaussianBelief<T>>> = None;
    let mut iter = 0;
    loop {
        iter += 1;
        let pass = kalman_forward(model, ys, |k| latent[k].noise_for_state(model))
            .map_err(|e| with_iteration(e, iter))?;
        let smoothed = rtss(model, &pass.filtered, &pass.predicted).map_err(|e| with_iteration(e, iter))?;
        latent = ys
            .iter()
            .zip(&smoothed)
            .zip(&latent)
            .map(|((y, b), l)| update_skew_t_latent(model, y, b, &l.lambda_bar))
            .collect::<Result<_>>()?;
        let change = previous
            .as_ref()
            .map(|p| max_change(&smoothed, p))
            .unwrap_or_else(T::infinity);
        if cfg.converged(iter, change) {
            return Ok(VbSmootherOutput {
                smoothed,
                latent,
                iters: iter,
            });
        }
        previous = Some(smoothed);
    }
}

/// Student-t VB smoother baseline with moment-matched noise; the scale
/// update uses smoothed residuals.
pub fn tvbs<T: Scalar>(
    model: &StateSpaceModel<T>,
    ys: &[DVector<T>],
    cfg: &VbConfig<T>,
) -> Result<VbSmootherOutput<T, DVector<T>>> {
    model.validate()?;
    if ys.is_empty() {
        return Err(Error::Invalid("smoother needs at least one measurement".into()));
    }
    let noise = StudentTNoise::matching_moments(model)?;
    let mut lambda = vec![DVector::from_element(model.ny(), T::one()); ys.len()];
    let mut previous: Option<Vec<GaussianBelief<T>>> = None;
    let mut iter = 0;
    loop {
        iter += 1;
        let pass = kalman_forward(model, ys, |k| (noise.mean.clone(), noise.shape.component_div(&lambda[k])))
            .map_err(|e| with_iteration(e, iter))?;
        let smoothed = rtss(model, &pass.filtered, &pass.predicted).map_err(|e| with_iteration(e, iter))?;
        lambda = ys
            .iter()
            .zip(&smoothed)
            .map(|(y, b)| update_student_t_scale(&noise, &model.c, y, b).lambda_bar)
            .collect();
        let change = previous
            .as_ref()
            .map(|p| max_change(&smoothed, p))
            .unwrap_or_else(T::infinity);
        if cfg.converged(iter, change) {
            return Ok(VbSmootherOutput {
                smoothed,
                latent: lambda,
                iters: iter,
            });
        }
        previous = Some(smoothed);
    }
}

/// RTS smoother over a gated Kalman forward pass that uses the exact noise
/// mean and variance.
pub fn rtss_g<T: Scalar>(
    model: &StateSpaceModel<T>,
    ys: &[DVector<T>],
    gate_p: T,
) -> Result<Vec<GaussianBelief<T>>> {
    model.validate()?;
    let noise = MomentNoise::from_model(model)?;
    let gate = GatedKalman::new(gate_p)?;
    let mut filtered: Vec<GaussianBelief<T>> = Vec::with_capacity(ys.len());
    let mut predicted = Vec::with_capacity(ys.len());
    for (k, y) in ys.iter().enumerate() {
        let pred = if k == 0 {
            prior(model)
        } else {
            kf_predict(model, &filtered[k - 1])
        };
        filtered.push(gate.update(&pred, y, &model.c, &noise)?.0);
        predicted.push(pred);
    }
    rtss(model, &filtered, &predicted)
}

/// Plain Kalman filter plus RTS smoother with noise `N(mean, diag(var))` at
/// every step.
pub fn kf_rtss<T: Scalar>(
    model: &StateSpaceModel<T>,
    ys: &[DVector<T>],
    mean: &DVector<T>,
    var: &DVector<T>,
) -> Result<Vec<GaussianBelief<T>>> {
    let pass = kalman_forward(model, ys, |_| (mean.clone(), var.clone()))?;
    rtss(model, &pass.filtered, &pass.predicted)
}
