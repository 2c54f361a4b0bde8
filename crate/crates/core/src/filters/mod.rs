//! Forward-pass estimators.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::linalg::{cholesky, is_symmetric};
use crate::{lit, Scalar};

mod kalman;
mod particle;
mod skew_t_vb;
mod student_t_vb;

pub use kalman::{kf_gated_update, kf_predict, kf_update, GatedKalman, MomentNoise};
pub use particle::{pf_step, ParticleFilter, ParticleSet};
pub use skew_t_vb::{stvbf_step, update_skew_t_latent, VbLatentState};
pub use student_t_vb::{tvbf_step, update_student_t_scale, StudentTNoise, TvbScaleState};

/// Gaussian posterior `N(mean, cov)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianBelief<T: Scalar> {
    pub mean: DVector<T>,
    pub cov: DMatrix<T>,
}

impl<T: Scalar> GaussianBelief<T> {
    pub fn new(mean: DVector<T>, cov: DMatrix<T>) -> Self {
        Self { mean, cov }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Symmetric and Cholesky-factorizable.
    pub fn is_valid(&self) -> bool {
        self.cov.nrows() == self.mean.len()
            && is_symmetric(&self.cov, lit(1e-9))
            && cholesky(&self.cov).is_some()
    }
}

/// Termination rule of a VB fixed-point loop: stop once the infinity norm of
/// the change in the state estimate drops below `tol`, or after `max_iters`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VbConfig<T> {
    pub max_iters: usize,
    pub tol: T,
}

impl<T: Scalar> VbConfig<T> {
    pub fn new(max_iters: usize, tol: T) -> Self {
        Self { max_iters, tol }
    }

    /// 30 iterations, tolerance 0.01.
    pub fn filter_default() -> Self {
        Self::new(30, lit(1e-2))
    }

    /// Exactly `n` iterations.
    pub fn fixed(n: usize) -> Self {
        Self::new(n, T::zero())
    }

    pub(crate) fn converged(&self, iter: usize, change: T) -> bool {
        iter >= self.max_iters || (iter > 1 && change < self.tol)
    }
}

impl<T: Scalar> Default for VbConfig<T> {
    fn default() -> Self {
        Self::filter_default()
    }
}
