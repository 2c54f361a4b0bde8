//! Variational Bayes filtering and smoothing for linear state-space models
//! whose measurement noise is a product of independent univariate skew-t
//! distributions.
//!
//! The estimators are generic over the floating-point type through the
//! [`Scalar`] trait; `f64` aliases for the most common types are exported at
//! the crate root.
//!
//! Layout:
//! - [`distributions`]: special functions, densities, moments and samplers.
//! - [`statespace`]: the linear model, trajectory simulation and the
//!   pseudorange scenario.
//! - [`filters`]: KF, gated KF, Student-t VB filter, skew-t VB filter and a
//!   bootstrap particle filter.
//! - [`smoothers`]: RTS, gated RTS, Student-t VB smoother and skew-t VB
//!   smoother.
//! - [`experiments`]: Monte Carlo studies and error metrics.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{Float, FromPrimitive};

pub mod distributions;
pub mod error;
pub mod experiments;
pub mod filters;
pub(crate) mod linalg;
pub mod rng;
pub mod smoothers;
pub mod statespace;

pub use error::{Error, Result};
pub use rng::SeedStream;

/// Floating-point scalar usable by every estimator in this crate.
///
/// Combines the `num-traits` float surface (special functions) with the
/// `nalgebra` field surface (matrix algebra). Both `f32` and `f64` qualify.
///
/// Both supertraits define `sqrt`, `abs`, `max`, ... so generic code calls
/// them through the trait path, e.g. `Float::sqrt(x)`.
pub trait Scalar:
    RealField + Float + FromPrimitive + Copy + Send + Sync + Debug + Display + 'static
{
}

impl<T> Scalar for T where
    T: RealField + Float + FromPrimitive + Copy + Send + Sync + Debug + Display + 'static
{
}

/// Converts an `f64` literal into the working scalar type.
#[inline]
pub(crate) fn lit<T: FromPrimitive>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

pub type SkewTParams64 = distributions::SkewTParams<f64>;
pub type TruncNormalMoments64 = distributions::TruncNormalMoments<f64>;
pub type StateSpaceModel64 = statespace::StateSpaceModel<f64>;
pub type Trajectory64 = statespace::Trajectory<f64>;
pub type GaussianBelief64 = filters::GaussianBelief<f64>;
pub type VbLatentState64 = filters::VbLatentState<f64>;
pub type ParticleSet64 = filters::ParticleSet<f64>;

pub type SkewTParams32 = distributions::SkewTParams<f32>;
pub type StateSpaceModel32 = statespace::StateSpaceModel<f32>;
pub type GaussianBelief32 = filters::GaussianBelief<f32>;
