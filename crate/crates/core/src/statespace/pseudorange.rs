//! Pseudorange positioning: a 3-D random-walk receiver with a constant clock
//! bias observed through ranges to fixed satellites.
//!
//! The state is `[east, north, up, bias]`. Measurements are linearized once at
//! the prior mean, which is accurate because satellite ranges exceed the
//! receiver displacement by many orders of magnitude.

use nalgebra::{DMatrix, DVector, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{simulate_with, StateSpaceModel, Trajectory};
use crate::distributions::SkewTParams;
use crate::error::{Error, Result};
use crate::{lit, Scalar};

/// Distance from the receiver to every synthetic satellite, meters.
pub const SATELLITE_RANGE: f64 = 26_600_000.0;

const ELEVATIONS_DEG: [f64; 4] = [15.0, 35.0, 55.0, 75.0];

/// Vertical random-walk standard deviation, meters per step.
const VERTICAL_STD: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct PseudorangeScenario<T> {
    /// Satellite positions in the local east-north-up frame, meters.
    pub satellites: Vec<[T; 3]>,
    /// Horizontal process-noise standard deviation.
    pub q: T,
    /// Per-satellite measurement noise.
    pub noise: SkewTParams<T>,
    /// Trajectory length.
    pub k: usize,
    pub bias_prior_std: T,
    /// Standard deviation of each prior position coordinate.
    pub position_prior_std: T,
}

impl<T: Scalar> PseudorangeScenario<T> {
    pub fn validate(&self) -> Result<()> {
        if self.satellites.len() < 4 {
            return Err(Error::Observability(format!(
                "need at least 4 satellites for position and clock bias, got {}",
                self.satellites.len()
            )));
        }
        if !(self.q >= T::zero() && num_traits::Float::is_finite(self.q)) {
            return Err(Error::Invalid("q must be finite and >= 0".into()));
        }
        if !(self.bias_prior_std > T::zero() && self.position_prior_std > T::zero()) {
            return Err(Error::Invalid("prior standard deviations must be > 0".into()));
        }
        self.noise.validate()
    }

    fn satellite(&self, i: usize) -> Vector3<T> {
        let s = self.satellites[i];
        Vector3::new(s[0], s[1], s[2])
    }
}

/// Eight satellites on a sphere of radius [`SATELLITE_RANGE`] around the
/// receiver: elevations 15°, 35°, 55°, 75° on one azimuth cross, repeated on
/// the opposite azimuths, all rotated by `azimuth_offset` radians.
pub fn synthetic_constellation<T: Scalar>(azimuth_offset: T) -> Vec<[T; 3]> {
    let offset = azimuth_offset.to_f64().unwrap_or(0.0);
    (0..8)
        .map(|i| {
            let el = ELEVATIONS_DEG[i % 4].to_radians();
            let az = (90.0 * (i % 4) as f64 + 180.0 * (i / 4) as f64).to_radians() + offset;
            [
                lit(SATELLITE_RANGE * el.cos() * az.sin()),
                lit(SATELLITE_RANGE * el.cos() * az.cos()),
                lit(SATELLITE_RANGE * el.sin()),
            ]
        })
        .collect()
}

/// Jacobian of `‖s_i - p‖ + b` with respect to `[p, b]` at `p = point`:
/// row `i` is `[-u_iᵀ, 1]` with `u_i` the unit vector from receiver to satellite.
pub fn pseudorange_rows<T: Scalar>(
    scenario: &PseudorangeScenario<T>,
    point: &Vector3<T>,
) -> Result<DMatrix<T>> {
    let n = scenario.satellites.len();
    let mut c = DMatrix::zeros(n, 4);
    for i in 0..n {
        let los = scenario.satellite(i) - point;
        let range = los.norm();
        if range.is_nan() || range <= T::zero() {
            return Err(Error::DegenerateGeometry { satellite: i });
        }
        let u = los / range;
        for j in 0..3 {
            c[(i, j)] = -u[j];
        }
        c[(i, 3)] = T::one();
    }
    Ok(c)
}

fn prior_position<T: Scalar>() -> Vector3<T> {
    Vector3::zeros()
}

/// Linear 4-state model: `A = I`, `Q = diag(q², q², 0.5², 0)`, `C` from the
/// satellite geometry at the prior mean.
pub fn build_pseudorange_model<T: Scalar>(scenario: &PseudorangeScenario<T>) -> Result<StateSpaceModel<T>> {
    scenario.validate()?;
    let n = scenario.satellites.len();
    let q2 = scenario.q * scenario.q;
    let p2 = scenario.position_prior_std * scenario.position_prior_std;
    let b2 = scenario.bias_prior_std * scenario.bias_prior_std;
    let c = pseudorange_rows(scenario, &prior_position())?;
    let model = StateSpaceModel {
        a: DMatrix::identity(4, 4),
        c,
        q: DMatrix::from_diagonal(&DVector::from_vec(vec![q2, q2, lit(VERTICAL_STD * VERTICAL_STD), T::zero()])),
        r: DVector::from_element(n, scenario.noise.sigma2),
        delta: DVector::from_element(n, scenario.noise.delta),
        nu: DVector::from_element(n, scenario.noise.nu),
        x0: DVector::zeros(4),
        p0: DMatrix::from_diagonal(&DVector::from_vec(vec![p2, p2, p2, b2])),
    };
    model.validate()?;
    Ok(model)
}

/// Simulates exact (nonlinear) pseudoranges and returns them in linearized
/// form `y - h(x̂) + C x̂`, so that `y ≈ C x + e` with `x̂` the prior mean.
///
/// `noise(i, rng)` draws the error of satellite `i`.
pub fn simulate_pseudorange<T, R, F>(
    scenario: &PseudorangeScenario<T>,
    model: &StateSpaceModel<T>,
    rng: &mut R,
    noise: F,
) -> Result<Trajectory<T>>
where
    T: Scalar,
    R: Rng + ?Sized,
    F: FnMut(usize, &mut R) -> T,
{
    let mut traj = simulate_with(model, scenario.k, rng, noise)?;
    let x_hat = &model.x0;
    let p_hat = Vector3::new(x_hat[0], x_hat[1], x_hat[2]);
    let c_x_hat = &model.c * x_hat;
    for (x, y) in traj.states.iter().zip(traj.measurements.iter_mut()) {
        // replace the linear C x part that simulate_with added by the exact ranges
        let linear = &model.c * x;
        let p = Vector3::new(x[0], x[1], x[2]);
        for i in 0..y.len() {
            let s = scenario.satellite(i);
            let exact = (s - p).norm() + x[3];
            let h_hat = (s - p_hat).norm() + x_hat[3];
            y[i] = y[i] - linear[i] + exact - h_hat + c_x_hat[i];
        }
    }
    Ok(traj)
}
