//! Linear-Gaussian dynamics with independent skew-t measurement noise.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::distributions::SkewTParams;
use crate::error::{Error, Result};
use crate::linalg::{is_symmetric, min_eigenvalue, psd_sqrt};
use crate::{lit, Scalar};

mod pseudorange;

pub use pseudorange::{
    build_pseudorange_model, pseudorange_rows, simulate_pseudorange, synthetic_constellation,
    PseudorangeScenario, SATELLITE_RANGE,
};

/// `x_{k+1} = A x_k + w_k`, `y_k = C x_k + e_k` with `w_k ~ N(0, Q)`,
/// `[e_k]_i ~ ST(0, R_ii, Δ_ii, ν_i)` and `x_1 ~ N(x0, P0)`.
///
/// `r`, `delta` and `nu` hold the diagonals of `R`, `Δ` and the per-component
/// degrees of freedom.
#[derive(Clone, Debug, PartialEq)]
pub struct StateSpaceModel<T: Scalar> {
    pub a: DMatrix<T>,
    pub c: DMatrix<T>,
    pub q: DMatrix<T>,
    pub r: DVector<T>,
    pub delta: DVector<T>,
    pub nu: DVector<T>,
    pub x0: DVector<T>,
    pub p0: DMatrix<T>,
}

impl<T: Scalar> StateSpaceModel<T> {
    pub fn nx(&self) -> usize {
        self.a.nrows()
    }

    pub fn ny(&self) -> usize {
        self.c.nrows()
    }

    /// Checks dimensions, symmetry and definiteness.
    ///
    /// `P0` only has to be positive semidefinite here so that degenerate priors
    /// can be simulated; the filters need it positive definite and report a
    /// numerical error otherwise.
    pub fn validate(&self) -> Result<()> {
        let nx = self.nx();
        let ny = self.ny();
        let bad = |msg: String| Err(Error::InvalidModel(msg));
        if nx == 0 || !self.a.is_square() {
            return bad(format!("A must be square and non-empty, got {}x{}", self.a.nrows(), self.a.ncols()));
        }
        if self.c.ncols() != nx {
            return bad(format!("C has {} columns, expected {nx}", self.c.ncols()));
        }
        if self.q.shape() != (nx, nx) || self.p0.shape() != (nx, nx) {
            return bad(format!("Q and P0 must be {nx}x{nx}"));
        }
        if self.x0.len() != nx {
            return bad(format!("x0 has length {}, expected {nx}", self.x0.len()));
        }
        if self.r.len() != ny || self.delta.len() != ny || self.nu.len() != ny {
            return bad(format!("R, Delta and nu must have length {ny}"));
        }
        let finite = |s: &[T]| s.iter().all(|v| num_traits::Float::is_finite(*v));
        if !(finite(self.a.as_slice())
            && finite(self.c.as_slice())
            && finite(self.q.as_slice())
            && finite(self.p0.as_slice())
            && finite(self.x0.as_slice())
            && finite(self.delta.as_slice()))
        {
            return bad("model contains non-finite entries".into());
        }
        if self.r.iter().any(|&v| !(num_traits::Float::is_finite(v) && v > T::zero())) {
            return bad("R diagonal must be finite and > 0".into());
        }
        if self.nu.iter().any(|&v| !(num_traits::Float::is_finite(v) && v > T::zero())) {
            return bad("nu must be finite and > 0".into());
        }
        let tol = lit::<T>(1e-9);
        for (name, m) in [("Q", &self.q), ("P0", &self.p0)] {
            if !is_symmetric(m, tol) {
                return bad(format!("{name} must be symmetric"));
            }
            let scale = T::one() + m.iter().fold(T::zero(), |a, &b| num_traits::Float::max(a, num_traits::Float::abs(b)));
            if min_eigenvalue(m) < -tol * scale {
                return bad(format!("{name} must be positive semidefinite"));
            }
        }
        Ok(())
    }

    /// Noise parameters of measurement component `i`.
    pub fn noise_params(&self, i: usize) -> SkewTParams<T> {
        SkewTParams {
            mu: T::zero(),
            sigma2: self.r[i],
            delta: self.delta[i],
            nu: self.nu[i],
        }
    }
}

/// States `x_{1:K}` and measurements `y_{1:K}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T: Scalar> {
    pub states: Vec<DVector<T>>,
    pub measurements: Vec<DVector<T>>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

pub(crate) fn standard_normal_vector<T: Scalar, R: Rng + ?Sized>(n: usize, rng: &mut R) -> DVector<T> {
    DVector::from_fn(n, |_, _| lit::<T>(rng.sample::<f64, _>(StandardNormal)))
}

/// Draws a trajectory of length `k` from the model.
pub fn simulate<T: Scalar, R: Rng + ?Sized>(
    model: &StateSpaceModel<T>,
    k: usize,
    rng: &mut R,
) -> Result<Trajectory<T>> {
    model.validate()?;
    let noise: Vec<_> = (0..model.ny()).map(|i| model.noise_params(i)).collect();
    simulate_with(model, k, rng, |i, rng| noise[i].draw(rng))
}

/// Like [`simulate`] but with measurement noise component `i` drawn by
/// `noise(i, rng)`.
pub fn simulate_with<T, R, F>(
    model: &StateSpaceModel<T>,
    k: usize,
    rng: &mut R,
    mut noise: F,
) -> Result<Trajectory<T>>
where
    T: Scalar,
    R: Rng + ?Sized,
    F: FnMut(usize, &mut R) -> T,
{
    model.validate()?;
    let nx = model.nx();
    let ny = model.ny();
    let p0_sqrt = psd_sqrt(&model.p0);
    let q_sqrt = psd_sqrt(&model.q);
    let mut states = Vec::with_capacity(k);
    let mut measurements = Vec::with_capacity(k);
    let mut x = &model.x0 + &p0_sqrt * standard_normal_vector::<T, R>(nx, rng);
    for step in 0..k {
        if step > 0 {
            x = &model.a * &x + &q_sqrt * standard_normal_vector::<T, R>(nx, rng);
        }
        let e = DVector::from_fn(ny, |i, _| noise(i, rng));
        measurements.push(&model.c * &x + e);
        states.push(x.clone());
    }
    Ok(Trajectory {
        states,
        measurements,
    })
}
