//! Bootstrap particle filter: dynamics as proposal, log-domain weights,
//! systematic resampling after every measurement.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::distributions::SkewTLogDensity;
use crate::error::{Error, Result};
use crate::linalg::psd_sqrt;
use crate::statespace::{standard_normal_vector, StateSpaceModel};
use crate::{lit, Scalar};

/// Weighted particle cloud. Column `j` of `particles` is particle `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParticleSet<T: Scalar> {
    pub particles: DMatrix<T>,
    pub log_weights: DVector<T>,
}

impl<T: Scalar> ParticleSet<T> {
    pub fn len(&self) -> usize {
        self.particles.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Normalized weights.
    pub fn weights(&self) -> DVector<T> {
        let max = self
            .log_weights
            .iter()
            .copied()
            .fold(T::neg_infinity(), |a, b| num_traits::Float::max(a, b));
        let w = self.log_weights.map(|lw| num_traits::Float::exp(lw - max));
        let total = w.sum();
        w / total
    }

    pub fn weighted_mean(&self) -> DVector<T> {
        &self.particles * self.weights()
    }
}

/// Bootstrap filter for a fixed model, with the process-noise square root
/// and noise densities precomputed.
#[derive(Clone, Debug)]
pub struct ParticleFilter<'a, T: Scalar> {
    model: &'a StateSpaceModel<T>,
    q_sqrt: DMatrix<T>,
    noise: Vec<SkewTLogDensity<T>>,
}

impl<'a, T: Scalar> ParticleFilter<'a, T> {
    pub fn new(model: &'a StateSpaceModel<T>) -> Result<Self> {
        model.validate()?;
        let noise = (0..model.ny())
            .map(|i| model.noise_params(i).log_density())
            .collect::<Result<_>>()?;
        Ok(Self {
            model,
            q_sqrt: psd_sqrt(&model.q),
            noise,
        })
    }

    /// `n` equally weighted draws from the prior `N(x0, P0)`.
    pub fn initialize<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<ParticleSet<T>> {
        if n == 0 {
            return Err(Error::Invalid("particle count must be >= 1".into()));
        }
        let nx = self.model.nx();
        let p0_sqrt = psd_sqrt(&self.model.p0);
        let mut particles = DMatrix::zeros(nx, n);
        for j in 0..n {
            let x = &self.model.x0 + &p0_sqrt * standard_normal_vector::<T, R>(nx, rng);
            particles.set_column(j, &x);
        }
        let lw = -num_traits::Float::ln(lit::<T>(n as f64));
        Ok(ParticleSet {
            particles,
            log_weights: DVector::from_element(n, lw),
        })
    }

    /// Moves every particle through `x ← A x + w`.
    pub fn propagate<R: Rng + ?Sized>(&self, ps: &mut ParticleSet<T>, rng: &mut R) {
        let nx = self.model.nx();
        let n = ps.len();
        let mut noise = DMatrix::zeros(nx, n);
        for j in 0..n {
            noise.set_column(j, &standard_normal_vector::<T, R>(nx, rng));
        }
        ps.particles = &self.model.a * &ps.particles + &self.q_sqrt * noise;
    }

    /// Reweights by the likelihood of `y`, returns the weighted mean and
    /// resamples systematically.
    pub fn update<R: Rng + ?Sized>(
        &self,
        ps: &mut ParticleSet<T>,
        y: &DVector<T>,
        rng: &mut R,
    ) -> Result<DVector<T>> {
        let predicted = &self.model.c * &ps.particles;
        for j in 0..ps.len() {
            let mut ll = T::zero();
            for (i, density) in self.noise.iter().enumerate() {
                ll += density.ln_pdf(y[i] - predicted[(i, j)]);
            }
            ps.log_weights[j] += ll;
        }
        if !ps
            .log_weights
            .iter()
            .any(|&lw| num_traits::Float::is_finite(lw))
        {
            return Err(Error::Degeneracy);
        }
        let estimate = ps.weighted_mean();
        systematic_resample(ps, rng);
        Ok(estimate)
    }

    /// Propagate then update.
    pub fn step<R: Rng + ?Sized>(
        &self,
        ps: &mut ParticleSet<T>,
        y: &DVector<T>,
        rng: &mut R,
    ) -> Result<DVector<T>> {
        self.propagate(ps, rng);
        self.update(ps, y, rng)
    }
}

fn systematic_resample<T: Scalar, R: Rng + ?Sized>(ps: &mut ParticleSet<T>, rng: &mut R) {
    let n = ps.len();
    let w = ps.weights();
    let step = T::one() / lit(n as f64);
    let mut u = lit::<T>(rng.gen::<f64>()) * step;
    let mut cumulative = w[0];
    let mut src = 0;
    let mut out = DMatrix::zeros(ps.particles.nrows(), n);
    for j in 0..n {
        while u > cumulative && src + 1 < n {
            src += 1;
            cumulative += w[src];
        }
        out.set_column(j, &ps.particles.column(src));
        u += step;
    }
    ps.particles = out;
    ps.log_weights.fill(-num_traits::Float::ln(lit::<T>(n as f64)));
}

/// One propagate/update cycle of the bootstrap filter. Builds the filter for
/// `model` on every call; loops should hold a [`ParticleFilter`] instead.
pub fn pf_step<T: Scalar, R: Rng + ?Sized>(
    model: &StateSpaceModel<T>,
    ps: &ParticleSet<T>,
    y: &DVector<T>,
    rng: &mut R,
) -> Result<(ParticleSet<T>, DVector<T>)> {
    let pf = ParticleFilter::new(model)?;
    let mut next = ps.clone();
    let estimate = pf.step(&mut next, y, rng)?;
    Ok((next, estimate))
}
