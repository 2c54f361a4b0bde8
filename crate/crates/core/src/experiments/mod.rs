//! Monte Carlo studies: 1-D positioning, pseudorange positioning, the
//! VB-iteration / particle-count convergence study and the empirical-noise
//! robustness study, plus the error metrics they report.
//!
//! Replication `r` draws everything from `SeedStream::new(seed).fork(r)`, so
//! results do not depend on how rayon schedules the replications. Within a
//! replication every algorithm sees the same trajectory.

mod config;
mod histogram;
mod metrics;

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{Algorithm, ExperimentConfig, ExperimentKind};
pub use histogram::{Bin, Histogram};
pub use metrics::{
    error_stats, mean, median, percent_differences, quantile_sorted, ErrorStats, QuantileSummary,
};

use crate::distributions::{sample_skew_t, SkewTParams};
use crate::error::{Error, Result};
use crate::filters::{
    kf_predict, stvbf_step, GatedKalman, GaussianBelief, MomentNoise, ParticleFilter, StudentTNoise, VbConfig,
};
use crate::smoothers::{kalman_forward, kf_rtss, prior, rtss_g, stvbs, tvbs};
use crate::statespace::{
    build_pseudorange_model, simulate, simulate_pseudorange, synthetic_constellation, PseudorangeScenario,
    StateSpaceModel, Trajectory,
};
use crate::SeedStream;

/// Runs `f` for replications `0..n` in parallel and returns the results in
/// replication order. The first failing replication (by index) is reported.
pub fn replicate<T, F>(seed: u64, n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &SeedStream) -> Result<T> + Sync,
{
    let master = SeedStream::new(seed);
    let results: Vec<Result<T>> = (0..n)
        .into_par_iter()
        .map(|r| {
            let stream = master.fork(r as u64);
            f(r, &stream).map_err(|e| Error::Replication {
                index: r,
                seed: stream.key(),
                source: Box::new(e),
            })
        })
        .collect();
    results.into_iter().collect()
}

/// Point estimates `x̂_k` of one algorithm on one measurement sequence:
/// filtered means for filters, smoothed means for smoothers.
pub fn run_estimator(
    algorithm: Algorithm,
    model: &StateSpaceModel<f64>,
    ys: &[DVector<f64>],
    cfg: &ExperimentConfig,
    stream: &SeedStream,
) -> Result<Vec<DVector<f64>>> {
    let means = |bs: Vec<GaussianBelief<f64>>| bs.into_iter().map(|b| b.mean).collect();
    match algorithm {
        Algorithm::Kf => {
            let noise = MomentNoise::from_model(model)?;
            let pass = kalman_forward(model, ys, |_| (noise.mean.clone(), noise.var.clone()))?;
            Ok(means(pass.filtered))
        }
        Algorithm::KfG => {
            let noise = MomentNoise::from_model(model)?;
            let gate = GatedKalman::new(cfg.gate_p)?;
            filter_loop(model, ys, |pred, y| Ok(gate.update(pred, y, &model.c, &noise)?.0))
        }
        Algorithm::Stvbf => filter_loop(model, ys, |pred, y| Ok(stvbf_step(model, pred, y, &cfg.stvbf)?.0)),
        Algorithm::Tvbf => {
            let noise = StudentTNoise::matching_moments(model)?;
            filter_loop(model, ys, |pred, y| Ok(noise.step(&model.c, pred, y, &cfg.tvbf)?.0))
        }
        Algorithm::Pf => run_particle_filter(model, ys, cfg.particles, &mut stream.fork_named("pf").rng()),
        Algorithm::Stvbs => Ok(means(stvbs(model, ys, &cfg.stvbs)?.smoothed)),
        Algorithm::Tvbs => Ok(means(tvbs(model, ys, &cfg.tvbs)?.smoothed)),
        Algorithm::RtssG => Ok(means(rtss_g(model, ys, cfg.gate_p)?)),
        Algorithm::Rtss => {
            let noise = MomentNoise::from_model(model)?;
            Ok(means(kf_rtss(model, ys, &noise.mean, &noise.var)?))
        }
    }
}

fn filter_loop<F>(model: &StateSpaceModel<f64>, ys: &[DVector<f64>], mut update: F) -> Result<Vec<DVector<f64>>>
where
    F: FnMut(&GaussianBelief<f64>, &DVector<f64>) -> Result<GaussianBelief<f64>>,
{
    model.validate()?;
    let mut out = Vec::with_capacity(ys.len());
    let mut belief = prior(model);
    for (k, y) in ys.iter().enumerate() {
        let predicted = if k == 0 { belief } else { kf_predict(model, &belief) };
        belief = update(&predicted, y)?;
        out.push(belief.mean.clone());
    }
    Ok(out)
}

/// Bootstrap particle filter point estimates; the first measurement updates
/// the prior sample directly.
pub fn run_particle_filter(
    model: &StateSpaceModel<f64>,
    ys: &[DVector<f64>],
    particles: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<DVector<f64>>> {
    let pf = ParticleFilter::new(model)?;
    let mut ps = pf.initialize(particles, rng)?;
    ys.iter()
        .enumerate()
        .map(|(k, y)| if k == 0 { pf.update(&mut ps, y, rng) } else { pf.step(&mut ps, y, rng) })
        .collect()
}

/// `√(mean_k Σ_j e_{k,j}²)` over the first `components` state coordinates.
pub fn trajectory_rmse(estimates: &[DVector<f64>], states: &[DVector<f64>], components: usize) -> f64 {
    let total: f64 = estimates
        .iter()
        .zip(states)
        .map(|(e, x)| (0..components).map(|j| (e[j] - x[j]).powi(2)).sum::<f64>())
        .sum();
    (total / estimates.len() as f64).sqrt()
}

/// Scalar random walk `x_{k+1} = x_k + w_k` observed by `sensors` identical
/// skew-t sensors.
pub fn positioning_1d_model(cfg: &ExperimentConfig) -> StateSpaceModel<f64> {
    let n = cfg.sensors;
    StateSpaceModel {
        a: DMatrix::identity(1, 1),
        c: DMatrix::from_element(n, 1, 1.0),
        q: DMatrix::from_element(1, 1, cfg.q * cfg.q),
        r: DVector::from_element(n, cfg.sigma2),
        delta: DVector::from_element(n, cfg.delta),
        nu: DVector::from_element(n, cfg.nu),
        x0: DVector::zeros(1),
        p0: DMatrix::from_element(1, 1, cfg.position_prior_std.powi(2)),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmStats {
    pub algorithm: Algorithm,
    pub stats: ErrorStats,
}

/// 1-D positioning study: error statistics of `x̂_{k|k} - x_k` pooled over
/// all replications and steps, one entry per configured algorithm.
pub fn run_1d_positioning(cfg: &ExperimentConfig) -> Result<Vec<AlgorithmStats>> {
    cfg.validate()?;
    let model = positioning_1d_model(cfg);
    model.validate()?;
    let per_rep = replicate(cfg.seed, cfg.n_mc, |_, stream| {
        let traj = simulate(&model, cfg.k, &mut stream.fork_named("trajectory").rng())?;
        cfg.algorithms
            .iter()
            .map(|&alg| {
                let est = run_estimator(alg, &model, &traj.measurements, cfg, stream)?;
                Ok(est.iter().zip(&traj.states).map(|(e, x)| e[0] - x[0]).collect::<Vec<f64>>())
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(cfg
        .algorithms
        .iter()
        .enumerate()
        .map(|(a, &algorithm)| {
            let pooled: Vec<f64> = per_rep.iter().flat_map(|rep| rep[a].iter().copied()).collect();
            AlgorithmStats {
                algorithm,
                stats: error_stats(&pooled),
            }
        })
        .collect())
}

/// Pseudorange scenario of one replication: the synthetic constellation
/// rotated by a random azimuth drawn from the replication stream.
pub fn pseudorange_scenario(cfg: &ExperimentConfig, stream: &SeedStream) -> Result<PseudorangeScenario<f64>> {
    let rotation = stream.fork_named("geometry").rng().gen::<f64>() * std::f64::consts::TAU;
    let scenario = PseudorangeScenario {
        satellites: synthetic_constellation(rotation),
        q: cfg.q,
        noise: SkewTParams::new(0.0, cfg.sigma2, cfg.delta, cfg.nu)?,
        k: cfg.k,
        bias_prior_std: cfg.bias_prior_std,
        position_prior_std: cfg.position_prior_std,
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Model and simulated trajectory of one pseudorange replication, with
/// measurement errors drawn by `noise(satellite, rng)`.
pub fn pseudorange_replication<F>(
    cfg: &ExperimentConfig,
    stream: &SeedStream,
    noise: F,
) -> Result<(StateSpaceModel<f64>, Trajectory<f64>)>
where
    F: FnMut(usize, &mut ChaCha8Rng) -> f64,
{
    let scenario = pseudorange_scenario(cfg, stream)?;
    let model = build_pseudorange_model(&scenario)?;
    let traj = simulate_pseudorange(&scenario, &model, &mut stream.fork_named("trajectory").rng(), noise)?;
    Ok((model, traj))
}

fn skew_t_noise(cfg: &ExperimentConfig) -> Result<impl Fn(usize, &mut ChaCha8Rng) -> f64> {
    let p = SkewTParams::new(0.0, cfg.sigma2, cfg.delta, cfg.nu)?;
    Ok(move |_: usize, rng: &mut ChaCha8Rng| p.draw(rng))
}

/// Per-replication position RMSEs of the pseudorange study and the
/// percentage differences against the reference algorithm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PseudorangeResult {
    pub algorithms: Vec<Algorithm>,
    pub reference: Algorithm,
    /// `rmse[a][r]`: algorithm `a`, replication `r`.
    pub rmse: Vec<Vec<f64>>,
    /// Quantiles of `100·(RMSE_a - RMSE_ref)/RMSE_ref` for every non-reference
    /// algorithm.
    pub differences: Vec<(Algorithm, QuantileSummary)>,
}

impl PseudorangeResult {
    pub fn rmse_of(&self, algorithm: Algorithm) -> Option<&[f64]> {
        let i = self.algorithms.iter().position(|&a| a == algorithm)?;
        Some(&self.rmse[i])
    }

    pub fn difference_of(&self, algorithm: Algorithm) -> Option<&QuantileSummary> {
        self.differences.iter().find(|(a, _)| *a == algorithm).map(|(_, q)| q)
    }
}

/// Pseudorange positioning study with skew-t measurement noise.
pub fn run_pseudorange(cfg: &ExperimentConfig) -> Result<PseudorangeResult> {
    cfg.validate()?;
    let draw = skew_t_noise(cfg)?;
    let per_rep = replicate(cfg.seed, cfg.n_mc, |_, stream| {
        let (model, traj) = pseudorange_replication(cfg, stream, &draw)?;
        cfg.algorithms
            .iter()
            .map(|&alg| {
                let est = run_estimator(alg, &model, &traj.measurements, cfg, stream)?;
                Ok(trajectory_rmse(&est, &traj.states, 3))
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    let rmse: Vec<Vec<f64>> = (0..cfg.algorithms.len())
        .map(|a| per_rep.iter().map(|rep| rep[a]).collect())
        .collect();
    let reference = cfg.effective_reference();
    let ref_idx = cfg.algorithms.iter().position(|&a| a == reference).expect("reference present");
    let differences = cfg
        .algorithms
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != ref_idx)
        .map(|(i, &a)| (a, QuantileSummary::from_values(&percent_differences(&rmse[i], &rmse[ref_idx]))))
        .collect();
    Ok(PseudorangeResult {
        algorithms: cfg.algorithms.clone(),
        reference,
        rmse,
        differences,
    })
}

/// One row of the convergence table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub delta: f64,
    pub algorithm: Algorithm,
    /// VB iterations for the VB filters, particle count for the PF.
    pub setting: usize,
    pub replications: usize,
    pub mean_rmse: f64,
    pub median_rmse: f64,
    /// Summed per-replication compute time, seconds.
    pub time_s: f64,
}

/// STVBF at every iteration count of `iteration_grid`, TVBF at its
/// configured iterations, and the PF at every particle count of
/// `particle_grid` (on the first `n_mc_pf` replications), for every shape
/// value in `cfg.deltas`. All settings share each replication's trajectory.
pub fn run_convergence_study(
    cfg: &ExperimentConfig,
    iteration_grid: &[usize],
    particle_grid: &[usize],
) -> Result<Vec<ConvergenceRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &delta in &cfg.deltas {
        let mut c = cfg.clone();
        c.delta = delta;
        let draw = skew_t_noise(&c)?;
        let n_pf = c.n_mc_pf.min(c.n_mc);
        // per replication: (rmse, seconds) for every setting, PF entries only
        // on the first n_pf replications
        let per_rep = replicate(c.seed, c.n_mc, |r, stream| {
            let (model, traj) = pseudorange_replication(&c, stream, &draw)?;
            let ys = &traj.measurements;
            let timed = |f: &mut dyn FnMut() -> Result<Vec<DVector<f64>>>| -> Result<(f64, f64)> {
                let start = Instant::now();
                let est = f()?;
                Ok((trajectory_rmse(&est, &traj.states, 3), start.elapsed().as_secs_f64()))
            };
            let mut out = Vec::new();
            for &n in iteration_grid {
                let cfg_n = VbConfig::fixed(n);
                out.push(timed(&mut || filter_loop(&model, ys, |p, y| Ok(stvbf_step(&model, p, y, &cfg_n)?.0)))?);
            }
            out.push(timed(&mut || run_estimator(Algorithm::Tvbf, &model, ys, &c, stream))?);
            if r < n_pf {
                for &n in particle_grid {
                    let mut rng = stream.fork_named("pf").fork(n as u64).rng();
                    out.push(timed(&mut || run_particle_filter(&model, ys, n, &mut rng))?);
                }
            }
            Ok(out)
        })?;
        let mut settings: Vec<(Algorithm, usize)> = iteration_grid.iter().map(|&n| (Algorithm::Stvbf, n)).collect();
        settings.push((Algorithm::Tvbf, c.tvbf.max_iters));
        settings.extend(particle_grid.iter().map(|&n| (Algorithm::Pf, n)));
        for (s, &(algorithm, setting)) in settings.iter().enumerate() {
            let vals: Vec<(f64, f64)> = per_rep.iter().filter_map(|rep| rep.get(s).copied()).collect();
            if vals.is_empty() {
                continue;
            }
            let rmse: Vec<f64> = vals.iter().map(|v| v.0).collect();
            rows.push(ConvergenceRow {
                delta,
                algorithm,
                setting,
                replications: rmse.len(),
                mean_rmse: mean(&rmse),
                median_rmse: median(&rmse),
                time_s: vals.iter().map(|v| v.1).sum(),
            });
        }
    }
    Ok(rows)
}

/// Outcome of the empirical-noise study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalNoiseResult {
    /// Fraction of replications where STVBF has the lower RMSE.
    pub win_rate: f64,
    pub rmse_stvbf: Vec<f64>,
    pub rmse_tvbf: Vec<f64>,
    /// `100·(RMSE_TVBF - RMSE_STVBF)/RMSE_STVBF` per replication.
    pub difference_percent: Vec<f64>,
}

/// Histogram of `cfg.histogram_samples` skew-t draws with the configured
/// noise parameters, used when no measured histogram is supplied.
pub fn synthetic_histogram(cfg: &ExperimentConfig) -> Result<Histogram> {
    let p = SkewTParams::new(0.0, cfg.sigma2, cfg.delta, cfg.nu)?;
    let mut rng = SeedStream::new(cfg.seed).fork_named("histogram").rng();
    let draws = sample_skew_t(&p, cfg.histogram_samples, &mut rng)?;
    Histogram::from_samples(&draws, cfg.histogram_bins)
}

/// Pseudorange study with measurement errors drawn from `histogram`; both
/// filters still assume skew-t (resp. moment-matched Student-t) noise with
/// the configured parameters.
pub fn run_empirical_noise(cfg: &ExperimentConfig, histogram: &Histogram) -> Result<EmpiricalNoiseResult> {
    cfg.validate()?;
    let per_rep = replicate(cfg.seed, cfg.n_mc, |_, stream| {
        let (model, traj) = pseudorange_replication(cfg, stream, |_, rng| histogram.sample(rng))?;
        let mut rmse = [0.0; 2];
        for (slot, alg) in rmse.iter_mut().zip([Algorithm::Stvbf, Algorithm::Tvbf]) {
            let est = run_estimator(alg, &model, &traj.measurements, cfg, stream)?;
            *slot = trajectory_rmse(&est, &traj.states, 3);
        }
        Ok(rmse)
    })?;
    let rmse_stvbf: Vec<f64> = per_rep.iter().map(|r| r[0]).collect();
    let rmse_tvbf: Vec<f64> = per_rep.iter().map(|r| r[1]).collect();
    let wins = rmse_stvbf.iter().zip(&rmse_tvbf).filter(|(s, t)| s < t).count();
    Ok(EmpiricalNoiseResult {
        win_rate: wins as f64 / per_rep.len() as f64,
        difference_percent: percent_differences(&rmse_tvbf, &rmse_stvbf),
        rmse_stvbf,
        rmse_tvbf,
    })
}

/// Replication-0 trajectory of the pseudorange scenario, for export.
pub fn simulate_pseudorange_trajectory(
    cfg: &ExperimentConfig,
) -> Result<(StateSpaceModel<f64>, Trajectory<f64>)> {
    cfg.validate()?;
    let draw = skew_t_noise(cfg)?;
    pseudorange_replication(cfg, &SeedStream::new(cfg.seed).fork(0), draw)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: ExperimentKind) -> ExperimentConfig {
        let mut c = ExperimentConfig::defaults(kind, 5);
        c.n_mc = 8;
        c.k = 30;
        c
    }

    #[test]
    fn replication_failure_reports_index() {
        let err = replicate(1, 5, |r, _| if r == 3 { Err(Error::Degeneracy) } else { Ok(r) }).unwrap_err();
        assert!(matches!(err, Error::Replication { index: 3, .. }));
        assert!(err.to_string().contains("replication 3"));
    }

    #[test]
    fn replications_are_order_independent() {
        let a = replicate(9, 16, |_, s| Ok(s.rng().gen::<u64>())).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| replicate(9, 16, |_, s| Ok(s.rng().gen::<u64>()))).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn positioning_1d_is_deterministic() {
        let c = small(ExperimentKind::Positioning1d);
        let a = run_1d_positioning(&c).unwrap();
        assert_eq!(a, run_1d_positioning(&c).unwrap());
        assert_eq!(a.len(), 4);
        assert!(a.iter().all(|s| s.stats.rmse.is_finite()));
    }

    #[test]
    fn pseudorange_pairs_and_reference() {
        let mut c = small(ExperimentKind::Pseudorange);
        c.algorithms = vec![Algorithm::Kf, Algorithm::Stvbf];
        let r = run_pseudorange(&c).unwrap();
        assert_eq!(r.reference, Algorithm::Stvbf);
        assert_eq!(r.differences.len(), 1);
        assert_eq!(r.rmse_of(Algorithm::Kf).unwrap().len(), 8);
        assert_eq!(r, run_pseudorange(&c).unwrap());
    }

    #[test]
    fn every_algorithm_runs() {
        let mut c = small(ExperimentKind::Pseudorange);
        c.n_mc = 2;
        c.particles = 200;
        c.algorithms = Algorithm::ALL.to_vec();
        let r = run_pseudorange(&c).unwrap();
        assert!(r.rmse.iter().flatten().all(|v| v.is_finite() && *v > 0.0));
    }

    #[test]
    fn convergence_table_shape() {
        let mut c = small(ExperimentKind::Convergence);
        c.n_mc = 3;
        c.n_mc_pf = 1;
        let rows = run_convergence_study(&c, &[1, 3], &[50]).unwrap();
        assert_eq!(rows.len(), 2 * 4);
        assert!(rows.iter().filter(|r| r.algorithm == Algorithm::Pf).all(|r| r.replications == 1));
    }

    #[test]
    fn empirical_noise_runs() {
        let mut c = small(ExperimentKind::EmpiricalNoise);
        c.histogram_samples = 10_000;
        c.histogram_bins = 200;
        let h = synthetic_histogram(&c).unwrap();
        let r = run_empirical_noise(&c, &h).unwrap();
        assert!((0.0..=1.0).contains(&r.win_rate));
        assert_eq!(r.difference_percent.len(), 8);
    }

    #[test]
    fn noiseless_histogram_stays_finite_and_beats_skew_noise() {
        let mut c = small(ExperimentKind::EmpiricalNoise);
        c.n_mc = 20;
        c.histogram_samples = 10_000;
        c.histogram_bins = 200;
        let skewed = run_empirical_noise(&c, &synthetic_histogram(&c).unwrap()).unwrap();
        let zero = Histogram::new(vec![Bin { left: 0.0, right: 0.0, count: 1.0 }]).unwrap();
        let clean = run_empirical_noise(&c, &zero).unwrap();
        for (clean, skewed) in [(&clean.rmse_stvbf, &skewed.rmse_stvbf), (&clean.rmse_tvbf, &skewed.rmse_tvbf)] {
            assert!(clean.iter().all(|v| v.is_finite()));
            assert!(mean(clean) < mean(skewed));
        }
    }

    #[test]
    fn near_gaussian_noise_equalizes_1d_filters() {
        let mut c = small(ExperimentKind::Positioning1d);
        c.n_mc = 50;
        c.delta = 0.0;
        c.nu = 1e6;
        let stats = run_1d_positioning(&c).unwrap();
        let kf = stats.iter().find(|s| s.algorithm == Algorithm::Kf).unwrap().stats.rmse;
        for s in &stats {
            // the gate still drops about 1% of Gaussian innovations
            let tol = if s.algorithm == Algorithm::KfG { 0.1 } else { 0.02 };
            assert!((s.stats.rmse / kf - 1.0).abs() < tol, "{} {}", s.algorithm, s.stats.rmse);
        }
    }
}
