use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::VbConfig;

/// Which study a configuration describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Simulate,
    #[serde(rename = "positioning-1d")]
    Positioning1d,
    Pseudorange,
    Convergence,
    EmpiricalNoise,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::Simulate,
        ExperimentKind::Positioning1d,
        ExperimentKind::Pseudorange,
        ExperimentKind::Convergence,
        ExperimentKind::EmpiricalNoise,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Positioning1d => "positioning-1d",
            ExperimentKind::Pseudorange => "pseudorange",
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::EmpiricalNoise => "empirical-noise",
        }
    }

    /// Pseudorange-type studies use the satellite scenario.
    pub fn is_pseudorange(self) -> bool {
        !matches!(self, ExperimentKind::Positioning1d)
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|k| k.name()).collect();
            Error::Invalid(format!("unknown experiment {s:?}; valid: {}", names.join(", ")))
        })
    }
}

/// Estimators available to the studies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// Skew-t VB filter.
    Stvbf,
    /// Student-t VB filter.
    Tvbf,
    /// Kalman filter with χ² innovation gating.
    #[serde(rename = "kf-g")]
    KfG,
    /// Kalman filter with the exact noise mean and variance.
    Kf,
    /// Bootstrap particle filter.
    Pf,
    /// Skew-t VB smoother.
    Stvbs,
    /// Student-t VB smoother.
    Tvbs,
    /// RTS smoother over the gated Kalman filter.
    #[serde(rename = "rtss-g")]
    RtssG,
    /// RTS smoother over the plain Kalman filter.
    Rtss,
}

impl Algorithm {
    pub const ALL: [Algorithm; 9] = [
        Algorithm::Stvbf,
        Algorithm::Tvbf,
        Algorithm::KfG,
        Algorithm::Kf,
        Algorithm::Pf,
        Algorithm::Stvbs,
        Algorithm::Tvbs,
        Algorithm::RtssG,
        Algorithm::Rtss,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Stvbf => "stvbf",
            Algorithm::Tvbf => "tvbf",
            Algorithm::KfG => "kf-g",
            Algorithm::Kf => "kf",
            Algorithm::Pf => "pf",
            Algorithm::Stvbs => "stvbs",
            Algorithm::Tvbs => "tvbs",
            Algorithm::RtssG => "rtss-g",
            Algorithm::Rtss => "rtss",
        }
    }

    pub fn is_smoother(self) -> bool {
        matches!(self, Algorithm::Stvbs | Algorithm::Tvbs | Algorithm::RtssG | Algorithm::Rtss)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|a| a.name()).collect();
            Error::Invalid(format!("unknown algorithm {s:?}; valid: {}", names.join(", ")))
        })
    }
}

/// Fully resolved study configuration. [`ExperimentConfig::defaults`] gives
/// the values used when a key is not set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    /// Steps per trajectory.
    pub k: usize,
    /// Monte Carlo replications.
    pub n_mc: usize,
    /// Replications for the particle-filter part of the convergence study.
    pub n_mc_pf: usize,
    /// Process-noise standard deviation (horizontal, for pseudoranges).
    pub q: f64,
    pub delta: f64,
    pub nu: f64,
    pub sigma2: f64,
    /// Measurements per step in the 1-D study.
    pub sensors: usize,
    pub position_prior_std: f64,
    pub bias_prior_std: f64,
    pub algorithms: Vec<Algorithm>,
    /// Algorithm the percentage RMSE differences are taken against.
    pub reference: Algorithm,
    pub stvbf: VbConfig<f64>,
    pub tvbf: VbConfig<f64>,
    pub stvbs: VbConfig<f64>,
    pub tvbs: VbConfig<f64>,
    pub particles: usize,
    pub gate_p: f64,
    /// STVBF iteration counts of the convergence study.
    pub iteration_grid: Vec<usize>,
    /// Particle counts of the convergence study.
    pub particle_grid: Vec<usize>,
    /// Shape values swept by the convergence study.
    pub deltas: Vec<f64>,
    /// Draws and bins of the synthetic histogram used when no histogram file
    /// is given.
    pub histogram_samples: usize,
    pub histogram_bins: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub histogram: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

impl ExperimentConfig {
    pub fn defaults(experiment: ExperimentKind, seed: u64) -> Self {
        let one_d = experiment == ExperimentKind::Positioning1d;
        let algorithms = match experiment {
            ExperimentKind::Convergence => vec![Algorithm::Stvbf, Algorithm::Tvbf, Algorithm::Pf],
            ExperimentKind::EmpiricalNoise => vec![Algorithm::Stvbf, Algorithm::Tvbf],
            _ => vec![Algorithm::Stvbf, Algorithm::Tvbf, Algorithm::KfG, Algorithm::Kf],
        };
        Self {
            experiment,
            seed,
            k: 100,
            n_mc: match experiment {
                ExperimentKind::Positioning1d => 1000,
                ExperimentKind::EmpiricalNoise => 500,
                ExperimentKind::Simulate => 1,
                _ => 200,
            },
            n_mc_pf: if experiment == ExperimentKind::Convergence { 200 } else { 0 },
            q: if one_d { 1.0 } else { 10.0 },
            delta: 5.0,
            nu: 4.0,
            sigma2: 1.0,
            sensors: 3,
            position_prior_std: if one_d { 1.0 } else { 10.0 },
            bias_prior_std: 0.75,
            algorithms,
            reference: Algorithm::Stvbf,
            stvbf: if one_d { VbConfig::filter_default() } else { VbConfig::fixed(30) },
            tvbf: if one_d { VbConfig::filter_default() } else { VbConfig::fixed(10) },
            stvbs: VbConfig::fixed(30),
            tvbs: VbConfig::fixed(10),
            particles: 1000,
            gate_p: 0.99,
            iteration_grid: vec![1, 2, 5, 10, 20, 30],
            particle_grid: vec![100, 1000, 10000],
            deltas: vec![2.0, 5.0],
            histogram_samples: 100_000,
            histogram_bins: 2000,
            histogram: None,
            out: None,
        }
    }

    /// Checks every field; the message names the offending key.
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, what: &str| Err(Error::Invalid(format!("{key}: {what}")));
        if self.k == 0 {
            return bad("k", "must be >= 1");
        }
        if self.n_mc == 0 {
            return bad("n_mc", "must be >= 1");
        }
        if !(self.q.is_finite() && self.q >= 0.0) {
            return bad("q", "must be finite and >= 0");
        }
        if !self.delta.is_finite() {
            return bad("delta", "must be finite");
        }
        if !(self.nu.is_finite() && self.nu > 2.0) {
            return bad("nu", "must be finite and > 2 (the baselines need the noise variance)");
        }
        if !(self.sigma2.is_finite() && self.sigma2 > 0.0) {
            return bad("sigma2", "must be finite and > 0");
        }
        if self.sensors == 0 {
            return bad("sensors", "must be >= 1");
        }
        if !(self.position_prior_std.is_finite() && self.position_prior_std > 0.0) {
            return bad("position_prior_std", "must be finite and > 0");
        }
        if !(self.bias_prior_std.is_finite() && self.bias_prior_std > 0.0) {
            return bad("bias_prior_std", "must be finite and > 0");
        }
        if self.algorithms.is_empty() {
            return bad("algorithms", "must not be empty");
        }
        for (key, vb) in [("stvbf", &self.stvbf), ("tvbf", &self.tvbf), ("stvbs", &self.stvbs), ("tvbs", &self.tvbs)] {
            if vb.max_iters == 0 {
                return bad(key, "max_iters must be >= 1");
            }
            if !(vb.tol.is_finite() && vb.tol >= 0.0) {
                return bad(key, "tol must be finite and >= 0");
            }
        }
        if self.particles == 0 {
            return bad("particles", "must be >= 1");
        }
        if !(self.gate_p > 0.0 && self.gate_p < 1.0) {
            return bad("gate_p", "must lie in (0, 1)");
        }
        if self.iteration_grid.is_empty() || self.iteration_grid.contains(&0) {
            return bad("iteration_grid", "must be non-empty with entries >= 1");
        }
        if self.particle_grid.contains(&0) {
            return bad("particle_grid", "entries must be >= 1");
        }
        if self.deltas.is_empty() || self.deltas.iter().any(|d| !d.is_finite()) {
            return bad("deltas", "must be non-empty and finite");
        }
        if self.histogram_samples == 0 || self.histogram_bins == 0 {
            return bad("histogram_samples", "samples and bins must be >= 1");
        }
        Ok(())
    }

    /// The reference if it is among the algorithms, otherwise the first
    /// algorithm.
    pub fn effective_reference(&self) -> Algorithm {
        if self.algorithms.contains(&self.reference) {
            self.reference
        } else {
            self.algorithms[0]
        }
    }
}
