//! Command-line driver for the Monte Carlo studies in `skewt-core`.
//!
//! Every subcommand writes one results file (CSV or JSON) and a
//! `<results>.manifest.json` next to it holding the fully resolved config,
//! its digest, the seed and the tool version.
//!
//! CSV schemas (column order is fixed):
//! - `simulate`: `step, x0..x{n-1}, y0..y{m-1}`
//! - `positioning-1d`: `algorithm, rmse, mean, std, skewness`
//! - `pseudorange`: `algorithm, replication, rmse, diff_percent` where
//!   `diff_percent` is relative to the reference algorithm
//! - `convergence`: `delta, algorithm, setting, replications, mean_rmse,
//!   median_rmse, time_s`
//! - `empirical-noise`: `replication, rmse_stvbf, rmse_tvbf, diff_percent`

pub mod config;
pub mod output;

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Map, Value};
use skewt_core::experiments::{
    percent_differences, run_1d_positioning, run_convergence_study, run_empirical_noise, run_pseudorange,
    simulate_pseudorange_trajectory, synthetic_histogram, Bin, ExperimentConfig, ExperimentKind, Histogram,
};

use crate::output::{config_digest, fmt_f64, manifest_path, write_csv, write_json, Format, RunManifest, Table};

#[derive(Debug, Parser)]
#[command(name = "skewt-bench", version, about = "Skew-t VB filtering and smoothing benchmarks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write one simulated pseudorange trajectory and its measurements.
    Simulate(RunArgs),
    /// Scalar random walk seen by three skew-t sensors.
    #[command(name = "positioning-1d")]
    Positioning1d(RunArgs),
    /// Pseudorange positioning, per-replication RMSE of every algorithm.
    Pseudorange(RunArgs),
    /// RMSE against VB iterations and particle counts.
    Convergence(RunArgs),
    /// Pseudorange positioning with histogram-distributed errors.
    EmpiricalNoise(RunArgs),
}

impl Command {
    pub fn split(&self) -> (ExperimentKind, &RunArgs) {
        match self {
            Command::Simulate(a) => (ExperimentKind::Simulate, a),
            Command::Positioning1d(a) => (ExperimentKind::Positioning1d, a),
            Command::Pseudorange(a) => (ExperimentKind::Pseudorange, a),
            Command::Convergence(a) => (ExperimentKind::Convergence, a),
            Command::EmpiricalNoise(a) => (ExperimentKind::EmpiricalNoise, a),
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON config; keys mirror the experiment config fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Results file; defaults to `<experiment>.<format>`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Worker threads; defaults to the available cores.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub n_mc: Option<usize>,
    /// Convergence: STVBF iteration grid. Otherwise: one STVBF iteration cap.
    #[arg(long, value_delimiter = ',')]
    pub iters: Vec<usize>,
    /// Convergence: particle-count grid. Otherwise: one particle count.
    #[arg(long, value_delimiter = ',')]
    pub particles: Vec<usize>,
    /// Histogram CSV with header `bin_left,bin_right,count`.
    #[arg(long)]
    pub histogram: Option<PathBuf>,
}

/// Resolves the config of a run: defaults, then the config file, then flags.
pub fn resolve_config(kind: ExperimentKind, args: &RunArgs) -> Result<ExperimentConfig> {
    let mut user = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
            match serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))? {
                Value::Object(m) => m,
                _ => bail!("config {} must be a JSON object", path.display()),
            }
        }
        None => Map::new(),
    };
    let convergence = kind == ExperimentKind::Convergence;
    if let Some(seed) = args.seed {
        user.insert("seed".into(), json!(seed));
    }
    if let Some(q) = args.q {
        user.insert("q".into(), json!(q));
    }
    if let Some(delta) = args.delta {
        user.insert("delta".into(), json!(delta));
        if convergence {
            user.insert("deltas".into(), json!([delta]));
        }
    }
    if let Some(n) = args.n_mc {
        user.insert("n_mc".into(), json!(n));
    }
    if !args.iters.is_empty() {
        if convergence {
            user.insert("iteration_grid".into(), json!(args.iters));
        } else {
            let [n] = args.iters[..] else { bail!("--iters takes one value outside the convergence study") };
            user.insert("stvbf".into(), json!({ "max_iters": n }));
        }
    }
    if !args.particles.is_empty() {
        if convergence {
            user.insert("particle_grid".into(), json!(args.particles));
        } else {
            let [n] = args.particles[..] else { bail!("--particles takes one value outside the convergence study") };
            user.insert("particles".into(), json!(n));
        }
    }
    if let Some(h) = &args.histogram {
        user.insert("histogram".into(), json!(h));
    }
    if let Some(out) = &args.out {
        user.insert("out".into(), json!(out));
    }
    let in_file = args.config.as_ref().map(|p| format!(" (config {})", p.display())).unwrap_or_default();
    config::resolve(user, Some(kind)).with_context(|| format!("invalid configuration{in_file}"))
}

#[derive(Deserialize)]
struct BinRecord {
    bin_left: f64,
    bin_right: f64,
    count: f64,
}

pub fn read_histogram(path: &Path) -> Result<Histogram> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("opening histogram {}", path.display()))?;
    let bins = reader
        .deserialize::<BinRecord>()
        .map(|r| {
            r.map(|b| Bin {
                left: b.bin_left,
                right: b.bin_right,
                count: b.count,
            })
        })
        .collect::<Result<Vec<_>, _>>()
        .with_context(|| format!("reading histogram {}", path.display()))?;
    Histogram::new(bins).with_context(|| format!("histogram {}", path.display()))
}

/// Runs one subcommand and writes its results and manifest.
pub fn run(command: &Command) -> Result<RunManifest> {
    let (kind, args) = command.split();
    let cfg = resolve_config(kind, args)?;
    if let Some(n) = args.threads {
        if n == 0 {
            bail!("--threads must be >= 1");
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let out = cfg
        .out
        .as_ref()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(format!("{}.{}", kind.name(), args.format.extension())));
    let start = Instant::now();
    let summary = execute(&cfg, &out, args.format)?;
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        experiment: kind.name().to_string(),
        seed: cfg.seed,
        config_digest: config_digest(&cfg),
        config: cfg,
        format: args.format,
        threads: rayon::current_num_threads(),
        outputs: vec![out.clone()],
        wall_time_s: start.elapsed().as_secs_f64(),
        summary,
    };
    write_json(&manifest_path(&out), &manifest)?;
    Ok(manifest)
}

fn write(out: &Path, format: Format, table: Table, json: Value) -> Result<()> {
    match format {
        Format::Csv => write_csv(out, &table),
        Format::Json => write_json(out, &json),
    }
}

fn execute(cfg: &ExperimentConfig, out: &Path, format: Format) -> Result<Value> {
    match cfg.experiment {
        ExperimentKind::Simulate => {
            let (model, traj) = simulate_pseudorange_trajectory(cfg)?;
            let (nx, ny) = (model.nx(), model.ny());
            let mut header = vec!["step".to_string()];
            header.extend((0..nx).map(|i| format!("x{i}")));
            header.extend((0..ny).map(|i| format!("y{i}")));
            let mut table = Table::new(header);
            for (k, (x, y)) in traj.states.iter().zip(&traj.measurements).enumerate() {
                let mut row = vec![k.to_string()];
                row.extend(x.iter().chain(y.iter()).map(|&v| fmt_f64(v)));
                table.push(row);
            }
            let states: Vec<&[f64]> = traj.states.iter().map(|x| x.as_slice()).collect();
            let measurements: Vec<&[f64]> = traj.measurements.iter().map(|y| y.as_slice()).collect();
            let json = json!({ "states": states, "measurements": measurements });
            write(out, format, table, json)?;
            Ok(json!({ "steps": traj.len(), "state_dim": nx, "measurement_dim": ny }))
        }
        ExperimentKind::Positioning1d => {
            let stats = run_1d_positioning(cfg)?;
            let mut table = Table::new(["algorithm", "rmse", "mean", "std", "skewness"]);
            let mut summary = Map::new();
            for s in &stats {
                let e = s.stats;
                table.push(vec![
                    s.algorithm.to_string(),
                    fmt_f64(e.rmse),
                    fmt_f64(e.mean),
                    fmt_f64(e.std),
                    fmt_f64(e.skewness),
                ]);
                summary.insert(s.algorithm.to_string(), serde_json::to_value(e)?);
            }
            write(out, format, table, serde_json::to_value(&stats)?)?;
            Ok(Value::Object(summary))
        }
        ExperimentKind::Pseudorange => {
            let result = run_pseudorange(cfg)?;
            let reference = result.rmse_of(result.reference).expect("reference present");
            let mut table = Table::new(["algorithm", "replication", "rmse", "diff_percent"]);
            for (a, rmse) in result.algorithms.iter().zip(&result.rmse) {
                let diff = percent_differences(rmse, reference);
                for (r, (v, d)) in rmse.iter().zip(diff).enumerate() {
                    table.push(vec![a.to_string(), r.to_string(), fmt_f64(*v), fmt_f64(d)]);
                }
            }
            let summary = json!({
                "reference": result.reference,
                "median_diff_percent": result
                    .differences
                    .iter()
                    .map(|(a, q)| (a.to_string(), json!(q.q50)))
                    .collect::<Map<_, _>>(),
            });
            write(out, format, table, serde_json::to_value(&result)?)?;
            Ok(summary)
        }
        ExperimentKind::Convergence => {
            let rows = run_convergence_study(cfg, &cfg.iteration_grid, &cfg.particle_grid)?;
            let mut table = Table::new([
                "delta",
                "algorithm",
                "setting",
                "replications",
                "mean_rmse",
                "median_rmse",
                "time_s",
            ]);
            for r in &rows {
                table.push(vec![
                    fmt_f64(r.delta),
                    r.algorithm.to_string(),
                    r.setting.to_string(),
                    r.replications.to_string(),
                    fmt_f64(r.mean_rmse),
                    fmt_f64(r.median_rmse),
                    fmt_f64(r.time_s),
                ]);
            }
            write(out, format, table, serde_json::to_value(&rows)?)?;
            Ok(json!({ "rows": rows.len() }))
        }
        ExperimentKind::EmpiricalNoise => {
            let histogram = match &cfg.histogram {
                Some(path) => read_histogram(Path::new(path))?,
                None => synthetic_histogram(cfg)?,
            };
            let result = run_empirical_noise(cfg, &histogram)?;
            let mut table = Table::new(["replication", "rmse_stvbf", "rmse_tvbf", "diff_percent"]);
            for r in 0..result.rmse_stvbf.len() {
                table.push(vec![
                    r.to_string(),
                    fmt_f64(result.rmse_stvbf[r]),
                    fmt_f64(result.rmse_tvbf[r]),
                    fmt_f64(result.difference_percent[r]),
                ]);
            }
            write(out, format, table, serde_json::to_value(&result)?)?;
            Ok(json!({ "win_rate": result.win_rate }))
        }
    }
}
