//! JSON configuration: defaults for the experiment, overlaid by the file,
//! then by command-line overrides.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{Map, Value};
use skewt_core::experiments::{ExperimentConfig, ExperimentKind};

/// Reads and validates a config file.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    parse_config_str(&text, None).with_context(|| format!("in config {}", path.display()))
}

/// Parses a config document. `experiment` fills the `experiment` key when the
/// document omits it and must agree with it otherwise.
pub fn parse_config_str(text: &str, experiment: Option<ExperimentKind>) -> Result<ExperimentConfig> {
    let doc: Value = serde_json::from_str(text).context("config is not valid JSON")?;
    let Value::Object(user) = doc else {
        bail!("config must be a JSON object");
    };
    resolve(user, experiment)
}

pub fn resolve(user: Map<String, Value>, experiment: Option<ExperimentKind>) -> Result<ExperimentConfig> {
    let kind = match (user.get("experiment"), experiment) {
        (Some(v), sub) => {
            let k: ExperimentKind = serde_path_to_error::deserialize(v)
                .map_err(|e| anyhow!("experiment: {}", e.inner()))?;
            if let Some(sub) = sub {
                if sub != k {
                    bail!("experiment: config says {k:?} but the subcommand is {sub:?}");
                }
            }
            k
        }
        (None, Some(sub)) => sub,
        (None, None) => bail!("experiment: missing"),
    };
    let seed = match user.get("seed") {
        Some(v) => v.as_u64().ok_or_else(|| anyhow!("seed: must be an unsigned 64-bit integer"))?,
        None => 0,
    };
    let Value::Object(mut merged) = serde_json::to_value(ExperimentConfig::defaults(kind, seed))? else {
        unreachable!("config serializes to an object");
    };
    for (key, value) in user {
        // optional keys are skipped when unset, so accept them explicitly
        if !merged.contains_key(&key) && key != "histogram" && key != "out" {
            let valid: Vec<&str> = merged.keys().map(String::as_str).collect();
            bail!("{key}: unknown key; valid keys: {}, histogram, out", valid.join(", "));
        }
        match (merged.get_mut(&key), value) {
            (Some(Value::Object(base)), Value::Object(over)) => base.extend(over),
            (_, value) => {
                merged.insert(key, value);
            }
        }
    }
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(Value::Object(merged))
        .map_err(|e| anyhow!("{}: {}", e.path(), e.inner()))?;
    cfg.validate()?;
    Ok(cfg)
}
