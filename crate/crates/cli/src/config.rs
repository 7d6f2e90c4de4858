//! Optional TOML config file. Values apply below command-line flags and
//! above built-in defaults; every key is optional and one file can serve all
//! commands.

use std::path::Path;

use chainhawkes::fit::{ConstraintMode, FitConfig};
use chainhawkes::ingest::JumpConfig;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub window_hours: Option<f64>,
    pub q_low: Option<f64>,
    pub q_high: Option<f64>,
    pub min_history: Option<usize>,

    pub num_decays: Option<usize>,
    pub decay_init: Option<Vec<f64>>,
    pub inner_max_iter: Option<usize>,
    pub outer_max_iter: Option<usize>,
    pub inner_tol: Option<f64>,
    pub outer_tol: Option<f64>,
    pub constraint: Option<ConstraintMode>,
    pub poisson_baseline: Option<bool>,

    pub max_events: Option<usize>,
    pub allow_unstable: Option<bool>,
}

pub fn parse_config(text: &str) -> CliResult<ConfigFile> {
    toml::from_str(text).map_err(|e| CliError::Input(format!("config: {e}")))
}

pub fn load_config(path: Option<&Path>) -> CliResult<(ConfigFile, Option<Vec<u8>>)> {
    let Some(path) = path else {
        return Ok((ConfigFile::default(), None));
    };
    let bytes =
        std::fs::read(path).map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| CliError::Input(format!("config {} is not UTF-8: {e}", path.display())))?;
    Ok((parse_config(text)?, Some(bytes)))
}

#[derive(Debug, Clone, Default)]
pub struct JumpFlags {
    pub window_hours: Option<f64>,
    pub q_low: Option<f64>,
    pub q_high: Option<f64>,
    pub min_history: Option<usize>,
}

pub fn jump_config(flags: &JumpFlags, file: &ConfigFile) -> CliResult<JumpConfig> {
    let d = JumpConfig::default();
    let config = JumpConfig {
        window_hours: flags.window_hours.or(file.window_hours).unwrap_or(d.window_hours),
        q_low: flags.q_low.or(file.q_low).unwrap_or(d.q_low),
        q_high: flags.q_high.or(file.q_high).unwrap_or(d.q_high),
        min_history: flags.min_history.or(file.min_history).unwrap_or(d.min_history),
    };
    config.validate()?;
    Ok(config)
}

#[derive(Debug, Clone, Default)]
pub struct FitFlags {
    pub num_decays: Option<usize>,
    pub decay_init: Option<Vec<f64>>,
    pub inner_max_iter: Option<usize>,
    pub outer_max_iter: Option<usize>,
    pub inner_tol: Option<f64>,
    pub outer_tol: Option<f64>,
    pub constraint: Option<ConstraintMode>,
}

/// `n` decays spaced geometrically over the default span `[0.5, 50]`.
fn spread_decays(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![5.0],
        _ => (0..n).map(|k| 0.5 * 100f64.powf(k as f64 / (n - 1) as f64)).collect(),
    }
}

pub fn fit_config(flags: &FitFlags, file: &ConfigFile) -> CliResult<FitConfig> {
    let d = FitConfig::default();
    let num_decays = flags.num_decays.or(file.num_decays);
    let decay_init = flags.decay_init.clone().or_else(|| file.decay_init.clone());
    let (num_decays, decay_init) = match (num_decays, decay_init) {
        (None, None) => (d.num_decays, d.decay_init),
        (Some(n), None) if n == d.num_decays => (n, d.decay_init),
        (Some(n), None) => (n, spread_decays(n)),
        (None, Some(init)) => (init.len(), init),
        (Some(n), Some(init)) => (n, init),
    };
    let config = FitConfig {
        num_decays,
        decay_init,
        inner_max_iter: flags.inner_max_iter.or(file.inner_max_iter).unwrap_or(d.inner_max_iter),
        outer_max_iter: flags.outer_max_iter.or(file.outer_max_iter).unwrap_or(d.outer_max_iter),
        inner_tol: flags.inner_tol.or(file.inner_tol).unwrap_or(d.inner_tol),
        outer_tol: flags.outer_tol.or(file.outer_tol).unwrap_or(d.outer_tol),
        constraint: flags.constraint.or(file.constraint).unwrap_or(d.constraint),
    };
    config.validate()?;
    Ok(config)
}
