use std::path::{Path, PathBuf};

use chainhawkes::fit::{fit_full, fit_poisson, FitConfig, FitDocument};
use chainhawkes::gof::{gof_report, poisson_gof_report, write_qq_csv, GofReport, ModelLabel};
use chainhawkes::ingest::{
    build_trivariate, clean_blocks, extract_jumps, format_timestamp, log_returns, parse_timestamp, read_blocks_csv,
    read_events_csv, read_jumps_csv, read_prices_csv, write_blocks_csv, write_events_csv, write_jumps_csv,
    CleaningReport, DroppedCounts, GapRecord, JumpConfig,
};
use chainhawkes::sim::{simulate, SimConfig};
use chainhawkes::{Error, EventSequence, HawkesModel};
use chrono::{DateTime, Utc};
use serde::Serialize;

use crate::config::{fit_config, jump_config, load_config, FitFlags, JumpFlags};
use crate::error::{CliError, CliResult};
use crate::manifest::{write_json, write_output, Inputs, RunManifest};

fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> chainhawkes::Result<()>) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(buf)
}

fn load_model(inputs: &mut Inputs, path: &Path) -> CliResult<HawkesModel> {
    let bytes = inputs.read(path)?;
    serde_json::from_slice(&bytes).map_err(|e| Error::Json(e).into())
}

fn load_events(inputs: &mut Inputs, path: &Path, horizon: Option<f64>, dim: Option<usize>) -> CliResult<EventSequence> {
    let bytes = inputs.read(path)?;
    Ok(read_events_csv(bytes.as_slice(), horizon, dim)?)
}

#[derive(Serialize)]
struct CleanOutput<'a> {
    manifest: RunManifest,
    input_rows: usize,
    output_rows: usize,
    #[serde(flatten)]
    report: &'a CleaningReport,
}

pub fn clean_blocks_cmd(input: &Path, output: &Path, report: &Path) -> CliResult<()> {
    let mut inputs = Inputs::default();
    let bytes = inputs.read(input)?;
    let blocks = read_blocks_csv(bytes.as_slice())?;
    if blocks.is_empty() {
        return Err(CliError::Input(format!(
            "{}: no block rows after the header",
            input.display()
        )));
    }
    let (cleaned, cleaning) = clean_blocks(&blocks)?;
    write_output(output, &csv_bytes(|b| write_blocks_csv(b, &cleaned))?)?;
    write_json(
        report,
        &CleanOutput {
            manifest: inputs.manifest("clean-blocks", &()),
            input_rows: blocks.len(),
            output_rows: cleaned.len(),
            report: &cleaning,
        },
    )
}

#[derive(Serialize)]
struct JumpsOutput<'a> {
    manifest: RunManifest,
    config: &'a JumpConfig,
    returns: usize,
    up: usize,
    down: usize,
    skipped: usize,
    gaps: &'a [GapRecord],
}

pub fn extract_jumps_cmd(
    input: &Path,
    output: &Path,
    report: Option<&Path>,
    config_path: Option<&Path>,
    flags: &JumpFlags,
) -> CliResult<()> {
    let mut inputs = Inputs::default();
    let (file, _) = load_config(config_path)?;
    let config = jump_config(flags, &file)?;
    let bytes = inputs.read(input)?;
    let bars = read_prices_csv(bytes.as_slice())?;
    let returns = log_returns(&bars)?;
    let jumps = extract_jumps(&returns.returns, &config)?;
    write_output(output, &csv_bytes(|b| write_jumps_csv(b, &jumps))?)?;
    if let Some(report) = report {
        write_json(
            report,
            &JumpsOutput {
                manifest: inputs.manifest("extract-jumps", &config),
                config: &config,
                returns: returns.returns.len(),
                up: jumps.up.len(),
                down: jumps.down.len(),
                skipped: jumps.skipped,
                gaps: &returns.gaps,
            },
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct Window {
    start: String,
    end: String,
}

#[derive(Serialize)]
struct EventsOutput {
    manifest: RunManifest,
    window: Window,
    horizon_hours: f64,
    counts: Vec<usize>,
    dropped: DroppedCounts,
}

pub fn build_events_cmd(
    blocks_path: &Path,
    jumps_path: &Path,
    start: Option<&str>,
    end: Option<&str>,
    output: &Path,
    report: Option<&Path>,
) -> CliResult<()> {
    let mut inputs = Inputs::default();
    let blocks = read_blocks_csv(inputs.read(blocks_path)?.as_slice())?;
    let jumps = read_jumps_csv(inputs.read(jumps_path)?.as_slice())?;
    let all = || {
        blocks
            .iter()
            .map(|b| b.timestamp)
            .chain(jumps.up.iter().copied())
            .chain(jumps.down.iter().copied())
    };
    let bound = |raw: Option<&str>, fallback: Option<DateTime<Utc>>| -> CliResult<DateTime<Utc>> {
        match raw {
            Some(s) => parse_timestamp(s).map_err(|e| CliError::Input(format!("window bound: {e}"))),
            None => fallback.ok_or_else(|| CliError::Input("no events and no window given".into())),
        }
    };
    let start = bound(start, all().min())?;
    let end = bound(end, all().max())?;
    let tri = build_trivariate(&blocks, &jumps.up, &jumps.down, start, end)?;
    write_output(output, &csv_bytes(|b| write_events_csv(b, &tri.sequence))?)?;
    if let Some(report) = report {
        let window = Window {
            start: format_timestamp(&start),
            end: format_timestamp(&end),
        };
        write_json(
            report,
            &EventsOutput {
                manifest: inputs.manifest("build-events", &window),
                window,
                horizon_hours: tri.sequence.horizon(),
                counts: tri.sequence.counts(),
                dropped: tri.dropped_counts(),
            },
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct FitSettings<'a> {
    #[serde(flatten)]
    fit: &'a FitConfig,
    horizon: f64,
    dim: usize,
    poisson_baseline: bool,
}

#[derive(Serialize)]
struct PoissonOutput {
    rates: Vec<f64>,
    log_lik: f64,
    /// Likelihood-ratio statistic `2 (l_hawkes - l_poisson)`.
    likelihood_ratio: f64,
}

#[derive(Serialize)]
struct FitOutput<'a> {
    manifest: RunManifest,
    config: FitSettings<'a>,
    events: usize,
    #[serde(flatten)]
    fit: FitDocument<'a>,
    #[serde(skip_serializing_if = "Option::is_none")]
    poisson: Option<PoissonOutput>,
}

pub struct FitArgs<'a> {
    pub events: &'a Path,
    pub output: &'a Path,
    pub horizon: Option<f64>,
    pub dim: Option<usize>,
    pub config: Option<&'a Path>,
    pub poisson_baseline: bool,
    pub flags: FitFlags,
}

pub fn fit_cmd(args: &FitArgs) -> CliResult<()> {
    let mut inputs = Inputs::default();
    let (file, _) = load_config(args.config)?;
    let config = fit_config(&args.flags, &file)?;
    let poisson_baseline = args.poisson_baseline || file.poisson_baseline.unwrap_or(false);
    let seq = load_events(&mut inputs, args.events, args.horizon, args.dim)?;
    if seq.is_empty() {
        return Err(CliError::Numeric(format!(
            "{}: no events to fit",
            args.events.display()
        )));
    }
    let fit = fit_full(&seq, &config)?;
    let poisson = if poisson_baseline {
        let p = fit_poisson(&seq)?;
        Some(PoissonOutput {
            likelihood_ratio: 2.0 * (fit.log_lik - p.log_lik),
            rates: p.rates,
            log_lik: p.log_lik,
        })
    } else {
        None
    };
    let settings = FitSettings {
        fit: &config,
        horizon: seq.horizon(),
        dim: seq.dim(),
        poisson_baseline,
    };
    for w in &fit.warnings {
        eprintln!("warning: {w}");
    }
    write_json(
        args.output,
        &FitOutput {
            manifest: inputs.manifest("fit", &settings),
            config: settings,
            events: seq.len(),
            fit: fit.document(),
            poisson,
        },
    )
}

#[derive(Serialize)]
struct ComponentSummary {
    component: usize,
    events: usize,
    slope: Option<f64>,
    slope_deviation: Option<f64>,
    ks_statistic: Option<f64>,
    ks_p_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    flag: Option<String>,
}

#[derive(Serialize)]
struct ReportSummary {
    model_label: ModelLabel,
    components: Vec<ComponentSummary>,
}

impl From<&GofReport> for ReportSummary {
    fn from(r: &GofReport) -> Self {
        ReportSummary {
            model_label: r.model_label,
            components: r
                .components
                .iter()
                .map(|c| ComponentSummary {
                    component: c.component,
                    events: c.events,
                    slope: c.slope,
                    slope_deviation: c.slope_deviation,
                    ks_statistic: c.ks_statistic,
                    ks_p_value: c.ks_p_value,
                    flag: c.flag.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Serialize)]
struct GofSettings {
    horizon: f64,
    dim: usize,
}

#[derive(Serialize)]
struct GofOutput {
    manifest: RunManifest,
    config: GofSettings,
    hawkes: ReportSummary,
    poisson: ReportSummary,
}

pub fn gof_cmd(
    events: &Path,
    model_path: &Path,
    horizon: Option<f64>,
    output: &Path,
    qq_dir: Option<&PathBuf>,
) -> CliResult<()> {
    let mut inputs = Inputs::default();
    let model = load_model(&mut inputs, model_path)?;
    let seq = load_events(&mut inputs, events, horizon, Some(model.dim()))?;
    let hawkes = gof_report(&model, &seq, ModelLabel::Hawkes)?;
    let poisson = poisson_gof_report(&seq)?;
    if let Some(dir) = qq_dir {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Output {
            path: dir.display().to_string(),
            source,
        })?;
        for (label, report) in [("hawkes", &hawkes), ("poisson", &poisson)] {
            for c in &report.components {
                let path = dir.join(format!("qq_{label}_{}.csv", c.component));
                write_output(&path, &csv_bytes(|b| write_qq_csv(b, &c.qq_pairs))?)?;
            }
        }
    }
    let settings = GofSettings {
        horizon: seq.horizon(),
        dim: seq.dim(),
    };
    write_json(
        output,
        &GofOutput {
            manifest: inputs.manifest("gof", &settings),
            config: settings,
            hawkes: (&hawkes).into(),
            poisson: (&poisson).into(),
        },
    )
}

#[derive(Serialize)]
struct SimSettings {
    horizon: f64,
    seed: u64,
    max_events: usize,
    allow_unstable: bool,
}

#[derive(Serialize)]
struct SimOutput {
    manifest: RunManifest,
    config: SimSettings,
    events: usize,
    counts: Vec<usize>,
    truncated: bool,
}

pub struct SimArgs<'a> {
    pub model: &'a Path,
    pub output: &'a Path,
    pub report: Option<&'a Path>,
    pub horizon: f64,
    pub seed: u64,
    pub config: Option<&'a Path>,
    pub max_events: Option<usize>,
    pub allow_unstable: bool,
}

pub fn simulate_cmd(args: &SimArgs) -> CliResult<()> {
    let mut inputs = Inputs::default();
    let (file, _) = load_config(args.config)?;
    let model = load_model(&mut inputs, args.model)?;
    let mut config = SimConfig::new(model, args.horizon, args.seed)
        .allow_unstable(args.allow_unstable || file.allow_unstable.unwrap_or(false));
    if let Some(n) = args.max_events.or(file.max_events) {
        config = config.with_max_events(n);
    }
    let settings = SimSettings {
        horizon: config.horizon,
        seed: config.seed,
        max_events: config.max_events,
        allow_unstable: config.allow_unstable,
    };
    let (seq, truncated) = match simulate(&config) {
        Ok(seq) => (seq, None),
        Err(Error::Truncated {
            max_events,
            stopped_at,
            partial,
        }) => (
            *partial,
            Some(format!(
                "simulation stopped after {max_events} events at t = {stopped_at:.6}"
            )),
        ),
        Err(e) => return Err(e.into()),
    };
    write_output(args.output, &csv_bytes(|b| write_events_csv(b, &seq))?)?;
    if let Some(report) = args.report {
        write_json(
            report,
            &SimOutput {
                manifest: inputs.manifest("simulate", &settings),
                config: settings,
                events: seq.len(),
                counts: seq.counts(),
                truncated: truncated.is_some(),
            },
        )?;
    }
    match truncated {
        Some(msg) => Err(CliError::Numeric(msg)),
        None => Ok(()),
    }
}
