use std::path::PathBuf;
use std::process::ExitCode;

use chainhawkes::fit::ConstraintMode;
use chainhawkes_cli::commands::{
    build_events_cmd, clean_blocks_cmd, extract_jumps_cmd, fit_cmd, gof_cmd, simulate_cmd, FitArgs, SimArgs,
};
use chainhawkes_cli::config::{FitFlags, JumpFlags};
use chainhawkes_cli::error::CliResult;
use clap::{Parser, Subcommand, ValueEnum};

/// Hawkes-process analysis of block arrivals and price jumps.
///
/// Exit codes: 0 success, 1 output write failure, 2 input or configuration
/// error, 3 numerical or fit failure, 4 invalid or unstable model.
#[derive(Parser)]
#[command(name = "chainhawkes", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Constraint {
    Projection,
    Barrier,
}

impl From<Constraint> for ConstraintMode {
    fn from(c: Constraint) -> Self {
        match c {
            Constraint::Projection => ConstraintMode::Projection,
            Constraint::Barrier => ConstraintMode::Barrier,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Drop duplicate-timestamp blocks and sort by timestamp.
    CleanBlocks {
        /// CSV with header `height,timestamp,tx_count`.
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// JSON report of dropped duplicates, reordered blocks and ties.
        #[arg(long)]
        report: PathBuf,
    },
    /// Flag 5-minute log returns outside their trailing quantile band.
    ExtractJumps {
        /// CSV with header `timestamp,vwap`.
        input: PathBuf,
        /// CSV `timestamp,direction` of up/down jumps.
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Trailing history length in hours [default: 3].
        #[arg(long)]
        window_hours: Option<f64>,
        /// [default: 0.10]
        #[arg(long)]
        q_low: Option<f64>,
        /// [default: 0.90]
        #[arg(long)]
        q_high: Option<f64>,
        /// Minimum history length before classifying [default: 12].
        #[arg(long)]
        min_history: Option<usize>,
    },
    /// Merge cleaned blocks and jumps into a trivariate events CSV (hours since --start).
    BuildEvents {
        #[arg(long)]
        blocks: PathBuf,
        #[arg(long)]
        jumps: PathBuf,
        /// Window start [default: first event].
        #[arg(long)]
        start: Option<String>,
        /// Window end [default: last event].
        #[arg(long)]
        end: Option<String>,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Maximum-likelihood fit of a sum-of-exponentials Hawkes model.
    Fit {
        /// CSV with header `time_hours,mark`, marks 1-based.
        events: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Observation window length [default: last event time].
        #[arg(long)]
        horizon: Option<f64>,
        /// Number of components [default: largest mark].
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// [default: 3]
        #[arg(long)]
        num_decays: Option<usize>,
        /// Comma-separated initial decays per hour [default: 0.5,5,50].
        #[arg(long, value_delimiter = ',')]
        decay_init: Option<Vec<f64>>,
        #[arg(long)]
        inner_max_iter: Option<usize>,
        /// 0 fits at the initial decays only.
        #[arg(long)]
        outer_max_iter: Option<usize>,
        #[arg(long)]
        inner_tol: Option<f64>,
        #[arg(long)]
        outer_tol: Option<f64>,
        #[arg(long, value_enum)]
        constraint: Option<Constraint>,
        /// Also fit a homogeneous Poisson model and report the likelihood ratio.
        #[arg(long)]
        poisson_baseline: bool,
    },
    /// Time-rescaling residuals, Q-Q data and KS tests for a model and the Poisson baseline.
    Gof {
        events: PathBuf,
        /// Model JSON, e.g. the output of `fit`.
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long)]
        output: PathBuf,
        /// Directory for per-component Q-Q CSVs.
        #[arg(long)]
        qq_dir: Option<PathBuf>,
    },
    /// Simulate a model by thinning.
    Simulate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        horizon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        max_events: Option<usize>,
        /// Simulate even when the kernel-norm spectral radius is >= 1.
        #[arg(long)]
        allow_unstable: bool,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::CleanBlocks { input, output, report } => clean_blocks_cmd(&input, &output, &report),
        Command::ExtractJumps {
            input,
            output,
            report,
            config,
            window_hours,
            q_low,
            q_high,
            min_history,
        } => {
            let flags = JumpFlags {
                window_hours,
                q_low,
                q_high,
                min_history,
            };
            extract_jumps_cmd(&input, &output, report.as_deref(), config.as_deref(), &flags)
        }
        Command::BuildEvents {
            blocks,
            jumps,
            start,
            end,
            output,
            report,
        } => build_events_cmd(
            &blocks,
            &jumps,
            start.as_deref(),
            end.as_deref(),
            &output,
            report.as_deref(),
        ),
        Command::Fit {
            events,
            output,
            horizon,
            dim,
            config,
            num_decays,
            decay_init,
            inner_max_iter,
            outer_max_iter,
            inner_tol,
            outer_tol,
            constraint,
            poisson_baseline,
        } => fit_cmd(&FitArgs {
            events: &events,
            output: &output,
            horizon,
            dim,
            config: config.as_deref(),
            poisson_baseline,
            flags: FitFlags {
                num_decays,
                decay_init,
                inner_max_iter,
                outer_max_iter,
                inner_tol,
                outer_tol,
                constraint: constraint.map(Into::into),
            },
        }),
        Command::Gof {
            events,
            model,
            horizon,
            output,
            qq_dir,
        } => gof_cmd(&events, &model, horizon, &output, qq_dir.as_ref()),
        Command::Simulate {
            model,
            horizon,
            seed,
            output,
            report,
            config,
            max_events,
            allow_unstable,
        } => simulate_cmd(&SimArgs {
            model: &model,
            output: &output,
            report: report.as_deref(),
            horizon,
            seed,
            config: config.as_deref(),
            max_events,
            allow_unstable,
        }),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
