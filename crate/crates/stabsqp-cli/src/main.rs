//! Benchmark CLI for the stabilized SQP solver.
//!
//! Verbs: `solve`, `rate-study`, `error-bound`, `contrast`, `list-instances`.
//! Every run is driven by a JSON config file (defaults apply when omitted)
//! and writes CSV and/or JSON reports stamped with a hash of the effective
//! config and the tool version, so rows are traceable to what produced them.
//!
//! Exit codes: 0 success, 1 configuration or I/O error, 2 quality criterion
//! missed (no KKT point, bound exceeded), 3 subproblem failure during solve.
//! Logging goes to stderr, controlled by `STABSQP_LOG` (error/info/debug).

// validations use `!(x > 0.0)` so NaN is rejected along with nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod experiments;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::ExperimentConfig;
use experiments::{Context, Format};

#[derive(Parser)]
#[command(name = "stabsqp", version, about = "Stabilized SQP benchmark runner")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one solve and write the iteration trace.
    Solve(RunArgs),
    /// Measure convergence order over perturbed starts at several radii.
    RateStudy(RunArgs),
    /// Sample the ratio of KKT residual to distance-to-reference near the
    /// reference point and check its spread.
    ErrorBound(RunArgs),
    /// Run the stabilized and ordinary methods from the same start and
    /// report both outcomes side by side.
    Contrast(RunArgs),
    /// Print the built-in instance catalog with its JSON config forms.
    ListInstances,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for report files.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Report format(s) to write.
    #[arg(long, value_enum, default_value_t = Format::Both)]
    format: Format,
    /// Worker threads for multi-sample experiments.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Record wall-clock times per iteration. Off by default so repeated
    /// runs produce byte-identical reports.
    #[arg(long)]
    timing: bool,
}

impl RunArgs {
    fn context(self) -> Result<Context, String> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if self.jobs == 0 {
            return Err("--jobs must be at least 1".into());
        }
        Ok(Context {
            config,
            out: self.out,
            format: self.format,
            jobs: self.jobs,
            timing: self.timing,
        })
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(
        env_logger::Env::new().filter_or("STABSQP_LOG", "error"),
    )
    .init();

    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::ListInstances => Ok(experiments::cmd_list_instances()),
        Cmd::Solve(args) => args.context().and_then(|c| experiments::cmd_solve(&c)),
        Cmd::RateStudy(args) => args.context().and_then(|c| experiments::cmd_rate_study(&c)),
        Cmd::ErrorBound(args) => args
            .context()
            .and_then(|c| experiments::cmd_error_bound(&c)),
        Cmd::Contrast(args) => args.context().and_then(|c| experiments::cmd_contrast(&c)),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
