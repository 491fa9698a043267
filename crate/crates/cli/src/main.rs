//! `fiberplan` command-line tool.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fiberplan::bench::FitMode;
use fiberplan::planners::PlannerName;

use commands::{Overrides, EXIT_USAGE};

#[derive(Parser, Debug)]
#[command(name = "fiberplan", version, about = "Multilevel motion planning on fiber bundles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Planner name (qrrt, qrrt_star, qmp, qmp_star, rrt, rrt_star, prm, prm_star).
    #[arg(long, value_parser = parse_planner)]
    planner: Option<PlannerName>,
    #[arg(long)]
    seed: Option<u64>,
    /// Seconds per run.
    #[arg(long = "time-limit")]
    time_limit: Option<f64>,
    #[arg(long)]
    runs: Option<usize>,
    /// Output file (JSON for plan, CSV otherwise).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write an SVG next to the output.
    #[arg(long)]
    plot: bool,
    /// Worker threads for suites.
    #[arg(long)]
    parallel: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one problem and write the solution path.
    Plan {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run a benchmark suite.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Compare primitive-method variants across the shipped environments.
    Meta {
        #[command(flatten)]
        common: Common,
    },
    /// Hypercube runtime against dimension with a cubic fit.
    Scaling {
        /// Comma-separated ascending dimensions.
        #[arg(long, value_delimiter = ',', default_value = "3,4,5,6,7")]
        n: Vec<usize>,
        #[arg(long, value_enum, default_value = "time")]
        fit: Fit,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Fit {
    Time,
    LogTime,
}

fn parse_planner(s: &str) -> Result<PlannerName, String> {
    PlannerName::parse(s).ok_or_else(|| format!("unknown planner `{s}`"))
}

impl From<&Common> for Overrides {
    fn from(c: &Common) -> Self {
        Overrides {
            planner: c.planner,
            seed: c.seed,
            time_limit: c.time_limit,
            runs: c.runs,
            out: c.out.clone(),
            plot: c.plot,
            parallel: c.parallel,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FIBERPLAN_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Plan { config, common } => commands::run_plan(config, &common.into()),
        Command::Bench { config, common } => commands::run_bench(config, &common.into()),
        Command::Meta { common } => commands::run_meta(&common.into()),
        Command::Scaling { n, fit, common } => {
            let mode = match fit {
                Fit::Time => FitMode::Time,
                Fit::LogTime => FitMode::LogTime,
            };
            commands::run_scaling(n, mode, &common.into())
        }
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE as u8)
        }
    }
}
