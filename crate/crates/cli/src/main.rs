use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use flatflow::{emit_report, fixtures, parse_plan, run_plan, ComputationPlan, Format};

/// Spectral flow, rho and Chern-Simons invariants from declarative plans.
#[derive(Parser)]
#[command(name = "flatflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a plan file or a bundled fixture and print the report.
    Run {
        /// Path to a plan, or the name of a bundled fixture.
        plan: String,
        #[arg(long, value_enum, default_value_t = OutputFormat::Human)]
        format: OutputFormat,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and check a plan without running it.
    Validate { plan: String },
    /// Inspect the bundled fixture plans.
    Fixtures {
        #[command(subcommand)]
        action: FixtureAction,
    },
}

#[derive(Subcommand)]
enum FixtureAction {
    List,
    Show { name: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Human,
    Json,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Human => Format::Human,
            OutputFormat::Json => Format::Json,
        }
    }
}

const EXIT_PLAN: u8 = 2;
const EXIT_COMPUTATION: u8 = 3;

enum Failure {
    Plan(anyhow::Error),
    Computation(usize),
    Io(anyhow::Error),
}

/// A file path wins over a fixture of the same name.
fn load(arg: &str) -> Result<String, Failure> {
    let path = Path::new(arg);
    if path.exists() {
        return fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))
            .map_err(Failure::Plan);
    }
    fixtures::fixture(arg).map(str::to_owned).ok_or_else(|| {
        let known: Vec<_> = fixtures::names().collect();
        Failure::Plan(anyhow::anyhow!("no plan file or fixture named {arg:?} (fixtures: {})", known.join(", ")))
    })
}

fn plan(arg: &str) -> Result<ComputationPlan, Failure> {
    let text = load(arg)?;
    parse_plan(&text).with_context(|| format!("invalid plan {arg}")).map_err(Failure::Plan)
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run { plan: arg, format, out } => {
            let plan = plan(&arg)?;
            log::info!("running {} tasks", plan.tasks.len());
            let report = run_plan(&plan);
            let text = emit_report(&report, format.into());
            match out {
                Some(path) => fs::write(&path, &text)
                    .with_context(|| format!("writing {}", path.display()))
                    .map_err(Failure::Io)?,
                None => print!("{text}"),
            }
            let failed = report.tasks.iter().filter(|t| t.error.is_some()).count();
            if failed > 0 {
                return Err(Failure::Computation(failed));
            }
        }
        Command::Validate { plan: arg } => {
            let plan = plan(&arg)?;
            let ids: Vec<&str> = plan.order.iter().map(|&k| plan.tasks[k].id.as_str()).collect();
            println!("ok: {} tasks", ids.len());
            for id in ids {
                println!("  {id}");
            }
        }
        Command::Fixtures { action: FixtureAction::List } => {
            for name in fixtures::names() {
                println!("{name}");
            }
        }
        Command::Fixtures { action: FixtureAction::Show { name } } => {
            let text = fixtures::fixture(&name)
                .ok_or_else(|| Failure::Plan(anyhow::anyhow!("unknown fixture {name:?}")))?;
            print!("{text}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Plan(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_PLAN)
        }
        Err(Failure::Computation(n)) => {
            eprintln!("error: {n} task(s) did not complete");
            ExitCode::from(EXIT_COMPUTATION)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
