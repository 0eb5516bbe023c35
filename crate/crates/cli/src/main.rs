use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ergodic_osc_cli::{emit_csv, load_config, run, write_csv, CliError};

#[derive(Parser)]
#[command(name = "ergodic-osc", about = "Bilinear ergodic and Hilbert average experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment named in a config file.
    Run {
        config: PathBuf,
        /// CSV destination (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        experiment: Option<String>,
    },
}

fn execute(cli: Cli) -> Result<usize, CliError> {
    let Command::Run { config, out, seed, experiment } = cli.command;
    let cfg = load_config(&config)?.with_overrides(seed, experiment.as_deref())?;
    let outcome = run(&cfg)?;
    match out {
        Some(path) => emit_csv(&outcome.rows, &path)?,
        None => write_csv(&outcome.rows, std::io::stdout().lock())?,
    }
    Ok(outcome.violations)
}

fn main() -> ExitCode {
    if let Some(n) = std::env::var("ERGODIC_OSC_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // Fails only if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match execute(Cli::parse()) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(n) => {
            eprintln!("{n} bound violation(s)");
            ExitCode::from(2)
        }
        Err(CliError::Core(ergodic_osc_core::Error::BoundViolated { what, lhs, rhs })) => {
            eprintln!("bound violated: {what}: {lhs} > {rhs}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
