//! `tabmoves` command-line front end.

mod fiber_cmd;
mod moves_cmd;
mod opts;
mod output;
mod repro_cmd;
mod sample_cmd;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use opts::{CliError, Format};

#[derive(Parser, Debug)]
#[command(name = "tabmoves", version, about = "Markov moves for bounded and incomplete contingency tables")]
struct Cli {
    /// Worker threads (default: available cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output format for tabular reports.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate move sets.
    Moves(moves_cmd::MovesArgs),
    /// Enumerate fibers and check connectivity.
    Fiber(fiber_cmd::FiberArgs),
    /// Run a Metropolis chain on a fiber.
    Sample(sample_cmd::SampleArgs),
    /// Recompute reference figures and compare with embedded values.
    Repro(repro_cmd::ReproArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let mut out = std::io::stdout().lock();
    match cli.command {
        Command::Moves(a) => moves_cmd::run(&a, cli.format, &mut out),
        Command::Fiber(a) => fiber_cmd::run(&a, cli.format, &mut out),
        Command::Sample(a) => sample_cmd::run(&a, cli.format, &mut out),
        Command::Repro(a) => repro_cmd::run(&a, cli.format, &mut out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tabmoves: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
