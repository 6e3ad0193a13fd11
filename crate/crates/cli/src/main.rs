use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use nielsen_cli::{emit_report, exit, parse_spec, run_command, Command, Format, Options, ProblemError};
use nielsen_core::exec::Execution;
use nielsen_core::tower::DEFAULT_BOX_BOUND;

/// Exact Nielsen numbers and coincidence numbers from tower linearisations.
#[derive(Parser)]
#[command(name = "nielsen", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,

    /// Problem file
    file: PathBuf,

    /// Search bound for netness and independence checks
    #[arg(long, value_name = "B", default_value_t = DEFAULT_BOX_BOUND)]
    box_bound: u32,

    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Append cross-checks to the computation
    #[arg(long)]
    oracle: bool,

    /// Evaluate on the calling thread only
    #[arg(long)]
    sequential: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match std::fs::read_to_string(&args.file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("{}: {e}", args.file.display());
            return ExitCode::from(exit::IO as u8);
        }
    };
    let file = match parse_spec(&text) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("{}: {e}", args.file.display());
            let code = match e {
                ProblemError::Syntax { .. } => exit::SYNTAX,
                ProblemError::Semantic(_) => exit::SEMANTIC,
            };
            return ExitCode::from(code as u8);
        }
    };
    let opts = Options {
        box_bound: args.box_bound,
        oracle: args.oracle,
        execution: if args.sequential { Execution::Sequential } else { Execution::default() },
    };
    match run_command(args.command, &file, &opts) {
        Ok(report) => {
            print!("{}", emit_report(&report, args.format));
            ExitCode::from(report.exit_status() as u8)
        }
        Err(e) => {
            eprintln!("{}: {e}", args.file.display());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
