use std::process::ExitCode;

use clap::Parser;
use hsforce_cli::{execute, RunConfig, Verb};

/// Validate, amalgamate and search finite forcing conditions.
#[derive(Parser)]
#[command(name = "hsforce", version)]
struct Cli {
    #[arg(value_enum)]
    verb: Verb,
    #[command(flatten)]
    config: RunConfig,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    ExitCode::from(execute(cli.verb, &cli.config))
}
