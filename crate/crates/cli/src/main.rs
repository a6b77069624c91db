mod args;
mod commands;
mod error;
mod output;

use std::path::Path;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, RunSettings};
use error::CliError;
use output::Manifest;

fn run(command: &Command, settings: &RunSettings, out: &Path) -> Result<commands::Outcome, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.threads)
        .build()
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    pool.install(|| commands::dispatch(command, settings, out))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let result = match &cli.command {
        Command::Rerun(r) => Manifest::load(&r.manifest).and_then(|m| run(&m.command, &m.run, &cli.out_dir)),
        command => run(command, &cli.run, &cli.out_dir),
    };
    match result {
        Ok(outcome) if outcome.converged => {
            println!("{}", outcome.summary);
            ExitCode::SUCCESS
        }
        Ok(outcome) => {
            println!("{}", outcome.summary);
            eprintln!("warning: not converged; outputs carry per-point flags");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
