mod config;
mod error;
mod run;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use config::{Cli, RunConfig};
use error::CliError;

fn fail(e: &CliError) -> ExitCode {
    // one line: `error[kind]: reason`
    let reason = e.to_string().replace('\n', " ");
    eprintln!("error[{}]: {reason}", e.kind());
    ExitCode::from(e.exit_code() as u8)
}

#[cfg(feature = "parallel")]
fn in_pool(jobs: Option<usize>, f: impl FnOnce() -> Result<(), CliError> + Send) -> Result<(), CliError> {
    match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("cannot start {n} workers: {e}")))?
            .install(f),
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn in_pool(_jobs: Option<usize>, f: impl FnOnce() -> Result<(), CliError>) -> Result<(), CliError> {
    f()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            return fail(&CliError::Config(first.trim_start_matches("error: ").to_string()));
        }
    };
    let outcome = RunConfig::from_cli(&cli).and_then(|config| in_pool(config.jobs, || run::run(&config)));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
