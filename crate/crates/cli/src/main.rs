use std::process::ExitCode;

use bec_kinetics_cli::args::{Cli, Command};
use bec_kinetics_cli::{commands, CliError};
use clap::Parser;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("{}", CliError::Runtime(e.to_string()));
            return ExitCode::from(3);
        }
    }
    let result = match &cli.command {
        Command::Grow(a) => commands::grow(a),
        Command::Ssa(a) => commands::ssa(a),
        Command::Validate(a) => commands::validate(a),
        Command::Sweep(a) => commands::sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
