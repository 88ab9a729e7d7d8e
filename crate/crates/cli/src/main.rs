mod args;
mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::Context;
use error::CliError;
use ptmetric_core::PhysicalParams64;

fn run(cli: &Cli) -> Result<(), CliError> {
    let p = &cli.params;
    let params = PhysicalParams64::new(p.m, p.hbar, p.l, p.zeta)?;
    let config = serde_json::to_value(cli).map_err(|e| CliError::Io(e.to_string()))?;
    let ctx = Context { params, seed: cli.seed, config };
    match &cli.command {
        Command::Kernel(a) => commands::kernel(&ctx, a),
        Command::Coeffs(a) => commands::coeffs(&ctx, a),
        Command::Classical { command } => commands::classical(&ctx, command),
        Command::Evolve(a) => commands::evolve_cmd(&ctx, a),
        Command::Localized(a) => commands::localized(&ctx, a),
        Command::Density(a) => commands::density(&ctx, a),
        Command::SpectralCheck(a) => commands::spectral_check(&ctx, a),
        Command::Figures(a) => commands::figures(&ctx, a),
    }
}

fn main() -> ExitCode {
    let argv = match config::expand_args(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("ptmetric: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // help and version go to stdout with exit 0; usage errors exit 2
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ptmetric: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
