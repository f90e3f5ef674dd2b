mod cli;
mod commands;
mod error;
mod manifest;
mod plot;
mod spec;
mod table;

use std::process::ExitCode;

use clap::Parser;

use cli::{Cli, Command};
use error::CliError;
use spec::{resolve, CommandKind, RunSpec};

/// `None` for `verify`, which carries no run parameters of its own.
fn spec_of(command: &Command) -> Option<Result<RunSpec, CliError>> {
    Some(match command {
        Command::Nmse(c) => resolve(CommandKind::Nmse, c, None, None),
        Command::Outage { common, thresholds } => resolve(CommandKind::Outage, common, Some(thresholds), None),
        Command::Rates(c) => resolve(CommandKind::Rates, c, None, None),
        Command::OptTp(c) => resolve(CommandKind::OptTp, c, None, None),
        Command::Asymptotic { common, asym } => resolve(CommandKind::Asymptotic, common, None, Some(asym)),
        Command::Verify { .. } => return None,
    })
}

fn out_dir(command: &Command) -> &std::path::Path {
    match command {
        Command::Nmse(c) | Command::Rates(c) | Command::OptTp(c) => &c.out,
        Command::Outage { common, .. } | Command::Asymptotic { common, .. } => &common.out,
        Command::Verify { .. } => std::path::Path::new("."),
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Command::Verify { manifest } = &cli.command {
        return manifest::verify(manifest);
    }
    let spec = spec_of(&cli.command).expect("run command")?;
    let path = manifest::execute(&spec, out_dir(&cli.command))?;
    println!("{}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // clap exits with status 2 on malformed arguments.
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
