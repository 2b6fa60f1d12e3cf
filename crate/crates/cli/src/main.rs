mod cli;
mod commands;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use loopon_core::Error;
use serde::Serialize;

use cli::{Cli, Command};
use commands::Outcome;

const EXIT_VERIFY: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CAP: u8 = 3;

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    params: &'a Command,
    output: Option<&'a str>,
    rng: Option<&'static str>,
    seeds: &'a [u64],
    cache_hits: u64,
    passed: bool,
    wall_clock_seconds: f64,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::SizeCap { .. } => EXIT_CAP,
        _ => EXIT_USAGE,
    }
}

fn dispatch(command: &Command) -> loopon_core::Result<Outcome> {
    match command {
        Command::Z(a) => commands::z(a),
        Command::Verify(a) => commands::verify(a),
        Command::Counts(a) => commands::counts(a),
        Command::BoundCurve(a) => commands::bound_curve(a),
        Command::Mc(a) => commands::mc(a),
        Command::McTv(a) => commands::mc_tv(a),
    }
}

fn emit(cli: &Cli, outcome: &Outcome, started: Instant) -> std::io::Result<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, &outcome.body)?,
        None => print!("{}", outcome.body),
    }
    let manifest_path = cli
        .manifest
        .clone()
        .or_else(|| cli.out.as_ref().map(|o| format!("{o}.manifest.json")));
    if let Some(path) = manifest_path {
        let manifest = Manifest {
            tool: "loopon",
            version: env!("CARGO_PKG_VERSION"),
            command: cli.command.name(),
            params: &cli.command,
            output: cli.out.as_deref(),
            rng: outcome.rng,
            seeds: &outcome.seeds,
            cache_hits: outcome.cache_hits,
            passed: outcome.passed,
            wall_clock_seconds: started.elapsed().as_secs_f64(),
        };
        let mut text = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)?;
        text.push('\n');
        std::fs::write(path, text)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let outcome = match dispatch(&cli.command) {
        Ok(o) => o,
        Err(err) => {
            eprintln!("error: {err}");
            if matches!(err, Error::SizeCap { .. }) {
                eprintln!("hint: pass --force to lift the cap");
            }
            return ExitCode::from(exit_code(&err));
        }
    };
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    if let Err(err) = emit(&cli, &outcome, started) {
        eprintln!("error: {err}");
        return ExitCode::from(EXIT_USAGE);
    }
    if outcome.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERIFY)
    }
}
