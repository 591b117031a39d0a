//! `tiltcond`: batch front end over the core library.
//!
//! Every run prints one JSON envelope on stdout,
//! `{"command", "config", "result", "runtime_ms"}`; bulk output goes to the
//! files named by `--out`. Invalid inputs exit with status 2 and a list of
//! problems, numeric failures with status 3.

mod args;
mod commands;

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::{json, Value};

use args::{Cli, Command};
use commands::{echo, load_family, Failure, Outcome};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

fn run(command: &Command) -> (Value, Outcome) {
    macro_rules! dispatch {
        ($args:expr, $f:path) => {{
            match load_family(&$args.family) {
                Ok(fam) => (echo(&fam.config, $args), $f($args, &fam)),
                Err(e) => (json!({ "args": $args }), Err(e)),
            }
        }};
    }
    match command {
        Command::Validate(a) => dispatch!(a, commands::validate),
        Command::SolveTilt(a) => dispatch!(a, commands::solve_tilt),
        Command::Edgeworth(a) => dispatch!(a, commands::edgeworth),
        Command::GkDensity(a) => dispatch!(a, commands::gk_density),
        Command::GkSample(a) => dispatch!(a, commands::gk_sample),
        Command::Tv(a) => dispatch!(a, commands::tv),
        Command::IsRun(a) => dispatch!(a, commands::is_run),
    }
}

/// Writes the envelope; a closed stdout (e.g. piped into `head`) is not an error.
fn emit(v: &Value) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{v}");
}

fn error_kind(e: &tiltcond::Error) -> String {
    let debug = format!("{e:?}");
    debug.split(|c: char| !c.is_alphanumeric()).next().unwrap_or_default().to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let message = e.render().to_string();
            emit(&json!({ "command": Value::Null, "errors": [message.trim_end()] }));
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if cli.threads == 0 {
        emit(&json!({ "command": cli.command.name(), "errors": ["--threads must be at least 1"] }));
        return ExitCode::from(EXIT_CONFIG);
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .expect("global thread pool is configured once");

    let start = Instant::now();
    let name = cli.command.name();
    let (config, outcome) = run(&cli.command);
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    match outcome {
        Ok(result) => {
            emit(&json!({ "command": name, "config": config, "result": result, "runtime_ms": runtime_ms }));
            ExitCode::SUCCESS
        }
        Err(Failure::Config(errors)) => {
            emit(&json!({ "command": name, "config": config, "errors": errors }));
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Numeric(e)) => {
            let error = json!({ "kind": error_kind(&e), "message": e.to_string() });
            emit(&json!({ "command": name, "config": config, "error": error }));
            ExitCode::from(EXIT_NUMERIC)
        }
    }
}
