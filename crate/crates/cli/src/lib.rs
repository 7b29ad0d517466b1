//! The `dioph` command line: every library operation as a subcommand with
//! JSON or CSV output on stdout.
//!
//! Exit codes: 0 success, 2 bad arguments or preconditions, 3 resource,
//! convergence or I/O failures, 1 failed self checks.

use std::ffi::OsString;
use std::io::Write;
use std::time::Instant;

use clap::Parser;

pub mod args;
mod commands;
pub mod selftest;

pub use args::Cli;
use dioph_core::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_SELFTEST_FAILED: i32 = 1;
pub const EXIT_ARGUMENT: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

pub fn exit_code(e: &Error) -> i32 {
    if e.is_argument_like() {
        EXIT_ARGUMENT
    } else {
        EXIT_RESOURCE
    }
}

/// Parses `argv` and runs the command; primary output goes to `out` (or
/// `--out`), diagnostics to `err`.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ARGUMENT } else { EXIT_OK };
            let _ = write!(err, "{}", e.render());
            if !e.use_stderr() {
                let _ = write!(out, "{}", e.render());
            }
            return code;
        }
    };
    if cli.workers == 0 {
        let _ = writeln!(err, "error: --workers must be at least 1");
        return EXIT_ARGUMENT;
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.workers).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start worker pool: {e}");
            return EXIT_RESOURCE;
        }
    };
    let start = Instant::now();
    let result = pool.install(|| commands::dispatch(&cli));
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    let code = match result {
        Ok(outcome) => {
            let written = match &cli.out {
                Some(path) if !outcome.stdout => std::fs::write(path, &outcome.bytes).map_err(Error::from),
                _ => out.write_all(&outcome.bytes).map_err(Error::from),
            };
            match written {
                Ok(()) => outcome.code,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    exit_code(&e)
                }
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    };
    if let Some(path) = &cli.timing {
        let body = serde_json::json!({ "elapsed_ms": elapsed_ms, "exit_code": code });
        if let Err(e) = std::fs::write(path, format!("{body}\n")) {
            let _ = writeln!(err, "error: cannot write timing file: {e}");
        }
    }
    code
}
