//! Command-line front end of `downfold-core`: configuration, file I/O,
//! reports and the seeded verification suites.

pub mod config;
pub mod error;
pub mod estimate;
pub mod io;
pub mod run;
pub mod verify;

pub use config::{Cli, Command};
pub use error::{CliError, CliResult};

use serde_json::Value;
use std::io::Write;

/// Worker threads for the verification suites, from `DOWNFOLD_THREADS`.
pub fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("DOWNFOLD_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("DOWNFOLD_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().ok();
    Ok(())
}

fn emit(out: Option<&std::path::Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => {
            if let Some(d) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(d)?;
            }
            std::fs::write(p, text)?;
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Execute a parsed command, printing its report.
pub fn execute(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    match cli.command {
        Command::Run(a) => {
            let cfg = config::RunConfig::resolve(&a)?;
            let o = run::cmd_run(&cfg)?;
            emit(None, &io::to_json_string(&o.summary)?)
        }
        Command::Verify(a) => {
            let size = a.size.unwrap_or_else(|| verify::default_size(a.suite));
            let rep = verify::run_suite(a.suite, a.seed, size, a.cases)?;
            emit(a.out.as_deref(), &io::to_json_string(&rep)?)?;
            rep.into_result().map(|_| ())
        }
        Command::Estimate(a) => {
            let rep = estimate::cmd_estimate(&a)?;
            emit(a.out.as_deref(), &io::to_json_string(&rep)?)
        }
        Command::Factorize(a) => {
            let rep = run::cmd_factorize(&a)?;
            emit(None, &io::to_json_string(&rep)?)
        }
    }
}

/// Parse `args` and execute; returns the exit code and prints errors as
/// JSON on stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    use clap::Parser;
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let err: Value = serde_json::json!({
                "error": { "kind": "usage", "message": e.to_string().trim_end(), "exit_code": 2 }
            });
            eprintln!("{err}");
            return 2;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
