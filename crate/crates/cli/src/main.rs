use std::process::ExitCode;

use clap::Parser;
use starcalc_cli::report::{emit_report, to_csv};
use starcalc_cli::{run, threads_from_env, Cli, CliError};

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let cli = Cli::parse_from(&args);
    match execute(&cli, &args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("starcalc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn execute(cli: &Cli, args: &[String]) -> Result<bool, CliError> {
    starcalc_core::exec::configure_threads(threads_from_env()?);
    let out = run(cli, args)?;
    let format = cli.format.unwrap_or(out.default_format);
    emit_report(&out.document, format, out.columns, cli.output.as_deref())?;
    if let Some(path) = &out.summary {
        let text = to_csv(&out.document, out.columns)?;
        std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
    }
    if !out.all_pass {
        let failed = out
            .document
            .results
            .iter()
            .filter(|r| r["pass"] == false)
            .count();
        eprintln!("starcalc: {failed} report(s) failed");
    }
    Ok(out.all_pass)
}
