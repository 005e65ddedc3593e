//! Command line front end for `starcalc-core`: JSON body documents in,
//! JSON or CSV reports out.

pub mod commands;
pub mod error;
pub mod report;
pub mod spec;

pub use commands::{run, Cli, Outcome};
pub use error::CliError;
pub use report::{emit_report, Format, ReportDocument};
pub use spec::{parse_spec, BodySpec, BodySpecDocument, PhiSpec};

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "STARCALC_THREADS";

/// Parses `STARCALC_THREADS`; unset or empty means "use all".
pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got '{v}'"
            ))),
        },
        _ => Ok(None),
    }
}
