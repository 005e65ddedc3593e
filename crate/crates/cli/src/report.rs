//! Report documents and their JSON / CSV renderings.
//!
//! Floats are written in scientific notation with 17 significant digits so
//! reruns with the same inputs produce byte-identical files; non-finite
//! values become `null` (JSON) or an empty cell (CSV).

use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;
use starcalc_core::starbody::{RuleKind, SphereRule};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub command: String,
    /// Only set with `--stamp`; reports are otherwise reproducible bytewise.
    pub timestamp: Option<String>,
    pub results: Vec<Value>,
    pub rule: Option<RuleInfo>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleInfo {
    pub dim: usize,
    pub resolution: usize,
    pub kind: String,
}

impl RuleInfo {
    pub fn of(rule: &SphereRule) -> Self {
        let kind = match rule.kind() {
            RuleKind::Trapezoid => "trapezoid".to_owned(),
            RuleKind::GaussProduct => "gauss_product".to_owned(),
            RuleKind::MonteCarlo { seed } => format!("monte_carlo(seed={seed})"),
        };
        RuleInfo {
            dim: rule.dim(),
            resolution: rule.resolution(),
            kind,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

struct SciFormatter(PrettyFormatter<'static>);

macro_rules! delegate {
    ($($name:ident $(($arg:ident: $ty:ty))?),* $(,)?) => {
        $(
            fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)?) -> io::Result<()> {
                self.0.$name(w $(, $arg)?)
            }
        )*
    };
}

impl Formatter for SciFormatter {
    delegate!(
        begin_array,
        end_array,
        begin_array_value(first: bool),
        end_array_value,
        begin_object,
        end_object,
        begin_object_key(first: bool),
        begin_object_value,
        end_object_value,
    );

    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{}", sci(value))
    }
}

/// `{:.16e}`, i.e. 17 significant digits.
pub fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

/// Pretty JSON with fixed-precision floats and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut buf, SciFormatter(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .expect("serializing to memory cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

fn cell(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::Number(n)) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => u.to_string(),
            (None, Some(i)) => i.to_string(),
            _ => n.as_f64().map(sci).unwrap_or_default(),
        },
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
    }
}

/// One CSV row per result, taking `columns` from each result object.
pub fn to_csv(doc: &ReportDocument, columns: &[&str]) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Usage(format!("csv: {e}"));
    w.write_record(columns).map_err(csv_err)?;
    for r in &doc.results {
        w.write_record(columns.iter().map(|c| cell(r.get(c))))
            .map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Usage(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv of UTF-8 cells"))
}

/// Renders `doc`; JSON keeps the full document, CSV only the rows.
pub fn render(doc: &ReportDocument, format: Format, columns: &[&str]) -> Result<String, CliError> {
    match format {
        Format::Json => Ok(to_json(doc)),
        Format::Csv => to_csv(doc, columns),
    }
}

/// Writes to `path`, or stdout when `None`.
pub fn emit_report(
    doc: &ReportDocument,
    format: Format,
    columns: &[&str],
    path: Option<&Path>,
) -> Result<(), CliError> {
    let text = render(doc, format, columns)?;
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_owned(),
            source,
        }),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}
