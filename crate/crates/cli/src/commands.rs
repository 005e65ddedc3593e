use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use starcalc_core::additions::radial_minkowski_comb;
use starcalc_core::functionals::{
    dual_mixed_volume_i, lp_dual_mixed_volume, orlicz_dual_mixed_volume,
    orlicz_dual_projection_norm, volume, DualConeMeasure,
};
use starcalc_core::starbody::{radial_hausdorff, SphereRule, StarBody};
use starcalc_core::verify::{
    run_suite, verify_variational_limit, CaseId, SuiteConfig, VariationalProblem, DEFAULT_LADDER,
    DEFAULT_TOLERANCE,
};

use crate::error::CliError;
use crate::report::{Format, ReportDocument, RuleInfo};
use crate::spec::{parse_phi, parse_spec, BodySpecDocument, PhiRef, PhiSpec};

#[derive(Debug, Parser)]
#[command(
    name = "starcalc",
    version,
    about = "Orlicz dual Brunn-Minkowski computations on star bodies"
)]
pub struct Cli {
    /// Quadrature resolution [default: 1024 for n=2, 64 for n=3]
    #[arg(long, global = true)]
    pub resolution: Option<usize>,

    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, global = true, default_value_t = DEFAULT_TOLERANCE)]
    pub tolerance: f64,

    /// Output format [default: csv for plotdata, json otherwise]
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write the report here instead of stdout
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Record the wall-clock time in the report (breaks byte-identical reruns)
    #[arg(long, global = true)]
    pub stamp: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a functional of one or two bodies
    Compute(ComputeArgs),
    /// Run the verification suite on seeded random instances
    Verify(VerifyArgs),
    /// Evaluate a functional over a parameter grid
    Sweep(SweepArgs),
    /// Polar samples (theta, rho) of a planar body at the rule's nodes
    Plotdata(PlotArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Functional {
    Volume,
    DualMixedVolume,
    LpDualMixedVolume,
    OrliczDualMixedVolume,
    ProjectionNorm,
    ConeMass,
    RadialDistance,
}

impl Functional {
    fn name(self) -> &'static str {
        match self {
            Functional::Volume => "volume",
            Functional::DualMixedVolume => "dual_mixed_volume",
            Functional::LpDualMixedVolume => "lp_dual_mixed_volume",
            Functional::OrliczDualMixedVolume => "orlicz_dual_mixed_volume",
            Functional::ProjectionNorm => "projection_norm",
            Functional::ConeMass => "cone_mass",
            Functional::RadialDistance => "radial_distance",
        }
    }
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    pub functional: Functional,

    /// Body document (K)
    #[arg(long)]
    pub body: PathBuf,

    /// Second body document (L)
    #[arg(long)]
    pub other: Option<PathBuf>,

    /// φ: a name from the body document, inline JSON, or a JSON file
    #[arg(long)]
    pub phi: Option<String>,

    #[arg(long)]
    pub p: Option<f64>,

    /// Index i of the dual mixed volume Ṽ_i(K, L)
    #[arg(short, long)]
    pub i: Option<usize>,

    #[arg(long, default_value_t = 1.0)]
    pub k1: f64,

    #[arg(long, default_value_t = 1.0)]
    pub k2: f64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// `all` or a comma-separated list of case ids
    #[arg(long, default_value = "all")]
    pub suite: String,

    /// Random instances per case
    #[arg(long, default_value_t = 100)]
    pub instances: usize,

    #[arg(long, default_value_t = 2)]
    pub dim: usize,

    /// Also write the CSV summary (case, margin, pass) here
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(subcommand)]
    pub kind: SweepKind,
}

#[derive(Debug, Subcommand)]
pub enum SweepKind {
    /// Difference quotients of V(K +̌_{φ,ε} L) along an ε ladder
    Epsilon {
        #[arg(long)]
        body: PathBuf,
        #[arg(long)]
        other: PathBuf,
        /// φ₁ (and φ₂ unless --phi2 is given)
        #[arg(long)]
        phi: String,
        #[arg(long)]
        phi2: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        k: f64,
        #[arg(long, default_value_t = 1.0)]
        k1: f64,
        #[arg(long, default_value_t = 1.0)]
        k2: f64,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_LADDER)]
        ladder: Vec<f64>,
    },
    /// V(K +̃ tL) on a grid of t
    RadialComb {
        #[arg(long)]
        body: PathBuf,
        #[arg(long)]
        other: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.25, 0.5, 1.0, 2.0])]
        t: Vec<f64>,
    },
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub body: PathBuf,
}

/// A finished command: the report, its CSV columns and whether every
/// report in it passed.
#[derive(Debug)]
pub struct Outcome {
    pub document: ReportDocument,
    pub columns: &'static [&'static str],
    pub all_pass: bool,
    pub default_format: Format,
    /// CSV summary destination requested by `verify --summary`.
    pub summary: Option<PathBuf>,
}

struct Loaded {
    doc: BodySpecDocument,
    body: StarBody,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn load(path: &Path) -> Result<Loaded, CliError> {
    let doc = parse_spec(&read(path)?).map_err(|e| e.in_file(path))?;
    let body = doc.build().map_err(|e| e.in_file(path))?;
    Ok(Loaded { doc, body })
}

/// A name in `doc`'s φ table, inline JSON, or a path to a JSON file.
fn resolve_phi(arg: &str, doc: &BodySpecDocument) -> Result<PhiSpec, CliError> {
    if doc.phis.contains_key(arg) {
        return doc.phi(&PhiRef::Named(arg.to_owned()), "--phi");
    }
    if arg.trim_start().starts_with('{') {
        return parse_phi(arg);
    }
    let path = Path::new(arg);
    parse_phi(&read(path)?).map_err(|e| e.in_file(path))
}

fn rule_for(dim: usize, cli: &Cli, doc_resolution: Option<usize>) -> Result<SphereRule, CliError> {
    let rule = match cli.resolution.or(doc_resolution) {
        Some(r) => SphereRule::new(dim, r),
        None => SphereRule::default_for(dim),
    };
    rule.map_err(|e| CliError::Usage(format!("quadrature rule: {e}")))
}

fn need<T>(v: Option<T>, flag: &str, functional: Functional) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("{} needs {flag}", functional.name())))
}

fn finite(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

fn command_line(args: &[String]) -> String {
    args.iter().skip(1).cloned().collect::<Vec<_>>().join(" ")
}

pub fn run(cli: &Cli, args: &[String]) -> Result<Outcome, CliError> {
    let command = command_line(args);
    let wrap = |name: &str| {
        let name = name.to_owned();
        move |source| CliError::Core {
            command: name,
            source,
        }
    };
    let timestamp = cli
        .stamp
        .then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
    let mut outcome = Outcome {
        document: ReportDocument {
            command,
            timestamp,
            results: Vec::new(),
            rule: None,
            seed: None,
        },
        columns: &[],
        all_pass: true,
        default_format: Format::Json,
        summary: None,
    };
    match &cli.command {
        Command::Compute(a) => {
            let k = load(&a.body)?;
            let l = a.other.as_deref().map(load).transpose()?;
            let rule = rule_for(k.body.dim(), cli, k.doc.resolution)?;
            let f = a.functional;
            let other = || need(l.as_ref().map(|l| &l.body), "--other", f);
            let phi = || -> Result<_, CliError> {
                let spec = resolve_phi(need(a.phi.as_deref(), "--phi", f)?, &k.doc)?;
                spec.one_variable("--phi")
            };
            let run = wrap("compute");
            let value = match f {
                Functional::Volume => volume(&k.body, &rule).map_err(run)?,
                Functional::DualMixedVolume => {
                    dual_mixed_volume_i(&k.body, other()?, need(a.i, "-i", f)?, &rule)
                        .map_err(run)?
                }
                Functional::LpDualMixedVolume => {
                    lp_dual_mixed_volume(&k.body, other()?, need(a.p, "--p", f)?, &rule)
                        .map_err(run)?
                }
                Functional::OrliczDualMixedVolume => {
                    orlicz_dual_mixed_volume(&k.body, other()?, &phi()?, a.k1, a.k2, &rule)
                        .map_err(run)?
                }
                Functional::ProjectionNorm => {
                    orlicz_dual_projection_norm(&k.body, other()?, &phi()?, a.k1, a.k2, &rule)
                        .map_err(run)?
                }
                Functional::ConeMass => DualConeMeasure::new(&k.body, &rule)
                    .and_then(|m| m.total_mass(&rule))
                    .map_err(run)?,
                Functional::RadialDistance => {
                    radial_hausdorff(&k.body, other()?, &rule).map_err(run)?
                }
            };
            let mut inputs = Map::new();
            inputs.insert("body".into(), json!(a.body.display().to_string()));
            if let Some(o) = &a.other {
                inputs.insert("other".into(), json!(o.display().to_string()));
            }
            if let Some(phi) = &a.phi {
                inputs.insert("phi".into(), json!(phi));
            }
            if let Some(p) = a.p {
                inputs.insert("p".into(), finite(p));
            }
            if let Some(i) = a.i {
                inputs.insert("i".into(), json!(i));
            }
            if matches!(
                f,
                Functional::OrliczDualMixedVolume | Functional::ProjectionNorm
            ) {
                inputs.insert("k1".into(), finite(a.k1));
                inputs.insert("k2".into(), finite(a.k2));
            }
            outcome.document.results.push(json!({
                "functional": f.name(),
                "inputs": inputs,
                "value": finite(value),
                "rule_resolution": rule.resolution(),
            }));
            outcome.document.rule = Some(RuleInfo::of(&rule));
            outcome.columns = &["functional", "value", "rule_resolution"];
        }
        Command::Verify(a) => {
            let cases = if a.suite.eq_ignore_ascii_case("all") {
                CaseId::all().collect()
            } else {
                a.suite
                    .split(',')
                    .map(|s| s.trim().parse::<CaseId>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| CliError::Usage(format!("--suite: {e}")))?
            };
            let cfg = SuiteConfig {
                seed: cli.seed,
                dim: a.dim,
                resolution: cli.resolution,
                instances: a.instances,
                tolerance: cli.tolerance,
                cases,
            };
            let rule = cfg
                .rule()
                .map_err(|e| CliError::Usage(format!("quadrature rule: {e}")))?;
            let out = run_suite(&cfg).map_err(wrap("verify"))?;
            outcome.all_pass = out.all_pass();
            let doc = &mut outcome.document;
            for r in &out.reports {
                doc.results
                    .push(serde_json::to_value(r).expect("report serializes"));
            }
            for r in &out.limits {
                let mut v = serde_json::to_value(r).expect("report serializes");
                // same orientation as inequality reports: pass iff margin >= -tolerance
                v["margin"] = finite(-r.relative_error);
                doc.results.push(v);
            }
            doc.rule = Some(RuleInfo::of(&rule));
            doc.seed = Some(cli.seed);
            outcome.columns = &["case", "margin", "pass"];
            outcome.summary = a.summary.clone();
        }
        Command::Sweep(SweepArgs { kind }) => match kind {
            SweepKind::Epsilon {
                body,
                other,
                phi,
                phi2,
                k,
                k1,
                k2,
                ladder,
            } => {
                let kb = load(body)?;
                let lb = load(other)?;
                let rule = rule_for(kb.body.dim(), cli, kb.doc.resolution)?;
                let phi1 = resolve_phi(phi, &kb.doc)?.one_variable("--phi")?;
                let phi2 = match phi2 {
                    Some(p) => resolve_phi(p, &kb.doc)?.one_variable("--phi2")?,
                    None => phi1.clone(),
                };
                let problem = VariationalProblem {
                    k_body: kb.body,
                    l_body: lb.body,
                    phi1,
                    phi2,
                    k: *k,
                    k1: *k1,
                    k2: *k2,
                };
                let rep = verify_variational_limit(&problem, &rule, ladder)
                    .map_err(wrap("sweep epsilon"))?;
                for ((e, q), d) in rep.ladder.iter().zip(&rep.quotients).zip(&rep.distances) {
                    outcome.document.results.push(json!({
                        "epsilon": finite(*e),
                        "quotient": finite(*q),
                        "distance": finite(*d),
                    }));
                }
                outcome.document.rule = Some(RuleInfo::of(&rule));
                outcome.columns = &["epsilon", "quotient", "distance"];
            }
            SweepKind::RadialComb { body, other, t } => {
                let kb = load(body)?;
                let lb = load(other)?;
                let rule = rule_for(kb.body.dim(), cli, kb.doc.resolution)?;
                for &ti in t {
                    let v = radial_minkowski_comb(&kb.body, &lb.body, 1.0, ti)
                        .and_then(|s| volume(&s, &rule))
                        .map_err(wrap("sweep radial-comb"))?;
                    outcome
                        .document
                        .results
                        .push(json!({"t": finite(ti), "volume": finite(v)}));
                }
                outcome.document.rule = Some(RuleInfo::of(&rule));
                outcome.columns = &["t", "volume"];
            }
        },
        Command::Plotdata(a) => {
            let k = load(&a.body)?;
            if k.body.dim() != 2 {
                return Err(CliError::Usage(format!(
                    "plotdata needs a planar body, {} has dimension {}",
                    a.body.display(),
                    k.body.dim()
                )));
            }
            let rule = rule_for(2, cli, k.doc.resolution)?;
            let rho = k.body.samples(&rule).map_err(wrap("plotdata"))?;
            let theta = rule.angles().expect("planar rules are trapezoidal");
            for (t, r) in theta.iter().zip(rho.iter()) {
                outcome
                    .document
                    .results
                    .push(json!({"theta": finite(*t), "rho": finite(*r)}));
            }
            outcome.document.rule = Some(RuleInfo::of(&rule));
            outcome.columns = &["theta", "rho"];
            outcome.default_format = Format::Csv;
        }
    }
    Ok(outcome)
}
