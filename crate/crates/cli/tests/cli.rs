use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use starcalc_cli::{parse_spec, BodySpec, CliError, ReportDocument};
use tempfile::TempDir;

fn starcalc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_starcalc"))
        .args(args)
        .env_remove("STARCALC_THREADS")
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn report(out: &Output) -> ReportDocument {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "{e}: {}{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

const ORLICZ_DOC: &str = r#"{
  "version": 1,
  "phis": {"p3": {"type": "power", "q": 1.5}},
  "body": {
    "type": "orlicz_sum", "phi": "p3", "k": 1.0, "ks": [1.0, 1.0],
    "bodies": [
      {"type": "lp_ball", "p": 1.0, "scale": 1.0},
      {"type": "lp_ball", "p": 4.0, "scale": 0.8}
    ]
  }
}"#;

#[test]
fn compute_ball_volume() {
    let dir = TempDir::new().unwrap();
    let ball = write(&dir, "ball2.json", r#"{"type":"ball","r":2.0}"#);
    let out = starcalc(&["compute", "volume", "--body", s(&ball)]);
    assert_eq!(out.status.code(), Some(0));
    let doc = report(&out);
    assert_eq!(doc.results.len(), 1);
    let r = &doc.results[0];
    assert_eq!(r["functional"], "volume");
    assert_eq!(r["rule_resolution"], 1024);
    assert!((r["value"].as_f64().unwrap() - 12.56637061).abs() < 1e-8);
    assert!(String::from_utf8_lossy(&out.stdout).contains("1.25663706143591"));
    assert_eq!(doc.timestamp, None);

    let csv = starcalc(&["--format", "csv", "compute", "volume", "--body", s(&ball)]);
    let text = String::from_utf8(csv.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "functional,value,rule_resolution");
    assert!(lines[1].starts_with("volume,1.2566370614359"));
}

#[test]
fn compute_two_body_functionals() {
    let dir = TempDir::new().unwrap();
    let k = write(&dir, "k.json", r#"{"type":"ball","r":1.0}"#);
    let l = write(&dir, "l.json", r#"{"type":"ball","r":2.0}"#);
    let value = |args: &[&str]| -> f64 {
        let out = starcalc(args);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        report(&out).results[0]["value"].as_f64().unwrap()
    };
    // Ṽ_1(B, 2B) = (1/2)∫ρ_B ρ_{2B} = 2π
    let v1 = value(&[
        "compute",
        "dual-mixed-volume",
        "--body",
        s(&k),
        "--other",
        s(&l),
        "-i",
        "1",
    ]);
    assert!((v1 - 2.0 * std::f64::consts::PI).abs() < 1e-12);
    // (Ṽ_{-p}(B,2B)/V(B))^{1/(n+p)} reversed: projection norm of dilates is c = 2
    let norm = value(&[
        "compute",
        "projection-norm",
        "--body",
        s(&k),
        "--other",
        s(&l),
        "--phi",
        r#"{"type":"power","q":2}"#,
    ]);
    assert!((norm - 2.0).abs() < 1e-9, "{norm}");
    let mass = value(&["compute", "cone-mass", "--body", s(&k)]);
    assert!((mass - 1.0).abs() < 1e-12);
    let d = value(&[
        "compute",
        "radial-distance",
        "--body",
        s(&k),
        "--other",
        s(&l),
    ]);
    assert!((d - 1.0).abs() < 1e-15);
}

#[test]
fn schema_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", r#"{"type":"ball","r":-1.0}"#);
    let out = starcalc(&["compute", "volume", "--body", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("body.r: r must be positive"), "{err}");

    let nested = write(
        &dir,
        "nested.json",
        r#"{"version":1,"body":{"type":"dilate","c":2,"body":{"type":"lp_ball","p":"two"}}}"#,
    );
    let out = starcalc(&["compute", "volume", "--body", s(&nested)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("body.body:"));

    let missing = dir.path().join("missing.json");
    let out = starcalc(&["compute", "volume", "--body", s(&missing)]);
    assert_eq!(out.status.code(), Some(2));

    let ball = write(&dir, "ball.json", r#"{"type":"ball","r":1.0}"#);
    let out = starcalc(&["compute", "lp-dual-mixed-volume", "--body", s(&ball)]);
    assert_eq!(out.status.code(), Some(2));
    let ball3 = write(&dir, "ball3.json", r#"{"type":"ball","r":1.0,"dim":3}"#);
    let out = starcalc(&[
        "compute",
        "radial-distance",
        "--body",
        s(&ball),
        "--other",
        s(&ball3),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exit_code_classes() {
    use starcalc_core::Error;
    let core = |e: Error| CliError::Core {
        command: "verify".into(),
        source: e.context("BM_5_6 instance 3"),
    };
    assert_eq!(core(Error::Solver("no bracket".into())).exit_code(), 3);
    assert_eq!(
        core(Error::FixedPoint {
            iterations: 500,
            trace: vec![]
        })
        .exit_code(),
        3
    );
    assert_eq!(
        core(Error::Precondition("L not inside K".into())).exit_code(),
        2
    );
}

#[test]
fn threads_env_is_validated() {
    let dir = TempDir::new().unwrap();
    let ball = write(&dir, "ball.json", r#"{"type":"ball","r":1.0}"#);
    let run = |v: &str| {
        Command::new(env!("CARGO_BIN_EXE_starcalc"))
            .args(["compute", "volume", "--body", s(&ball)])
            .env("STARCALC_THREADS", v)
            .output()
            .unwrap()
            .status
            .code()
    };
    assert_eq!(run("1"), Some(0));
    assert_eq!(run("zero"), Some(2));
}

#[test]
fn verify_is_deterministic_and_summarised() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("summary.csv");
    let args = [
        "--seed",
        "7",
        "--resolution",
        "256",
        "verify",
        "--suite",
        "all",
        "--instances",
        "2",
        "--summary",
        s(&csv),
    ];
    let a = starcalc(&args);
    assert_eq!(
        a.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&a.stderr)
    );
    let b = starcalc(&args);
    assert_eq!(a.stdout, b.stdout);

    let doc = report(&a);
    assert_eq!(doc.seed, Some(7));
    assert_eq!(doc.rule.as_ref().unwrap().resolution, 256);
    assert!(doc.results.iter().all(|r| r["pass"] == true));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "case,margin,pass");
    assert_eq!(lines.len(), doc.results.len() + 1);
    assert!(lines.iter().any(|l| l.starts_with("LIMIT_4_5,")));
    assert!(!text.contains('\r'));
}

#[test]
fn ten_reports_give_ten_rows() {
    let out = starcalc(&[
        "--format",
        "csv",
        "--resolution",
        "256",
        "verify",
        "--suite",
        "MINKOWSKI_5_5",
        "--instances",
        "9",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 11);
    assert!(text
        .lines()
        .skip(1)
        .all(|l| l.starts_with("MINKOWSKI_5_5,") && l.ends_with(",true")));
}

#[test]
fn failed_reports_exit_1() {
    // at a tolerance far below rounding error some equality-case margins are
    // slightly negative
    let out = starcalc(&[
        "--tolerance",
        "1e-300",
        "--resolution",
        "128",
        "verify",
        "--suite",
        "HB_1_4,MINKOWSKI_5_5,PROJ_7_4,LOG_6_5",
        "--instances",
        "4",
    ]);
    let doc = report(&out);
    let failed = doc.results.iter().filter(|r| r["pass"] == false).count();
    assert!(failed > 0);
    assert_eq!(out.status.code(), Some(1));

    let out = starcalc(&["verify", "--suite", "NOT_A_CASE"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn plotdata_rows() {
    let dir = TempDir::new().unwrap();
    let trig = write(
        &dir,
        "trig.json",
        r#"{"type":"radial_trig_poly","a0":1.0,"cos":[0,0,0.3],"sin":[]}"#,
    );
    let out = starcalc(&["plotdata", "--body", s(&trig)]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("theta,rho"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (t, r) = l.split_once(',').unwrap();
            (t.parse().unwrap(), r.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 1024);
    let min = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    assert!(min > 0.0);
    assert!((min - 0.7).abs() < 1e-12);
    assert!(rows.windows(2).all(|w| w[1].0 > w[0].0));

    let ball3 = write(&dir, "ball3.json", r#"{"type":"ball","r":1.0,"dim":3}"#);
    assert_eq!(
        starcalc(&["plotdata", "--body", s(&ball3)]).status.code(),
        Some(2)
    );
}

#[test]
fn sweeps() {
    let dir = TempDir::new().unwrap();
    let ball = write(&dir, "ball.json", r#"{"type":"ball","r":1.0}"#);
    let out = starcalc(&[
        "sweep",
        "radial-comb",
        "--body",
        s(&ball),
        "--other",
        s(&ball),
    ]);
    assert_eq!(out.status.code(), Some(0));
    for r in report(&out).results {
        let t = r["t"].as_f64().unwrap();
        let v = r["volume"].as_f64().unwrap();
        assert!((v - std::f64::consts::PI * (1.0 + t).powi(2)).abs() < 1e-12 * v);
    }

    let out = starcalc(&[
        "--resolution",
        "256",
        "sweep",
        "epsilon",
        "--body",
        s(&ball),
        "--other",
        s(&ball),
        "--phi",
        r#"{"type":"power","q":2}"#,
        "--ladder",
        "1e-2,1e-3,1e-4",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let res = report(&out).results;
    assert_eq!(res.len(), 3);
    let err = |r: &Value| (r["quotient"].as_f64().unwrap() - std::f64::consts::PI).abs();
    assert!(err(&res[2]) < err(&res[0]));
}

#[test]
fn orlicz_document_round_trips() {
    let doc = parse_spec(ORLICZ_DOC).unwrap();
    assert_eq!(doc.body.depth(), 2);
    let back = parse_spec(&serde_json::to_string(&doc).unwrap()).unwrap();
    assert_eq!(back, doc);
    match &doc.body {
        BodySpec::OrliczSum { bodies, .. } => assert_eq!(bodies.len(), 2),
        other => panic!("{other:?}"),
    }

    let dir = TempDir::new().unwrap();
    let path = write(&dir, "sum.json", ORLICZ_DOC);
    let out = starcalc(&["compute", "volume", "--body", s(&path)]);
    assert_eq!(out.status.code(), Some(0));
    let parsed = report(&out);
    let again: ReportDocument =
        serde_json::from_str(&starcalc_cli::report::to_json(&parsed)).unwrap();
    assert_eq!(again, parsed);
}

#[test]
fn stamp_adds_timestamp() {
    let dir = TempDir::new().unwrap();
    let ball = write(&dir, "ball.json", r#"{"type":"ball","r":1.0}"#);
    let out_path = dir.path().join("out.json");
    let out = starcalc(&[
        "--stamp",
        "-o",
        s(&out_path),
        "compute",
        "volume",
        "--body",
        s(&ball),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let doc: ReportDocument =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert!(doc.timestamp.unwrap().ends_with('Z'));
}
