//! JSON documents describing star bodies and Orlicz functions.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use serde::de::{self, Deserializer, MapAccess, Visitor};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use starcalc_core::additions::{lp_radial_sum, orlicz_sum, radial_minkowski_comb, SumSpec};
use starcalc_core::phi::{OrliczFunction1, OrliczFunctionM};
use starcalc_core::starbody::StarBody;

use crate::error::CliError;

pub const SPEC_VERSION: u32 = 1;

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodySpecDocument {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    pub body: BodySpec,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub phis: BTreeMap<String, PhiSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodySpec {
    Ball {
        r: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
    },
    LpBall {
        p: f64,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
    },
    LinearImage {
        matrix: Vec<Vec<f64>>,
        body: Box<BodySpec>,
    },
    RadialTrigPoly {
        a0: f64,
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
    Dilate {
        c: f64,
        body: Box<BodySpec>,
    },
    OrliczSum {
        phi: PhiRef,
        #[serde(default = "one")]
        k: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ks: Option<Vec<f64>>,
        bodies: Vec<BodySpec>,
    },
    LpRadialSum {
        p: f64,
        bodies: Vec<BodySpec>,
    },
    RadialComb {
        lambda: f64,
        mu: f64,
        bodies: Vec<BodySpec>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiSpec {
    Power {
        q: f64,
    },
    Neglog {
        #[serde(default = "yes")]
        normalized: bool,
    },
    Sum {
        terms: Vec<PhiTerm>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiTerm {
    pub phi: PhiSpec,
    #[serde(default = "one")]
    pub weight: f64,
}

/// A φ given inline or by a name from the document's `phis` table.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum PhiRef {
    Named(String),
    Inline(PhiSpec),
}

impl<'de> Deserialize<'de> for PhiRef {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct RefVisitor;

        impl<'de> Visitor<'de> for RefVisitor {
            type Value = PhiRef;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a φ name or a φ object")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<PhiRef, E> {
                Ok(PhiRef::Named(v.to_owned()))
            }

            fn visit_map<A: MapAccess<'de>>(self, map: A) -> Result<PhiRef, A::Error> {
                PhiSpec::deserialize(de::value::MapAccessDeserializer::new(map)).map(PhiRef::Inline)
            }
        }

        d.deserialize_any(RefVisitor)
    }
}

fn schema(location: &str, message: impl Into<String>) -> CliError {
    CliError::Schema {
        location: location.to_owned(),
        message: message.into(),
    }
}

fn core_err(location: &str) -> impl Fn(starcalc_core::Error) -> CliError + '_ {
    move |e| schema(location, e.to_string())
}

fn positive(location: &str, name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(schema(location, format!("{name} must be positive")))
    }
}

fn check<'a, T: Deserialize<'a>>(v: &'a Value) -> Result<(), serde_json::Error> {
    T::deserialize(v).map(drop)
}

// Internally tagged enums are buffered by serde, so deserializer-level path
// tracking stops at the first tagged node. Instead descend into the child
// slots and report the deepest subtree that fails on its own.
fn body_error(v: &Value, at: &str) -> CliError {
    if let Some(b) = v.get("body") {
        if check::<BodySpec>(b).is_err() {
            return body_error(b, &format!("{at}.body"));
        }
    }
    if let Some(Value::Array(items)) = v.get("bodies") {
        for (i, b) in items.iter().enumerate() {
            if check::<BodySpec>(b).is_err() {
                return body_error(b, &format!("{at}.bodies[{i}]"));
            }
        }
    }
    if let Some(p) = v.get("phi") {
        if check::<PhiRef>(p).is_err() {
            return phi_error(p, &format!("{at}.phi"));
        }
    }
    match check::<BodySpec>(v) {
        Err(e) => schema(at, e.to_string()),
        Ok(()) => schema(at, "invalid body"),
    }
}

fn phi_error(v: &Value, at: &str) -> CliError {
    if let Some(Value::Array(terms)) = v.get("terms") {
        for (i, t) in terms.iter().enumerate() {
            if let Some(p) = t.get("phi") {
                if check::<PhiSpec>(p).is_err() {
                    return phi_error(p, &format!("{at}.terms[{i}].phi"));
                }
            }
            if let Err(e) = check::<PhiTerm>(t) {
                return schema(&format!("{at}.terms[{i}]"), e.to_string());
            }
        }
    }
    match check::<PhiRef>(v) {
        Err(e) => schema(at, e.to_string()),
        Ok(()) => schema(at, "invalid φ"),
    }
}

fn document_from_value(v: &Value) -> Result<BodySpecDocument, CliError> {
    BodySpecDocument::deserialize(v).map_err(|e| {
        if let Some(b) = v.get("body") {
            if check::<BodySpec>(b).is_err() {
                return body_error(b, "body");
            }
        }
        if let Some(Value::Object(phis)) = v.get("phis") {
            for (name, p) in phis {
                if check::<PhiSpec>(p).is_err() {
                    return phi_error(p, &format!("phis.{name}"));
                }
            }
        }
        schema("document", e.to_string())
    })
}

/// Parses and validates a body document. A bare body object (one with a
/// `"type"` key) is accepted as the `body` of a version-1 document.
pub fn parse_spec(text: &str) -> Result<BodySpecDocument, CliError> {
    let value: Value = serde_json::from_str(text).map_err(CliError::Json)?;
    let doc = if value.get("type").is_some() {
        BodySpecDocument::new(
            BodySpec::deserialize(&value).map_err(|_| body_error(&value, "body"))?,
        )
    } else {
        document_from_value(&value)?
    };
    doc.build()?;
    Ok(doc)
}

/// Parses a φ given as inline JSON.
pub fn parse_phi(text: &str) -> Result<PhiSpec, CliError> {
    let value: Value = serde_json::from_str(text).map_err(CliError::Json)?;
    PhiSpec::deserialize(&value).map_err(|_| phi_error(&value, "phi"))
}

impl BodySpecDocument {
    pub fn new(body: BodySpec) -> Self {
        BodySpecDocument {
            version: SPEC_VERSION,
            dim: None,
            body,
            phis: BTreeMap::new(),
            resolution: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim.or_else(|| self.body.intrinsic_dim()).unwrap_or(2)
    }

    pub fn build(&self) -> Result<StarBody, CliError> {
        if self.version != SPEC_VERSION {
            return Err(schema(
                "version",
                format!(
                    "unsupported version {} (expected {SPEC_VERSION})",
                    self.version
                ),
            ));
        }
        if let Some(d) = self.dim {
            if d < 2 {
                return Err(schema("dim", "dim must be at least 2"));
            }
        }
        if let Some(r) = self.resolution {
            if r == 0 {
                return Err(schema("resolution", "resolution must be positive"));
            }
        }
        for (name, phi) in &self.phis {
            phi.check(&format!("phis.{name}"))?;
        }
        self.body.build_at("body", self.dim(), self)
    }

    pub fn phi(&self, r: &PhiRef, location: &str) -> Result<PhiSpec, CliError> {
        match r {
            PhiRef::Inline(spec) => Ok(spec.clone()),
            PhiRef::Named(name) => self
                .phis
                .get(name)
                .cloned()
                .ok_or_else(|| schema(location, format!("unknown φ name '{name}'"))),
        }
    }
}

impl BodySpec {
    /// Dimension fixed by the node itself, if any.
    pub fn intrinsic_dim(&self) -> Option<usize> {
        match self {
            BodySpec::Ball { dim, .. } | BodySpec::LpBall { dim, .. } => *dim,
            BodySpec::LinearImage { matrix, .. } => Some(matrix.len()),
            BodySpec::RadialTrigPoly { .. } => Some(2),
            BodySpec::Dilate { body, .. } => body.intrinsic_dim(),
            BodySpec::OrliczSum { bodies, .. }
            | BodySpec::LpRadialSum { bodies, .. }
            | BodySpec::RadialComb { bodies, .. } => {
                bodies.iter().find_map(BodySpec::intrinsic_dim)
            }
        }
    }

    /// Nesting depth; a leaf has depth 1.
    pub fn depth(&self) -> usize {
        match self {
            BodySpec::Ball { .. } | BodySpec::LpBall { .. } | BodySpec::RadialTrigPoly { .. } => 1,
            BodySpec::LinearImage { body, .. } | BodySpec::Dilate { body, .. } => 1 + body.depth(),
            BodySpec::OrliczSum { bodies, .. }
            | BodySpec::LpRadialSum { bodies, .. }
            | BodySpec::RadialComb { bodies, .. } => {
                1 + bodies.iter().map(BodySpec::depth).max().unwrap_or(0)
            }
        }
    }

    fn build_at(&self, at: &str, dim: usize, doc: &BodySpecDocument) -> Result<StarBody, CliError> {
        if let Some(d) = self.intrinsic_dim() {
            if d != dim {
                return Err(schema(
                    at,
                    format!("dimension mismatch: expected {dim}, found {d}"),
                ));
            }
        }
        let children = |bodies: &[BodySpec],
                        arity: Option<usize>|
         -> Result<Vec<StarBody>, CliError> {
            match arity {
                Some(m) if bodies.len() != m => {
                    return Err(schema(
                        at,
                        format!("expected {m} bodies, found {}", bodies.len()),
                    ))
                }
                None if bodies.is_empty() => return Err(schema(at, "bodies must not be empty")),
                _ => {}
            }
            bodies
                .iter()
                .enumerate()
                .map(|(i, b)| b.build_at(&format!("{at}.bodies[{i}]"), dim, doc))
                .collect()
        };
        match self {
            BodySpec::Ball { r, .. } => {
                positive(&format!("{at}.r"), "r", *r)?;
                StarBody::ball(dim, *r).map_err(core_err(at))
            }
            BodySpec::LpBall { p, scale, .. } => {
                positive(&format!("{at}.p"), "p", *p)?;
                positive(&format!("{at}.scale"), "scale", *scale)?;
                StarBody::lp_ball(dim, *p, *scale).map_err(core_err(at))
            }
            BodySpec::LinearImage { matrix, body } => {
                if matrix.iter().any(|row| row.len() != dim) {
                    return Err(schema(&format!("{at}.matrix"), "matrix must be square"));
                }
                let inner = body.build_at(&format!("{at}.body"), dim, doc)?;
                let m = DMatrix::from_fn(dim, dim, |i, j| matrix[i][j]);
                inner
                    .linear_image(m)
                    .map_err(core_err(&format!("{at}.matrix")))
            }
            BodySpec::RadialTrigPoly { a0, cos, sin } => {
                positive(&format!("{at}.a0"), "a0", *a0)?;
                StarBody::radial_trig_poly(*a0, cos.clone(), sin.clone()).map_err(core_err(at))
            }
            BodySpec::Dilate { c, body } => {
                positive(&format!("{at}.c"), "c", *c)?;
                body.build_at(&format!("{at}.body"), dim, doc)?
                    .dilate(*c)
                    .map_err(core_err(at))
            }
            BodySpec::OrliczSum { phi, k, ks, bodies } => {
                let bodies = children(bodies, None)?;
                positive(&format!("{at}.k"), "k", *k)?;
                let ks = match ks {
                    Some(ks) => {
                        for (i, v) in ks.iter().enumerate() {
                            positive(&format!("{at}.ks[{i}]"), "ks", *v)?;
                        }
                        ks.clone()
                    }
                    None => vec![1.0; bodies.len()],
                };
                let phi_at = format!("{at}.phi");
                let phi = doc.phi(phi, &phi_at)?.m_ary(bodies.len(), &phi_at)?;
                let spec = SumSpec::new(bodies, phi, *k, ks).map_err(core_err(at))?;
                Ok(orlicz_sum(spec))
            }
            BodySpec::LpRadialSum { p, bodies } => {
                positive(&format!("{at}.p"), "p", *p)?;
                let b = children(bodies, Some(2))?;
                lp_radial_sum(&b[0], &b[1], *p).map_err(core_err(at))
            }
            BodySpec::RadialComb { lambda, mu, bodies } => {
                let b = children(bodies, Some(2))?;
                radial_minkowski_comb(&b[0], &b[1], *lambda, *mu).map_err(core_err(at))
            }
        }
    }
}

impl PhiSpec {
    fn check(&self, at: &str) -> Result<(), CliError> {
        match self {
            PhiSpec::Sum { terms } => {
                if terms.is_empty() {
                    return Err(schema(&format!("{at}.terms"), "terms must not be empty"));
                }
                for (i, t) in terms.iter().enumerate() {
                    positive(&format!("{at}.terms[{i}].weight"), "weight", t.weight)?;
                    t.phi.one_variable(&format!("{at}.terms[{i}].phi"))?;
                }
                Ok(())
            }
            other => other.one_variable(at).map(drop),
        }
    }

    /// The single-variable function named by a power or neglog spec.
    pub fn one_variable(&self, at: &str) -> Result<OrliczFunction1, CliError> {
        match self {
            PhiSpec::Power { q } => OrliczFunction1::power(*q).map_err(core_err(at)),
            PhiSpec::Neglog { normalized: true } => Ok(OrliczFunction1::neglog()),
            PhiSpec::Neglog { normalized: false } => Ok(OrliczFunction1::neglog_unnormalized()),
            PhiSpec::Sum { .. } => Err(schema(at, "expected a one-variable φ (power or neglog)")),
        }
    }

    /// φ on `arity` variables: power and neglog act coordinatewise with unit
    /// weights, a sum needs one term per variable.
    pub fn m_ary(&self, arity: usize, at: &str) -> Result<OrliczFunctionM, CliError> {
        let terms = match self {
            PhiSpec::Sum { terms } => {
                if terms.len() != arity {
                    return Err(schema(
                        &format!("{at}.terms"),
                        format!("expected {arity} terms, found {}", terms.len()),
                    ));
                }
                self.check(at)?;
                terms
                    .iter()
                    .enumerate()
                    .map(|(i, t)| {
                        Ok((
                            t.phi.one_variable(&format!("{at}.terms[{i}].phi"))?,
                            t.weight,
                        ))
                    })
                    .collect::<Result<Vec<_>, CliError>>()?
            }
            single => vec![(single.one_variable(at)?, 1.0); arity],
        };
        OrliczFunctionM::sum(terms).map_err(core_err(at))
    }
}
