//! Executable checks of the dual Brunn-Minkowski inequalities and of the
//! structural properties of Orlicz addition.
//!
//! Every check produces a report whose margin is oriented so that a
//! non-negative value means the statement holds.

mod inequalities;
mod limits;
pub mod random;
mod structure;
mod suite;

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::starbody::{SphereRule, StarBody};
use crate::Result;

pub use inequalities::{verify_inequality, Inequality};
pub use limits::{verify_variational_limit, VariationalProblem, DEFAULT_LADDER};
pub use structure::{verify_structure, StructureCheck};
pub use suite::{run_suite, SuiteConfig, SuiteOutcome};

/// Default tolerance for inequality and structure reports.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Threshold on the normalized variance of ρ_L/ρ_K for flagging dilates.
pub const DILATE_THRESHOLD: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CaseId {
    Minkowski55,
    Bm56,
    Jensen54,
    Log65,
    Log66,
    Proj74,
    Hb14,
    LpCor55,
    LpCor57,
    LpCor58,
    Monotone,
    GlCovariant,
    Continuous,
    PolyExpansion,
    Limit45,
}

impl CaseId {
    pub const INEQUALITIES: [CaseId; 10] = [
        CaseId::Minkowski55,
        CaseId::Bm56,
        CaseId::Jensen54,
        CaseId::Log65,
        CaseId::Log66,
        CaseId::Proj74,
        CaseId::Hb14,
        CaseId::LpCor55,
        CaseId::LpCor57,
        CaseId::LpCor58,
    ];

    pub const STRUCTURE: [CaseId; 4] = [
        CaseId::Monotone,
        CaseId::GlCovariant,
        CaseId::Continuous,
        CaseId::PolyExpansion,
    ];

    pub const LIMITS: [CaseId; 1] = [CaseId::Limit45];

    pub fn all() -> impl Iterator<Item = CaseId> {
        Self::INEQUALITIES
            .into_iter()
            .chain(Self::STRUCTURE)
            .chain(Self::LIMITS)
    }

    pub fn name(self) -> &'static str {
        match self {
            CaseId::Minkowski55 => "MINKOWSKI_5_5",
            CaseId::Bm56 => "BM_5_6",
            CaseId::Jensen54 => "JENSEN_5_4",
            CaseId::Log65 => "LOG_6_5",
            CaseId::Log66 => "LOG_6_6",
            CaseId::Proj74 => "PROJ_7_4",
            CaseId::Hb14 => "HB_1_4",
            CaseId::LpCor55 => "LP_COR_5_5",
            CaseId::LpCor57 => "LP_COR_5_7",
            CaseId::LpCor58 => "LP_COR_5_8",
            CaseId::Monotone => "MONOTONE",
            CaseId::GlCovariant => "GL_COVARIANT",
            CaseId::Continuous => "CONTINUOUS",
            CaseId::PolyExpansion => "POLY_EXPANSION",
            CaseId::Limit45 => "LIMIT_4_5",
        }
    }

    /// Position in [`CaseId::all`], used to derive generator streams.
    pub fn index(self) -> u64 {
        CaseId::all().position(|c| c == self).expect("listed case") as u64
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownCase(pub String);

impl fmt::Display for UnknownCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown case '{}'", self.0)
    }
}

impl std::error::Error for UnknownCase {}

impl FromStr for CaseId {
    type Err = UnknownCase;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        CaseId::all()
            .find(|c| c.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| UnknownCase(s.to_string()))
    }
}

impl Serialize for CaseId {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalityReport {
    pub case: CaseId,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub equality_case: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance: Option<usize>,
}

impl InequalityReport {
    /// Report for `lhs >= rhs` with tolerance `tol·max(1, |lhs|, |rhs|)`.
    pub fn new(case: CaseId, lhs: f64, rhs: f64, tol: f64, equality_case: bool) -> Self {
        let scale = 1f64.max(lhs.abs()).max(rhs.abs());
        Self::with_tolerance(case, lhs, rhs, tol * scale, equality_case)
    }

    pub fn with_tolerance(
        case: CaseId,
        lhs: f64,
        rhs: f64,
        tolerance: f64,
        equality_case: bool,
    ) -> Self {
        let margin = lhs - rhs;
        InequalityReport {
            case,
            lhs,
            rhs,
            margin,
            tolerance,
            pass: margin >= -tolerance,
            equality_case,
            instance: None,
        }
    }

    /// A deviation that should vanish: lhs = 0, rhs = deviation.
    pub fn deviation(case: CaseId, deviation: f64, tolerance: f64) -> Self {
        Self::with_tolerance(case, 0.0, deviation, tolerance, false)
    }

    /// max(1, |lhs|, |rhs|).
    pub fn scale(&self) -> f64 {
        1f64.max(self.lhs.abs()).max(self.rhs.abs())
    }

    pub fn at_instance(mut self, instance: usize) -> Self {
        self.instance = Some(instance);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitReport {
    pub case: CaseId,
    pub ladder: Vec<f64>,
    pub quotients: Vec<f64>,
    /// Radial Hausdorff distance from the perturbed sum to its ε → 0 limit.
    pub distances: Vec<f64>,
    /// Largest radius among (k₁/k)^{1/n}K and (k₂/k)^{1/n}L, the scale for
    /// `distances`.
    pub scale: f64,
    pub extrapolated: f64,
    pub target: f64,
    pub relative_error: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance: Option<usize>,
}

impl LimitReport {
    pub fn at_instance(mut self, instance: usize) -> Self {
        self.instance = Some(instance);
        self
    }
}

/// Var(ρ_L/ρ_K)/mean² over the nodes; zero exactly for dilates.
pub fn dilate_variance(k: &StarBody, l: &StarBody, rule: &SphereRule) -> Result<f64> {
    let a = k.samples(rule)?;
    let b = l.samples(rule)?;
    let ratios: Vec<f64> = a.iter().zip(b.iter()).map(|(x, y)| y / x).collect();
    let m = ratios.len() as f64;
    let mean = ratios.iter().sum::<f64>() / m;
    let var = ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / m;
    Ok(var / (mean * mean))
}

pub fn are_dilates(k: &StarBody, l: &StarBody, rule: &SphereRule) -> Result<bool> {
    Ok(dilate_variance(k, l, rule)? < DILATE_THRESHOLD)
}
