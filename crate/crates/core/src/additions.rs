//! Additions of star bodies.
//!
//! The central construction is the Orlicz harmonic Blaschke sum: at each
//! direction u its radial function ρ solves
//!
//! ```text
//! φ(c₁/λ, …, c_m/λ) = 1,   c_j = k_j ρ(K_j,u)ⁿ / k,   λ = ρⁿ.
//! ```
//!
//! λ ↦ φ(c/λ) is strictly decreasing, so the root is found by bracketed
//! bisection starting from λ₀ = Σ c_j. The closed-form additions (radial
//! Minkowski, L_p radial, harmonic Blaschke) double as oracles for it.

use crate::functionals::volume;
use crate::phi::{OrliczFunction1, OrliczFunctionM};
use crate::roots::{solve_decreasing, BracketConfig, Side};
use crate::starbody::{Kind, SphereRule, StarBody};
use crate::{Error, Result};

/// Bodies, Orlicz function and constants k, k_j of an Orlicz sum.
#[derive(Clone, Debug)]
pub struct SumSpec {
    bodies: Vec<StarBody>,
    phi: OrliczFunctionM,
    k: f64,
    ks: Vec<f64>,
}

/// The constants (k, k_1..k_m).
#[derive(Clone, Debug, PartialEq)]
pub struct Constants {
    pub k: f64,
    pub ks: Vec<f64>,
}

impl Constants {
    pub fn unit(m: usize) -> Self {
        Constants {
            k: 1.0,
            ks: vec![1.0; m],
        }
    }
}

impl SumSpec {
    pub fn new(bodies: Vec<StarBody>, phi: OrliczFunctionM, k: f64, ks: Vec<f64>) -> Result<Self> {
        let Some(first) = bodies.first() else {
            return Err(Error::Config(
                "an Orlicz sum needs at least one body".into(),
            ));
        };
        let dim = first.dim();
        if let Some(b) = bodies.iter().find(|b| b.dim() != dim) {
            return Err(Error::Dimension {
                expected: dim,
                found: b.dim(),
            });
        }
        if phi.arity() != bodies.len() {
            return Err(Error::Config(format!(
                "φ takes {} arguments but {} bodies were given",
                phi.arity(),
                bodies.len()
            )));
        }
        if ks.len() != bodies.len() {
            return Err(Error::Config(format!(
                "{} constants k_j for {} bodies",
                ks.len(),
                bodies.len()
            )));
        }
        if let Some(c) = std::iter::once(&k)
            .chain(&ks)
            .find(|c| !(**c > 0.0 && c.is_finite()))
        {
            return Err(Error::Config(format!(
                "constants must be positive, got {c}"
            )));
        }
        Ok(SumSpec { bodies, phi, k, ks })
    }

    /// Unit constants k = k_j = 1.
    pub fn unit(bodies: Vec<StarBody>, phi: OrliczFunctionM) -> Result<Self> {
        let m = bodies.len();
        Self::new(bodies, phi, 1.0, vec![1.0; m])
    }

    pub fn with_constants(&self, c: Constants) -> Result<Self> {
        Self::new(self.bodies.clone(), self.phi.clone(), c.k, c.ks)
    }

    pub fn bodies(&self) -> &[StarBody] {
        &self.bodies
    }

    pub fn phi(&self) -> &OrliczFunctionM {
        &self.phi
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn ks(&self) -> &[f64] {
        &self.ks
    }

    pub fn dim(&self) -> usize {
        self.bodies[0].dim()
    }

    /// c_j = k_j r_jⁿ / k for the given radii.
    pub fn scaled_powers(&self, radii: &[f64]) -> Vec<f64> {
        let n = self.dim() as i32;
        radii
            .iter()
            .zip(&self.ks)
            .map(|(r, kj)| kj * r.powi(n) / self.k)
            .collect()
    }
}

/// λ = ρⁿ of the Orlicz sum for one direction, given the radii ρ(K_j,u).
pub fn solve_power(spec: &SumSpec, radii: &[f64], cfg: &BracketConfig) -> Result<f64> {
    let c = spec.scaled_powers(radii);
    let start: f64 = c.iter().sum();
    let mut x = vec![0.0; c.len()];
    solve_decreasing(start, cfg, |lambda| {
        for (xj, cj) in x.iter_mut().zip(&c) {
            *xj = cj / lambda;
        }
        match spec.phi.eval(&x) {
            Ok(v) if v.is_nan() => Err(Error::Solver(format!("φ returned NaN at {x:?}"))),
            Ok(v) if v > 1.0 => Ok(Side::Above),
            Ok(_) => Ok(Side::Below),
            Err(e) if e.is_domain() => Ok(Side::Above),
            Err(e) => Err(e),
        }
    })
}

/// ρ of the Orlicz sum for one direction.
pub fn solve_radius(spec: &SumSpec, radii: &[f64], cfg: &BracketConfig) -> Result<f64> {
    let lambda = solve_power(spec, radii, cfg)?;
    Ok(lambda.powf(1.0 / spec.dim() as f64))
}

/// |φ(c₁/λ, …, c_m/λ) − 1| for a candidate λ = ρⁿ.
pub fn defining_residual(spec: &SumSpec, radii: &[f64], lambda: f64) -> Result<f64> {
    let x: Vec<f64> = spec
        .scaled_powers(radii)
        .iter()
        .map(|c| c / lambda)
        .collect();
    Ok((spec.phi.eval(&x)? - 1.0).abs())
}

/// Orlicz harmonic Blaschke sum, evaluated lazily per direction.
pub fn orlicz_sum(spec: SumSpec) -> StarBody {
    orlicz_sum_with(spec, BracketConfig::default())
}

pub fn orlicz_sum_with(spec: SumSpec, cfg: BracketConfig) -> StarBody {
    StarBody::from_kind(spec.dim(), Kind::OrliczSum { spec, cfg })
}

/// The spec of an Orlicz sum body.
pub fn sum_spec(body: &StarBody) -> Option<&SumSpec> {
    match body.kind() {
        Kind::OrliczSum { spec, .. } => Some(spec),
        _ => None,
    }
}

/// Parameters of αφ₁(k₁ρ_Kⁿ/(kλ)) + βφ₂(k₂ρ_Lⁿ/(kλ)) = 1.
#[derive(Clone, Debug)]
pub struct LinearComb {
    pub phi1: OrliczFunction1,
    pub phi2: OrliczFunction1,
    pub alpha: f64,
    pub beta: f64,
    pub k: f64,
    pub k1: f64,
    pub k2: f64,
}

impl LinearComb {
    /// The ε-perturbation K +̌_{φ,ε} L: α = 1, β = ε.
    pub fn perturbation(
        phi1: OrliczFunction1,
        phi2: OrliczFunction1,
        epsilon: f64,
        k: f64,
        k1: f64,
        k2: f64,
    ) -> Self {
        LinearComb {
            phi1,
            phi2,
            alpha: 1.0,
            beta: epsilon,
            k,
            k1,
            k2,
        }
    }
}

/// Orlicz harmonic Blaschke linear combination of two bodies.
pub fn orlicz_linear_comb(
    k_body: &StarBody,
    l_body: &StarBody,
    comb: &LinearComb,
) -> Result<StarBody> {
    orlicz_linear_comb_with(k_body, l_body, comb, BracketConfig::default())
}

pub fn orlicz_linear_comb_with(
    k_body: &StarBody,
    l_body: &StarBody,
    comb: &LinearComb,
    cfg: BracketConfig,
) -> Result<StarBody> {
    let (a, b) = (comb.alpha, comb.beta);
    if !(a >= 0.0 && b >= 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::Config(format!(
            "coefficients must be finite and >= 0, got {a}, {b}"
        )));
    }
    if a == 0.0 && b == 0.0 {
        return Err(Error::Config("α and β cannot both be zero".into()));
    }
    let phi = OrliczFunctionM::sum(vec![(comb.phi1.clone(), a), (comb.phi2.clone(), b)])?;
    let spec = SumSpec::new(
        vec![k_body.clone(), l_body.clone()],
        phi,
        comb.k,
        vec![comb.k1, comb.k2],
    )?;
    Ok(orlicz_sum_with(spec, cfg))
}

fn same_dim(k: &StarBody, l: &StarBody) -> Result<()> {
    if k.dim() != l.dim() {
        return Err(Error::Dimension {
            expected: k.dim(),
            found: l.dim(),
        });
    }
    Ok(())
}

/// ρ^p = ρ_K^p + ρ_L^p.
pub fn lp_radial_sum(k: &StarBody, l: &StarBody, p: f64) -> Result<StarBody> {
    same_dim(k, l)?;
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::Config(format!("p must be positive, got {p}")));
    }
    Ok(StarBody::from_kind(
        k.dim(),
        Kind::LpRadialSum {
            p,
            children: vec![k.clone(), l.clone()],
        },
    ))
}

/// λK +̃ μL with radial function λρ_K + μρ_L.
pub fn radial_minkowski_comb(k: &StarBody, l: &StarBody, lambda: f64, mu: f64) -> Result<StarBody> {
    same_dim(k, l)?;
    if !(lambda >= 0.0 && mu >= 0.0 && lambda.is_finite() && mu.is_finite()) {
        return Err(Error::Config(format!(
            "coefficients must be finite and >= 0, got {lambda}, {mu}"
        )));
    }
    if lambda == 0.0 && mu == 0.0 {
        return Err(Error::Config("both coefficients are zero".into()));
    }
    Ok(StarBody::from_kind(
        k.dim(),
        Kind::RadialComb {
            coeffs: vec![lambda, mu],
            children: vec![k.clone(), l.clone()],
        },
    ))
}

/// Harmonic Blaschke sum: ρ^{n+1}/V is additive.
pub fn harmonic_blaschke_sum(k: &StarBody, l: &StarBody, rule: &SphereRule) -> Result<StarBody> {
    lp_harmonic_blaschke_sum(k, l, 1.0, rule)
}

/// L_p harmonic Blaschke sum: ρ^{n+p}/V is additive.
///
/// With f = ρ_K^{n+p}/V(K) + ρ_L^{n+p}/V(L) and ρ^{n+p} = V·f, integrating
/// ρⁿ gives V^{p/(n+p)} = (1/n)∫ f^{n/(n+p)} dS. Volumes come from `rule`.
pub fn lp_harmonic_blaschke_sum(
    k: &StarBody,
    l: &StarBody,
    p: f64,
    rule: &SphereRule,
) -> Result<StarBody> {
    same_dim(k, l)?;
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Config(format!("p must be >= 1, got {p}")));
    }
    let n = k.dim() as f64;
    let e = n + p;
    let vk = volume(k, rule)?;
    let vl = volume(l, rule)?;
    let rk = k.samples(rule)?;
    let rl = l.samples(rule)?;
    let integrand: Vec<f64> = rk
        .iter()
        .zip(rl.iter())
        .map(|(a, b)| (a.powf(e) / vk + b.powf(e) / vl).powf(n / e))
        .collect();
    let integral = rule.integrate_values(&integrand)? / n;
    let sum_volume = integral.powf(e / p);
    Ok(StarBody::from_kind(
        k.dim(),
        Kind::HarmonicBlaschke {
            p,
            children: vec![k.clone(), l.clone()],
            volumes: vec![vk, vl],
            sum_volume,
        },
    ))
}

/// Volume of a harmonic Blaschke node as fixed at construction.
pub fn harmonic_sum_volume(body: &StarBody) -> Option<f64> {
    match body.kind() {
        Kind::HarmonicBlaschke { sum_volume, .. } => Some(*sum_volume),
        _ => None,
    }
}

/// Maps a candidate volume of the sum to the constants (k, k_j).
pub trait ConstantsRule: Sync {
    fn constants(&self, sum_volume: f64) -> Result<Constants>;

    fn depends_on_volume(&self) -> bool {
        true
    }
}

/// Constants that ignore the volume.
#[derive(Clone, Debug)]
pub struct FixedConstants(pub Constants);

impl ConstantsRule for FixedConstants {
    fn constants(&self, _: f64) -> Result<Constants> {
        Ok(self.0.clone())
    }

    fn depends_on_volume(&self) -> bool {
        false
    }
}

/// k_j = V(K_j)^{-n/(n+p)} and k = W^{-n/(n+p)} for candidate volume W;
/// with φ = Σ x_j^{(n+p)/n} the Orlicz sum becomes the L_p harmonic
/// Blaschke sum (p = 1: the harmonic Blaschke sum).
#[derive(Clone, Debug)]
pub struct LpHarmonicConstants {
    exponent: f64,
    ks: Vec<f64>,
}

impl LpHarmonicConstants {
    pub fn new(bodies: &[StarBody], p: f64, rule: &SphereRule) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::Config(format!("p must be >= 1, got {p}")));
        }
        let n = bodies
            .first()
            .ok_or_else(|| Error::Config("no bodies".into()))?
            .dim() as f64;
        let exponent = -n / (n + p);
        let ks = bodies
            .iter()
            .map(|b| Ok(volume(b, rule)?.powf(exponent)))
            .collect::<Result<Vec<_>>>()?;
        Ok(LpHarmonicConstants { exponent, ks })
    }
}

impl ConstantsRule for LpHarmonicConstants {
    fn constants(&self, sum_volume: f64) -> Result<Constants> {
        if !(sum_volume > 0.0 && sum_volume.is_finite()) {
            return Err(Error::Solver(format!(
                "non-positive candidate volume {sum_volume}"
            )));
        }
        Ok(Constants {
            k: sum_volume.powf(self.exponent),
            ks: self.ks.clone(),
        })
    }
}

/// Damped fixed point iteration on the volume of the sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixedPointConfig {
    pub damping: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        FixedPointConfig {
            damping: 0.5,
            tolerance: 1e-12,
            max_iterations: 500,
        }
    }
}

impl FixedPointConfig {
    fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::Config(format!(
                "damping must be in (0,1], got {}",
                self.damping
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SelfConsistentSum {
    pub body: StarBody,
    pub volume: f64,
    pub iterations: usize,
    /// Volume of the sum after each iteration.
    pub trace: Vec<f64>,
}

/// Orlicz sum whose constants depend on its own volume.
///
/// Starting from W = Σ V(K_j), each step solves the sum with the constants
/// of W, measures its volume V and stops once |V − W| <= tolerance·W;
/// otherwise W ← (1−θ)W + θV.
pub fn self_consistent_orlicz_sum(
    spec: &SumSpec,
    k_rule: &dyn ConstantsRule,
    rule: &SphereRule,
    cfg: &FixedPointConfig,
) -> Result<SelfConsistentSum> {
    cfg.validate()?;
    let mut w = spec
        .bodies()
        .iter()
        .map(|b| volume(b, rule))
        .sum::<Result<f64>>()?;
    let mut trace = Vec::new();
    for iteration in 1..=cfg.max_iterations {
        let body = orlicz_sum(spec.with_constants(k_rule.constants(w)?)?);
        let v = volume(&body, rule)?;
        trace.push(v);
        if !k_rule.depends_on_volume() || (v - w).abs() <= cfg.tolerance * w {
            return Ok(SelfConsistentSum {
                body,
                volume: v,
                iterations: iteration,
                trace,
            });
        }
        w = (1.0 - cfg.damping) * w + cfg.damping * v;
    }
    let tail = trace.len().saturating_sub(8);
    Err(Error::FixedPoint {
        iterations: cfg.max_iterations,
        trace: trace.split_off(tail),
    })
}
