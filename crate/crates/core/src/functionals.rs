//! Volumes, dual mixed volumes, the dual cone measure and the Orlicz dual
//! projection norm, all by quadrature over the rule's nodes.

use crate::phi::OrliczFunction1;
use crate::roots::{solve_decreasing, BracketConfig, Side};
use crate::starbody::{Direction, SphereRule, StarBody};
use crate::{Error, Result};

fn check_pair(k: &StarBody, l: &StarBody) -> Result<()> {
    if k.dim() != l.dim() {
        return Err(Error::Dimension {
            expected: k.dim(),
            found: l.dim(),
        });
    }
    Ok(())
}

fn positive_constant(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive, got {v}")))
    }
}

/// V(K) = (1/n)∫ρ_Kⁿ.
pub fn volume(k: &StarBody, rule: &SphereRule) -> Result<f64> {
    let n = k.dim() as i32;
    let values: Vec<f64> = k.samples(rule)?.iter().map(|r| r.powi(n)).collect();
    Ok(rule.integrate_values(&values)? / n as f64)
}

/// Ṽ_i(K,L) = (1/n)∫ρ_K^{n−i}ρ_L^i.
pub fn dual_mixed_volume_i(k: &StarBody, l: &StarBody, i: usize, rule: &SphereRule) -> Result<f64> {
    check_pair(k, l)?;
    let n = k.dim();
    if i > n {
        return Err(Error::Config(format!("index i = {i} outside 0..={n}")));
    }
    let (a, b) = (k.samples(rule)?, l.samples(rule)?);
    let values: Vec<f64> = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| x.powi((n - i) as i32) * y.powi(i as i32))
        .collect();
    Ok(rule.integrate_values(&values)? / n as f64)
}

/// Ṽ(K₁,…,K_n) = (1/n)∫ρ₁⋯ρ_n.
pub fn dual_mixed_volume_general(bodies: &[StarBody], rule: &SphereRule) -> Result<f64> {
    let n = rule.dim();
    if bodies.len() != n {
        return Err(Error::Config(format!(
            "expected {n} bodies, got {}",
            bodies.len()
        )));
    }
    let mut product = vec![1.0; rule.len()];
    for b in bodies {
        for (p, r) in product.iter_mut().zip(b.samples(rule)?.iter()) {
            *p *= r;
        }
    }
    Ok(rule.integrate_values(&product)? / n as f64)
}

/// Ṽ_{−p}(K,L) = (1/n)∫ρ_K^{n+p}ρ_L^{−p}.
pub fn lp_dual_mixed_volume(k: &StarBody, l: &StarBody, p: f64, rule: &SphereRule) -> Result<f64> {
    check_pair(k, l)?;
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Config(format!("p must be >= 1, got {p}")));
    }
    let n = k.dim() as f64;
    let (a, b) = (k.samples(rule)?, l.samples(rule)?);
    let values: Vec<f64> = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| x.powf(n + p) * y.powf(-p))
        .collect();
    Ok(rule.integrate_values(&values)? / n)
}

/// k₂ρ_Lⁿ/(k₁ρ_Kⁿ) at every node.
pub fn radial_power_ratios(
    k: &StarBody,
    l: &StarBody,
    k1: f64,
    k2: f64,
    rule: &SphereRule,
) -> Result<Vec<f64>> {
    check_pair(k, l)?;
    let n = k.dim() as i32;
    let (a, b) = (k.samples(rule)?, l.samples(rule)?);
    Ok(a.iter()
        .zip(b.iter())
        .map(|(x, y)| k2 * y.powi(n) / (k1 * x.powi(n)))
        .collect())
}

/// Ṽ_φ(K,L) = (1/n)∫φ(k₂ρ_Lⁿ/(k₁ρ_Kⁿ))ρ_Kⁿ.
pub fn orlicz_dual_mixed_volume(
    k: &StarBody,
    l: &StarBody,
    phi: &OrliczFunction1,
    k1: f64,
    k2: f64,
    rule: &SphereRule,
) -> Result<f64> {
    positive_constant("k1", k1)?;
    positive_constant("k2", k2)?;
    let n = k.dim() as i32;
    let ratios = radial_power_ratios(k, l, k1, k2, rule)?;
    let a = k.samples(rule)?;
    let values = ratios
        .iter()
        .zip(a.iter())
        .enumerate()
        .map(|(i, (t, r))| Ok(phi.eval(*t).map_err(|e| e.at_node(i))? * r.powi(n)))
        .collect::<Result<Vec<_>>>()?;
    Ok(rule.integrate_values(&values)? / n as f64)
}

/// inf{λ > 0 : ∫φ(k₂ρ_Lⁿ/(k₁λⁿρ_Kⁿ)) dṼ_n(K) <= 1}.
pub fn orlicz_dual_projection_norm(
    k: &StarBody,
    l: &StarBody,
    phi: &OrliczFunction1,
    k1: f64,
    k2: f64,
    rule: &SphereRule,
) -> Result<f64> {
    orlicz_dual_projection_norm_with(k, l, phi, k1, k2, rule, &BracketConfig::default())
}

pub fn orlicz_dual_projection_norm_with(
    k: &StarBody,
    l: &StarBody,
    phi: &OrliczFunction1,
    k1: f64,
    k2: f64,
    rule: &SphereRule,
    cfg: &BracketConfig,
) -> Result<f64> {
    positive_constant("k1", k1)?;
    positive_constant("k2", k2)?;
    let n = k.dim() as i32;
    let ratios = radial_power_ratios(k, l, k1, k2, rule)?;
    let cone = DualConeMeasure::new(k, rule)?;
    let mass: Vec<f64> = cone
        .weights(rule)?
        .iter()
        .zip(rule.weights())
        .map(|(a, w)| a * w)
        .collect();
    let start = (k2 * volume(l, rule)? / (k1 * cone.volume())).powf(1.0 / n as f64);
    let mut last_domain_error = None;
    let result = solve_decreasing(start, cfg, |lambda| {
        let scale = lambda.powi(n);
        let mut total = 0.0;
        for (i, (r, m)) in ratios.iter().zip(&mass).enumerate() {
            match phi.eval(r / scale) {
                Ok(v) => total += m * v,
                Err(e) if e.is_domain() => {
                    last_domain_error = Some(e.at_node(i));
                    return Ok(Side::Above);
                }
                Err(e) => return Err(e),
            }
        }
        if !total.is_finite() {
            return Err(Error::Solver(format!(
                "non-finite projection integral at λ = {lambda}"
            )));
        }
        Ok(if total > 1.0 {
            Side::Above
        } else {
            Side::Below
        })
    });
    match (result, last_domain_error) {
        (Err(e), Some(domain)) if e.is_solver_failure() => Err(domain),
        (r, _) => r,
    }
}

/// The probability measure with density ρ_Kⁿ/(nV(K)) on the sphere.
#[derive(Clone, Debug)]
pub struct DualConeMeasure {
    body: StarBody,
    volume: f64,
}

impl DualConeMeasure {
    /// Uses the volume of K computed with `rule`.
    pub fn new(body: &StarBody, rule: &SphereRule) -> Result<Self> {
        Ok(DualConeMeasure {
            body: body.clone(),
            volume: volume(body, rule)?,
        })
    }

    pub fn body(&self) -> &StarBody {
        &self.body
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn weight(&self, u: &Direction) -> Result<f64> {
        let n = self.body.dim();
        Ok(self.body.radial(u)?.powi(n as i32) / (n as f64 * self.volume))
    }

    /// Density at every node of `rule`.
    pub fn weights(&self, rule: &SphereRule) -> Result<Vec<f64>> {
        let n = self.body.dim();
        let denom = n as f64 * self.volume;
        Ok(self
            .body
            .samples(rule)?
            .iter()
            .map(|r| r.powi(n as i32) / denom)
            .collect())
    }

    pub fn total_mass(&self, rule: &SphereRule) -> Result<f64> {
        rule.integrate_values(&self.weights(rule)?)
    }
}
