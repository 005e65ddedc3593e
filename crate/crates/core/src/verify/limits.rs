use crate::additions::{orlicz_linear_comb_with, LinearComb};
use crate::functionals::{orlicz_dual_mixed_volume, volume};
use crate::phi::OrliczFunction1;
use crate::starbody::{radial_hausdorff, SphereRule, StarBody};
use crate::{BracketConfig, Error, Result};

use super::{CaseId, LimitReport};

pub const DEFAULT_LADDER: [f64; 5] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

/// Relative tolerance of the extrapolated limit against Ṽ_{φ₂}(K,L).
pub const LIMIT_TOLERANCE: f64 = 1e-6;

/// The quotient divides a volume difference by ε, so roots are resolved
/// close to machine precision.
const QUOTIENT_ROOT_TOL: f64 = 0.0;

/// The first variation of V(K +̌_{φ,ε} L) at ε = 0.
#[derive(Clone, Debug)]
pub struct VariationalProblem {
    pub k_body: StarBody,
    pub l_body: StarBody,
    pub phi1: OrliczFunction1,
    pub phi2: OrliczFunction1,
    pub k: f64,
    pub k1: f64,
    pub k2: f64,
}

/// q(ε) = (φ₁'(1)/k₁)·(kV(K +̌_{φ,ε} L) − k₁V(K))/ε along `ladder`,
/// extrapolated to ε = 0 from the two smallest steps.
pub fn verify_variational_limit(
    problem: &VariationalProblem,
    rule: &SphereRule,
    ladder: &[f64],
) -> Result<LimitReport> {
    if ladder.len() < 2 {
        return Err(Error::Config(
            "the ε ladder needs at least two steps".into(),
        ));
    }
    if ladder.iter().any(|e| !(*e > 0.0 && *e <= 1.0)) || ladder.windows(2).any(|w| !(w[1] < w[0]))
    {
        return Err(Error::Config(format!(
            "ladder must be strictly decreasing in (0, 1]: {ladder:?}"
        )));
    }
    let VariationalProblem {
        k_body,
        l_body,
        phi1,
        phi2,
        k,
        k1,
        k2,
    } = problem;
    if !phi1.is_class_member() || !phi2.is_class_member() {
        return Err(Error::Precondition(
            "φ₁ and φ₂ must satisfy φ(1) = 1".into(),
        ));
    }
    let n = k_body.dim() as f64;
    let vk = volume(k_body, rule)?;
    let slope = phi1.left_derivative(1.0)?;
    let limit_body = k_body.dilate((k1 / k).powf(1.0 / n))?;
    let cfg = BracketConfig::with_rel_tol(QUOTIENT_ROOT_TOL);
    let mut quotients = Vec::with_capacity(ladder.len());
    let mut distances = Vec::with_capacity(ladder.len());
    for &epsilon in ladder {
        let comb = LinearComb::perturbation(phi1.clone(), phi2.clone(), epsilon, *k, *k1, *k2);
        let step = || -> Result<(f64, f64)> {
            let s = orlicz_linear_comb_with(k_body, l_body, &comb, cfg)?;
            let q = slope / k1 * (k * volume(&s, rule)? - k1 * vk) / epsilon;
            Ok((q, radial_hausdorff(&s, &limit_body, rule)?))
        };
        let (q, d) = step().map_err(|e| Error::AtEpsilon {
            epsilon,
            source: Box::new(e),
        })?;
        quotients.push(q);
        distances.push(d);
    }
    let sup =
        |b: &StarBody| -> Result<f64> { Ok(b.samples(rule)?.iter().copied().fold(0.0, f64::max)) };
    let scale = sup(&limit_body)?.max((k2 / k).powf(1.0 / n) * sup(l_body)?);
    let m = ladder.len();
    let (e0, e1) = (ladder[m - 2], ladder[m - 1]);
    let (q0, q1) = (quotients[m - 2], quotients[m - 1]);
    let extrapolated = (e0 * q1 - e1 * q0) / (e0 - e1);
    let target = orlicz_dual_mixed_volume(k_body, l_body, phi2, *k1, *k2, rule)?;
    let relative_error = ((extrapolated - target) / target).abs();
    Ok(LimitReport {
        case: CaseId::Limit45,
        ladder: ladder.to_vec(),
        quotients,
        distances,
        scale,
        extrapolated,
        target,
        relative_error,
        tolerance: LIMIT_TOLERANCE,
        pass: relative_error <= LIMIT_TOLERANCE,
        instance: None,
    })
}
