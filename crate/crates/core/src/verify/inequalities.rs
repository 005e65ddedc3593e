use crate::additions::{
    harmonic_blaschke_sum, lp_harmonic_blaschke_sum, orlicz_sum_with, Constants, SumSpec,
};
use crate::functionals::{
    lp_dual_mixed_volume, orlicz_dual_mixed_volume, orlicz_dual_projection_norm,
    radial_power_ratios, volume, DualConeMeasure,
};
use crate::phi::{OrliczFunction1, OrliczFunctionM};
use crate::starbody::{SphereRule, StarBody};
use crate::{BracketConfig, Error, Result};

use super::{are_dilates, CaseId, InequalityReport};

/// Agreement required between the two evaluations of Ṽ_{−p}(L,K).
const PATH_AGREEMENT: f64 = 1e-10;

/// Root tolerance for sums whose volumes enter a margin; near-dilate pairs
/// have margins close to zero.
const SUM_ROOT_TOL: f64 = 1e-15;

/// Margin kept between the containment ratio and 1 for the log inequalities.
const CONTAINMENT_GAP: f64 = 1e-9;

/// One inequality instance with everything needed to evaluate both sides.
#[derive(Clone, Debug)]
pub enum Inequality {
    /// Ṽ_φ(K,L) >= V(K)·φ(k₂V(L)/(k₁V(K))).
    Minkowski {
        k: StarBody,
        l: StarBody,
        phi: OrliczFunction1,
        k1: f64,
        k2: f64,
    },
    /// ∫φ(k₂ρ_Lⁿ/(k₁ρ_Kⁿ)) dṼ_n(K) >= φ(k₂V(L)/(k₁V(K))) for convex φ on [0,a).
    Jensen {
        k: StarBody,
        l: StarBody,
        phi: OrliczFunction1,
        k1: f64,
        k2: f64,
    },
    /// 1 >= φ(k₁V(K)/(kV(S)), k₂V(L)/(kV(S))) for the Orlicz sum S.
    BrunnMinkowski {
        k: StarBody,
        l: StarBody,
        phi: OrliczFunctionM,
        constants: Constants,
    },
    /// log(1 − k₂V(L)/(k₁V(K))) >= ∫log(1 − k₂ρ_Lⁿ/(k₁ρ_Kⁿ)) dṼ_n(K).
    LogMinkowski {
        k: StarBody,
        l: StarBody,
        k1: f64,
        k2: f64,
    },
    /// The log inequality with K replaced by the harmonic Blaschke sum of K and L.
    LogHarmonic {
        k: StarBody,
        l: StarBody,
        k1: f64,
        k2: f64,
    },
    /// Projection norm >= (k₂V(L)/(k₁V(K)))^{1/n}.
    Projection {
        k: StarBody,
        l: StarBody,
        phi: OrliczFunction1,
        k1: f64,
        k2: f64,
    },
    /// V(K +̂ L)^{1/n} >= V(K)^{1/n} + V(L)^{1/n}.
    HarmonicBlaschke { k: StarBody, l: StarBody },
    /// Ṽ_{−p}(L,K)ⁿ >= V(L)^{n+p}V(K)^{−p}.
    LpDualMinkowski { k: StarBody, l: StarBody, p: f64 },
    /// V(S)^{p/n} >= V(K)^{p/n} + V(L)^{p/n} for the L_p harmonic Blaschke sum.
    LpHarmonicBrunnMinkowski { k: StarBody, l: StarBody, p: f64 },
    /// V(S)^{p/n} >= V(K)^{p/n} + V(L)^{p/n} for the L_p radial sum, p >= n.
    LpRadialBrunnMinkowski { k: StarBody, l: StarBody, p: f64 },
}

impl Inequality {
    pub fn case(&self) -> CaseId {
        match self {
            Inequality::Minkowski { .. } => CaseId::Minkowski55,
            Inequality::Jensen { .. } => CaseId::Jensen54,
            Inequality::BrunnMinkowski { .. } => CaseId::Bm56,
            Inequality::LogMinkowski { .. } => CaseId::Log65,
            Inequality::LogHarmonic { .. } => CaseId::Log66,
            Inequality::Projection { .. } => CaseId::Proj74,
            Inequality::HarmonicBlaschke { .. } => CaseId::Hb14,
            Inequality::LpDualMinkowski { .. } => CaseId::LpCor55,
            Inequality::LpHarmonicBrunnMinkowski { .. } => CaseId::LpCor57,
            Inequality::LpRadialBrunnMinkowski { .. } => CaseId::LpCor58,
        }
    }

    /// The pair (K, L) whose dilation signals the equality case.
    pub fn bodies(&self) -> (&StarBody, &StarBody) {
        match self {
            Inequality::Minkowski { k, l, .. }
            | Inequality::Jensen { k, l, .. }
            | Inequality::BrunnMinkowski { k, l, .. }
            | Inequality::LogMinkowski { k, l, .. }
            | Inequality::LogHarmonic { k, l, .. }
            | Inequality::Projection { k, l, .. }
            | Inequality::HarmonicBlaschke { k, l }
            | Inequality::LpDualMinkowski { k, l, .. }
            | Inequality::LpHarmonicBrunnMinkowski { k, l, .. }
            | Inequality::LpRadialBrunnMinkowski { k, l, .. } => (k, l),
        }
    }
}

fn require_class(phi: &OrliczFunction1) -> Result<()> {
    if phi.is_class_member() {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "{phi:?} is not normalized with φ(1) = 1"
        )))
    }
}

/// Every k₂ρ_Lⁿ/(k₁ρ_Kⁿ) must lie below `bound`.
fn require_ratios_below(ratios: &[f64], bound: f64, what: &str) -> Result<()> {
    let (index, max) =
        ratios
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, r)| if r > acc.1 { (i, r) } else { acc },
            );
    if max < bound {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "{what}: k₂ρ_Lⁿ/(k₁ρ_Kⁿ) reaches {max} >= {bound} at node {index}"
        )))
    }
}

fn log_inequality(
    case: CaseId,
    k: &StarBody,
    l: &StarBody,
    (k1, k2): (f64, f64),
    rule: &SphereRule,
    tol: f64,
    equality: bool,
) -> Result<InequalityReport> {
    let ratios = radial_power_ratios(k, l, k1, k2, rule)?;
    require_ratios_below(
        &ratios,
        1.0 - CONTAINMENT_GAP,
        "k₂^{1/n}L is not inside the interior of k₁^{1/n}K",
    )?;
    let cone = DualConeMeasure::new(k, rule)?;
    let logs: Vec<f64> = ratios
        .iter()
        .zip(cone.weights(rule)?)
        .map(|(r, a)| a * (-r).ln_1p())
        .collect();
    let rhs = rule.integrate_values(&logs)?;
    let lhs = (-(k2 * volume(l, rule)?) / (k1 * cone.volume())).ln_1p();
    Ok(InequalityReport::new(case, lhs, rhs, tol, equality))
}

/// Evaluates both sides of `inequality` with quadrature `rule`.
pub fn verify_inequality(
    inequality: &Inequality,
    rule: &SphereRule,
    tol: f64,
) -> Result<InequalityReport> {
    let (k_body, l_body) = inequality.bodies();
    let equality = are_dilates(k_body, l_body, rule)?;
    let case = inequality.case();
    let n = k_body.dim() as f64;
    match inequality {
        Inequality::Minkowski { k, l, phi, k1, k2 } => {
            require_class(phi)?;
            let ratios = radial_power_ratios(k, l, *k1, *k2, rule)?;
            require_ratios_below(
                &ratios,
                phi.domain_bound(),
                "argument outside the domain of φ",
            )?;
            let lhs = orlicz_dual_mixed_volume(k, l, phi, *k1, *k2, rule)?;
            let vk = volume(k, rule)?;
            let rhs = vk * phi.eval(k2 * volume(l, rule)? / (k1 * vk))?;
            Ok(InequalityReport::new(case, lhs, rhs, tol, equality))
        }
        Inequality::Jensen { k, l, phi, k1, k2 } => {
            let ratios = radial_power_ratios(k, l, *k1, *k2, rule)?;
            require_ratios_below(
                &ratios,
                phi.domain_bound(),
                "ratios leave the interval [0, a)",
            )?;
            let vk = volume(k, rule)?;
            let lhs = orlicz_dual_mixed_volume(k, l, phi, *k1, *k2, rule)? / vk;
            let rhs = phi.eval(k2 * volume(l, rule)? / (k1 * vk))?;
            Ok(InequalityReport::new(case, lhs, rhs, tol, equality))
        }
        Inequality::BrunnMinkowski {
            k,
            l,
            phi,
            constants,
        } => {
            let spec = SumSpec::new(
                vec![k.clone(), l.clone()],
                phi.clone(),
                constants.k,
                constants.ks.clone(),
            )?;
            let s = orlicz_sum_with(spec, BracketConfig::with_rel_tol(SUM_ROOT_TOL));
            let vs = volume(&s, rule)?;
            let x = [
                constants.ks[0] * volume(k, rule)? / (constants.k * vs),
                constants.ks[1] * volume(l, rule)? / (constants.k * vs),
            ];
            let rhs = phi.eval(&x)?;
            Ok(InequalityReport::new(case, 1.0, rhs, tol, equality))
        }
        Inequality::LogMinkowski { k, l, k1, k2 } => {
            log_inequality(case, k, l, (*k1, *k2), rule, tol, equality)
        }
        Inequality::LogHarmonic { k, l, k1, k2 } => {
            let s = harmonic_blaschke_sum(k, l, rule)?;
            log_inequality(case, &s, l, (*k1, *k2), rule, tol, equality)
        }
        Inequality::Projection { k, l, phi, k1, k2 } => {
            require_class(phi)?;
            let lhs = orlicz_dual_projection_norm(k, l, phi, *k1, *k2, rule)?;
            let rhs = (k2 * volume(l, rule)? / (k1 * volume(k, rule)?)).powf(1.0 / n);
            Ok(InequalityReport::new(case, lhs, rhs, tol, equality))
        }
        Inequality::HarmonicBlaschke { k, l } => {
            let s = harmonic_blaschke_sum(k, l, rule)?;
            let root = |v: f64| v.powf(1.0 / n);
            let lhs = root(volume(&s, rule)?);
            let rhs = root(volume(k, rule)?) + root(volume(l, rule)?);
            Ok(InequalityReport::new(case, lhs, rhs, tol, equality))
        }
        Inequality::LpDualMinkowski { k, l, p } => {
            let direct = lp_dual_mixed_volume(l, k, *p, rule)?;
            let power = OrliczFunction1::power((n + p) / n)?;
            let orlicz = orlicz_dual_mixed_volume(k, l, &power, 1.0, 1.0, rule)?;
            let lhs = direct.powf(n);
            let rhs = volume(l, rule)?.powf(n + p) * volume(k, rule)?.powf(-p);
            let mut report = InequalityReport::new(case, lhs, rhs, tol, equality);
            if (direct - orlicz).abs() > PATH_AGREEMENT * direct.abs() {
                report.pass = false;
            }
            Ok(report)
        }
        Inequality::LpHarmonicBrunnMinkowski { k, l, p } => {
            let s = lp_harmonic_blaschke_sum(k, l, *p, rule)?;
            let pow = |v: f64| v.powf(p / n);
            let lhs = pow(volume(&s, rule)?);
            let rhs = pow(volume(k, rule)?) + pow(volume(l, rule)?);
            Ok(InequalityReport::new(case, lhs, rhs, tol, equality))
        }
        Inequality::LpRadialBrunnMinkowski { k, l, p } => {
            if *p < n {
                return Err(Error::Precondition(format!("p = {p} must be >= n = {n}")));
            }
            let phi = OrliczFunctionM::power_sum(p / n, 2)?;
            let spec = SumSpec::unit(vec![k.clone(), l.clone()], phi)?;
            let s = orlicz_sum_with(spec, BracketConfig::with_rel_tol(SUM_ROOT_TOL));
            let pow = |v: f64| v.powf(p / n);
            let lhs = pow(volume(&s, rule)?);
            let rhs = pow(volume(k, rule)?) + pow(volume(l, rule)?);
            Ok(InequalityReport::new(case, lhs, rhs, tol, equality))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::DEFAULT_TOLERANCE;
    use std::f64::consts::PI;

    fn rule() -> SphereRule {
        SphereRule::new(2, 1024).unwrap()
    }

    fn trig() -> StarBody {
        StarBody::radial_trig_poly(1.0, vec![0.0, 0.0, 0.3], vec![]).unwrap()
    }

    #[test]
    fn minkowski_on_unit_balls() {
        let b = StarBody::ball(2, 1.0).unwrap();
        let ineq = Inequality::Minkowski {
            k: b.clone(),
            l: b,
            phi: OrliczFunction1::power(2.0).unwrap(),
            k1: 1.0,
            k2: 1.0,
        };
        let r = verify_inequality(&ineq, &rule(), DEFAULT_TOLERANCE).unwrap();
        assert!((r.lhs - PI).abs() < 1e-13 && (r.rhs - PI).abs() < 1e-13);
        assert!(r.margin.abs() < 1e-13);
        assert!(r.pass && r.equality_case);
    }

    #[test]
    fn log_on_nested_balls() {
        let ineq = Inequality::LogMinkowski {
            k: StarBody::ball(2, 2.0).unwrap(),
            l: StarBody::ball(2, 1.0).unwrap(),
            k1: 1.0,
            k2: 1.0,
        };
        let r = verify_inequality(&ineq, &rule(), DEFAULT_TOLERANCE).unwrap();
        assert!((r.lhs - 0.75f64.ln()).abs() < 1e-14);
        assert!(r.margin.abs() < 1e-14);
        assert!(r.pass && r.equality_case);
    }

    #[test]
    fn log_rejects_missing_containment() {
        let ineq = Inequality::LogMinkowski {
            k: StarBody::ball(2, 1.0).unwrap(),
            l: StarBody::ball(2, 1.0).unwrap(),
            k1: 1.0,
            k2: 1.0,
        };
        let err = verify_inequality(&ineq, &rule(), DEFAULT_TOLERANCE).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)), "{err}");
    }

    #[test]
    fn brunn_minkowski_strict_for_non_dilates() {
        let ineq = Inequality::BrunnMinkowski {
            k: StarBody::lp_ball(2, 1.0, 1.0).unwrap(),
            l: trig(),
            phi: OrliczFunctionM::power_sum(1.5, 2).unwrap(),
            constants: Constants::unit(2),
        };
        let r = verify_inequality(&ineq, &rule(), DEFAULT_TOLERANCE).unwrap();
        assert!(r.pass && !r.equality_case);
        assert!(r.margin > 1e-6, "{r:?}");
    }

    #[test]
    fn projection_reproduces_lp_dual_minkowski() {
        // power φ: normⁿ⁺ᵖ = Ṽ_{−p}(L,K)/V(K), so the projection bound is the
        // L_p dual Minkowski inequality after taking powers
        let r = rule();
        let (k, l, p) = (trig(), StarBody::lp_ball(2, 1.4, 1.0).unwrap(), 2.0);
        let proj = verify_inequality(
            &Inequality::Projection {
                k: k.clone(),
                l: l.clone(),
                phi: OrliczFunction1::power(2.0).unwrap(),
                k1: 1.0,
                k2: 1.0,
            },
            &r,
            DEFAULT_TOLERANCE,
        )
        .unwrap();
        let lp = verify_inequality(
            &Inequality::LpDualMinkowski { k: k.clone(), l, p },
            &r,
            DEFAULT_TOLERANCE,
        )
        .unwrap();
        let vk = volume(&k, &r).unwrap();
        // Ṽ_{−p}(L,K)ⁿ = (vk·norm^{n+p})ⁿ
        let from_norm = (vk * proj.lhs.powf(2.0 + p)).powf(2.0);
        assert!((from_norm - lp.lhs).abs() <= 1e-10 * lp.lhs);
        let from_bound = (vk * proj.rhs.powf(2.0 + p)).powf(2.0);
        assert!((from_bound - lp.rhs).abs() <= 1e-10 * lp.rhs);
    }

    #[test]
    fn every_case_has_zero_margin_on_dilates() {
        let r = rule();
        let k = trig();
        let l = k.dilate(0.6).unwrap();
        let phi = OrliczFunction1::power(1.7).unwrap();
        let cases = vec![
            Inequality::Minkowski {
                k: k.clone(),
                l: l.clone(),
                phi: phi.clone(),
                k1: 1.2,
                k2: 0.8,
            },
            Inequality::Jensen {
                k: k.clone(),
                l: l.clone(),
                phi: OrliczFunction1::neglog_unnormalized(),
                k1: 1.0,
                k2: 1.0,
            },
            Inequality::BrunnMinkowski {
                k: k.clone(),
                l: l.clone(),
                phi: OrliczFunctionM::sum(vec![
                    (phi.clone(), 1.0),
                    (OrliczFunction1::neglog(), 1.0),
                ])
                .unwrap(),
                constants: Constants {
                    k: 1.5,
                    ks: vec![1.0, 0.5],
                },
            },
            Inequality::LogMinkowski {
                k: k.clone(),
                l: l.clone(),
                k1: 1.0,
                k2: 1.0,
            },
            Inequality::LogHarmonic {
                k: k.clone(),
                l: l.clone(),
                k1: 1.0,
                k2: 1.0,
            },
            Inequality::Projection {
                k: k.clone(),
                l: l.clone(),
                phi: phi.clone(),
                k1: 1.0,
                k2: 2.0,
            },
            Inequality::HarmonicBlaschke {
                k: k.clone(),
                l: l.clone(),
            },
            Inequality::LpDualMinkowski {
                k: k.clone(),
                l: l.clone(),
                p: 2.5,
            },
            Inequality::LpHarmonicBrunnMinkowski {
                k: k.clone(),
                l: l.clone(),
                p: 3.0,
            },
            Inequality::LpRadialBrunnMinkowski {
                k: k.clone(),
                l: l.clone(),
                p: 4.0,
            },
        ];
        for ineq in &cases {
            let rep = verify_inequality(ineq, &r, DEFAULT_TOLERANCE).unwrap();
            assert!(rep.pass && rep.equality_case, "{rep:?}");
            assert!(rep.margin.abs() <= 1e-9 * rep.scale(), "{rep:?}");
        }
    }

    #[test]
    fn lp_radial_requires_p_at_least_n() {
        let ineq = Inequality::LpRadialBrunnMinkowski {
            k: trig(),
            l: trig(),
            p: 1.5,
        };
        assert!(matches!(
            verify_inequality(&ineq, &rule(), 1e-9),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn unnormalized_phi_is_rejected_where_class_is_required() {
        let ineq = Inequality::Minkowski {
            k: StarBody::ball(2, 2.0).unwrap(),
            l: StarBody::ball(2, 1.0).unwrap(),
            phi: OrliczFunction1::neglog_unnormalized(),
            k1: 1.0,
            k2: 1.0,
        };
        assert!(matches!(
            verify_inequality(&ineq, &rule(), 1e-9),
            Err(Error::Precondition(_))
        ));
    }
}
