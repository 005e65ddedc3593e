use serde::Serialize;

use crate::additions::radial_minkowski_comb;
use crate::exec;
use crate::phi::OrliczFunction1;
use crate::starbody::{SphereRule, StarBody};
use crate::{Error, Result};

use super::random::BodyGenerator;
use super::{
    verify_inequality, verify_structure, verify_variational_limit, CaseId, Inequality,
    InequalityReport, LimitReport, StructureCheck, VariationalProblem, DEFAULT_LADDER,
    DEFAULT_TOLERANCE,
};

/// Largest condition number of the covariance-check matrices.
const GL_CONDITION: f64 = 10.0;

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub seed: u64,
    pub dim: usize,
    /// Quadrature resolution; the dimension's default when `None`.
    pub resolution: Option<usize>,
    /// Random instances per case; inequality cases add one dilate pair.
    pub instances: usize,
    pub tolerance: f64,
    pub cases: Vec<CaseId>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            dim: 2,
            resolution: None,
            instances: 100,
            tolerance: DEFAULT_TOLERANCE,
            cases: CaseId::all().collect(),
        }
    }
}

impl SuiteConfig {
    pub fn rule(&self) -> Result<SphereRule> {
        match self.resolution {
            Some(r) => SphereRule::new(self.dim, r),
            None => SphereRule::default_for(self.dim),
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SuiteOutcome {
    pub reports: Vec<InequalityReport>,
    pub limits: Vec<LimitReport>,
}

impl SuiteOutcome {
    pub fn all_pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass) && self.limits.iter().all(|r| r.pass)
    }

    pub fn reports_for(&self, case: CaseId) -> impl Iterator<Item = &InequalityReport> {
        self.reports.iter().filter(move |r| r.case == case)
    }
}

enum Output {
    Report(InequalityReport),
    Limits(Vec<LimitReport>),
}

/// Random hypothesis-satisfying instance of an inequality case.
pub fn random_inequality(
    case: CaseId,
    gen: &mut BodyGenerator,
    dilate: bool,
    rule: &SphereRule,
) -> Result<Inequality> {
    let (k, l) = gen.pair(dilate)?;
    Ok(match case {
        CaseId::Minkowski55 | CaseId::Proj74 => {
            let phi = gen.phi()?;
            let (k1, k2) = (gen.constant(), gen.constant());
            let l = if case == CaseId::Minkowski55 && phi.domain_bound().is_finite() {
                let fill = gen.uniform(0.3, 0.95);
                gen.fit_inside(&k, &l, k1, k2, fill * phi.domain_bound(), rule)?
            } else {
                l
            };
            if case == CaseId::Minkowski55 {
                Inequality::Minkowski { k, l, phi, k1, k2 }
            } else {
                Inequality::Projection { k, l, phi, k1, k2 }
            }
        }
        CaseId::Jensen54 => {
            let phi = match gen.index(3) {
                0 => OrliczFunction1::neglog_unnormalized(),
                1 => OrliczFunction1::neglog(),
                _ => gen.power_phi()?,
            };
            let (k1, k2) = (gen.constant(), gen.constant());
            let l = if phi.domain_bound().is_finite() {
                let fill = gen.uniform(0.3, 0.95);
                gen.fit_inside(&k, &l, k1, k2, fill * phi.domain_bound(), rule)?
            } else {
                l
            };
            Inequality::Jensen { k, l, phi, k1, k2 }
        }
        CaseId::Bm56 => Inequality::BrunnMinkowski {
            k,
            l,
            phi: gen.phi_sum(2)?,
            constants: gen.constants(2),
        },
        CaseId::Log65 => {
            let (k1, k2) = (gen.constant(), gen.constant());
            let fill = gen.uniform(0.3, 0.95);
            let l = gen.fit_inside(&k, &l, k1, k2, fill, rule)?;
            Inequality::LogMinkowski { k, l, k1, k2 }
        }
        CaseId::Log66 => Inequality::LogHarmonic {
            k,
            l,
            k1: 1.0,
            k2: 1.0,
        },
        CaseId::Hb14 => Inequality::HarmonicBlaschke { k, l },
        CaseId::LpCor55 => Inequality::LpDualMinkowski {
            k,
            l,
            p: gen.uniform(1.0, 5.0),
        },
        CaseId::LpCor57 => Inequality::LpHarmonicBrunnMinkowski {
            k,
            l,
            p: gen.uniform(1.0, 5.0),
        },
        CaseId::LpCor58 => {
            let n = gen.dim() as f64;
            Inequality::LpRadialBrunnMinkowski {
                k,
                l,
                p: gen.uniform(n, 3.0 * n),
            }
        }
        other => return Err(Error::Config(format!("{other} is not an inequality case"))),
    })
}

/// Random instance of a structural check.
pub fn random_structure(
    case: CaseId,
    gen: &mut BodyGenerator,
    seed: u64,
) -> Result<StructureCheck> {
    Ok(match case {
        CaseId::Monotone => {
            let inner = gen.sum_spec()?;
            let outer = inner
                .bodies()
                .iter()
                .map(|b| {
                    // leave some bodies unchanged
                    if gen.index(4) == 0 {
                        return Ok(b.clone());
                    }
                    let bump = gen.body()?;
                    let t = gen.uniform(0.01, 0.5);
                    radial_minkowski_comb(b, &bump, 1.0, t)
                })
                .collect::<Result<Vec<StarBody>>>()?;
            StructureCheck::Monotone { inner, outer }
        }
        CaseId::GlCovariant => {
            let spec = gen.sum_spec()?;
            let m = gen.matrix(GL_CONDITION);
            StructureCheck::gl_covariant(spec, m, seed)
        }
        CaseId::Continuous => {
            let spec = gen.sum_spec()?;
            let perturbations = (0..spec.bodies().len())
                .map(|_| gen.body())
                .collect::<Result<Vec<_>>>()?;
            StructureCheck::continuous(spec, perturbations)
        }
        CaseId::PolyExpansion => {
            let (k, l) = gen.pair(false)?;
            StructureCheck::PolyExpansion { k, l }
        }
        other => return Err(Error::Config(format!("{other} is not a structure case"))),
    })
}

/// Variational problems for one random pair with unit constants, one per
/// power 3/2 and 2.
pub fn random_limits(gen: &mut BodyGenerator) -> Result<Vec<VariationalProblem>> {
    let (k_body, l_body) = gen.pair(false)?;
    [1.5, 2.0]
        .into_iter()
        .map(|q| {
            let phi = OrliczFunction1::power(q)?;
            Ok(VariationalProblem {
                k_body: k_body.clone(),
                l_body: l_body.clone(),
                phi1: phi.clone(),
                phi2: phi,
                k: 1.0,
                k1: 1.0,
                k2: 1.0,
            })
        })
        .collect()
}

fn run_task(case: CaseId, instance: usize, cfg: &SuiteConfig, rule: &SphereRule) -> Result<Output> {
    let mut gen = BodyGenerator::for_case(cfg.dim, cfg.seed, case, instance);
    if CaseId::INEQUALITIES.contains(&case) {
        let dilate = instance == cfg.instances;
        let ineq = random_inequality(case, &mut gen, dilate, rule)?;
        Ok(Output::Report(
            verify_inequality(&ineq, rule, cfg.tolerance)?.at_instance(instance),
        ))
    } else if CaseId::STRUCTURE.contains(&case) {
        let direction_seed = cfg.seed ^ (case.index() << 32) ^ instance as u64;
        let check = random_structure(case, &mut gen, direction_seed)?;
        Ok(Output::Report(
            verify_structure(&check, rule, cfg.tolerance)?.at_instance(instance),
        ))
    } else {
        let reports = random_limits(&mut gen)?
            .iter()
            .map(|p| Ok(verify_variational_limit(p, rule, &DEFAULT_LADDER)?.at_instance(instance)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Output::Limits(reports))
    }
}

/// Runs every selected case on seeded random instances.
///
/// Tasks run through [`exec`], but each one draws from its own stream and
/// results are gathered in (case, instance) order, so the outcome depends
/// only on the configuration.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteOutcome> {
    if !(cfg.tolerance > 0.0) {
        return Err(Error::Config(format!(
            "tolerance must be positive, got {}",
            cfg.tolerance
        )));
    }
    let rule = cfg.rule()?;
    let mut cases = cfg.cases.clone();
    cases.sort();
    cases.dedup();
    let tasks: Vec<(CaseId, usize)> = cases
        .iter()
        .flat_map(|&case| {
            let extra = usize::from(CaseId::INEQUALITIES.contains(&case));
            (0..cfg.instances + extra).map(move |i| (case, i))
        })
        .collect();
    let outputs = exec::try_map_range(tasks.len(), |t| {
        let (case, instance) = tasks[t];
        run_task(case, instance, cfg, &rule)
            .map_err(|e| e.context(format!("{case} instance {instance}")))
    })?;
    let mut outcome = SuiteOutcome::default();
    for out in outputs {
        match out {
            Output::Report(r) => outcome.reports.push(r),
            Output::Limits(ls) => outcome.limits.extend(ls),
        }
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes_and_is_deterministic() {
        let cfg = SuiteConfig {
            seed: 7,
            resolution: Some(256),
            instances: 3,
            ..Default::default()
        };
        let a = run_suite(&cfg).unwrap();
        assert!(a.all_pass(), "{a:?}");
        assert_eq!(a.reports.len(), 10 * 4 + 4 * 3);
        assert_eq!(a.limits.len(), 2 * 3);
        let b = run_suite(&cfg).unwrap();
        assert_eq!(a.reports, b.reports);
        assert_eq!(a.limits, b.limits);
    }

    #[test]
    fn dilate_instance_is_flagged() {
        let cfg = SuiteConfig {
            seed: 1,
            resolution: Some(128),
            instances: 2,
            cases: vec![CaseId::Hb14],
            ..Default::default()
        };
        let out = run_suite(&cfg).unwrap();
        let last = out.reports.last().unwrap();
        assert_eq!(last.instance, Some(2));
        assert!(last.equality_case);
    }
}
