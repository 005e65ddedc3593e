use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::additions::{orlicz_sum, radial_minkowski_comb, SumSpec};
use crate::functionals::{dual_mixed_volume_i, volume};
use crate::starbody::{radial_hausdorff, Direction, SphereRule, StarBody};
use crate::{Error, Result};

use super::{CaseId, InequalityReport};

/// Number of random directions compared by the covariance check.
pub const GL_DIRECTIONS: usize = 64;

/// Steps h for the continuity check.
pub const CONTINUITY_STEPS: [f64; 3] = [1e-3, 1e-4, 1e-5];

/// Allowed relative drift of δ̃(h)/h between consecutive steps.
pub const CONTINUITY_TOLERANCE: f64 = 1e-2;

/// The t grid for the polynomial expansion fit.
pub const POLY_GRID: [f64; 5] = [0.0, 0.25, 0.5, 1.0, 2.0];

/// Relative tolerance on the fitted coefficients.
pub const POLY_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug)]
pub enum StructureCheck {
    /// K_j ⊂ K'_j for all j implies the sums are nested.
    Monotone {
        inner: SumSpec,
        outer: Vec<StarBody>,
    },
    /// The sum of the images A K_j is the image of the sum.
    GlCovariant {
        spec: SumSpec,
        matrix: DMatrix<f64>,
        directions: Vec<Direction>,
    },
    /// δ̃(sum of K_j + hP_j, sum of K_j) is O(h) with a stable constant.
    Continuous {
        spec: SumSpec,
        perturbations: Vec<StarBody>,
        steps: Vec<f64>,
    },
    /// V(K +̃ tL) is the polynomial Σ C(n,i) tⁱ Ṽ_i(K,L).
    PolyExpansion { k: StarBody, l: StarBody },
}

impl StructureCheck {
    pub fn case(&self) -> CaseId {
        match self {
            StructureCheck::Monotone { .. } => CaseId::Monotone,
            StructureCheck::GlCovariant { .. } => CaseId::GlCovariant,
            StructureCheck::Continuous { .. } => CaseId::Continuous,
            StructureCheck::PolyExpansion { .. } => CaseId::PolyExpansion,
        }
    }

    /// Covariance check on [`GL_DIRECTIONS`] directions drawn from `seed`.
    pub fn gl_covariant(spec: SumSpec, matrix: DMatrix<f64>, seed: u64) -> Self {
        let n = spec.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let directions = (0..GL_DIRECTIONS)
            .map(|_| loop {
                let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
                if let Ok(d) = Direction::normalized(v) {
                    break d;
                }
            })
            .collect();
        StructureCheck::GlCovariant {
            spec,
            matrix,
            directions,
        }
    }

    pub fn continuous(spec: SumSpec, perturbations: Vec<StarBody>) -> Self {
        StructureCheck::Continuous {
            spec,
            perturbations,
            steps: CONTINUITY_STEPS.to_vec(),
        }
    }
}

fn with_bodies(spec: &SumSpec, bodies: Vec<StarBody>) -> Result<SumSpec> {
    SumSpec::new(bodies, spec.phi().clone(), spec.k(), spec.ks().to_vec())
}

fn binomial(n: usize, i: usize) -> f64 {
    (0..i).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Least-squares coefficients of V(K +̃ tL) in powers of t.
pub fn fit_expansion(
    k: &StarBody,
    l: &StarBody,
    grid: &[f64],
    rule: &SphereRule,
) -> Result<Vec<f64>> {
    let n = k.dim();
    if grid.len() < n + 1 {
        return Err(Error::Config(format!(
            "need at least {} grid points, got {}",
            n + 1,
            grid.len()
        )));
    }
    let values = grid
        .iter()
        .map(|t| volume(&radial_minkowski_comb(k, l, 1.0, *t)?, rule))
        .collect::<Result<Vec<_>>>()?;
    let a = DMatrix::from_fn(grid.len(), n + 1, |r, c| grid[r].powi(c as i32));
    let b = DVector::from_vec(values);
    let coeffs = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::Matrix(e.to_string()))?;
    Ok(coeffs.iter().copied().collect())
}

/// Runs a structural check; the report carries the deviation as its rhs.
pub fn verify_structure(
    check: &StructureCheck,
    rule: &SphereRule,
    tol: f64,
) -> Result<InequalityReport> {
    let case = check.case();
    match check {
        StructureCheck::Monotone { inner, outer } => {
            if outer.len() != inner.bodies().len() {
                return Err(Error::Config("inner and outer body counts differ".into()));
            }
            for (j, (a, b)) in inner.bodies().iter().zip(outer).enumerate() {
                let (ra, rb) = (a.samples(rule)?, b.samples(rule)?);
                if let Some(i) = (0..ra.len()).find(|&i| rb[i] < ra[i]) {
                    return Err(Error::Precondition(format!(
                        "outer body {j} does not contain inner body {j} at node {i}"
                    )));
                }
            }
            let small = orlicz_sum(inner.clone()).samples(rule)?;
            let large = orlicz_sum(with_bodies(inner, outer.clone())?).samples(rule)?;
            let gap = small
                .iter()
                .zip(large.iter())
                .map(|(s, l)| l - s)
                .fold(f64::INFINITY, f64::min);
            let scale = large.iter().copied().fold(1.0, f64::max);
            Ok(InequalityReport::with_tolerance(
                case,
                gap,
                0.0,
                tol * scale,
                false,
            ))
        }
        StructureCheck::GlCovariant {
            spec,
            matrix,
            directions,
        } => {
            let images = spec
                .bodies()
                .iter()
                .map(|b| b.linear_image(matrix.clone()))
                .collect::<Result<Vec<_>>>()?;
            let of_images = orlicz_sum(with_bodies(spec, images)?);
            let image_of_sum = orlicz_sum(spec.clone()).linear_image(matrix.clone())?;
            let mut deviation: f64 = 0.0;
            for u in directions {
                let a = of_images.radial(u)?;
                let b = image_of_sum.radial(u)?;
                deviation = deviation.max((a - b).abs() / b);
            }
            Ok(InequalityReport::deviation(case, deviation, tol))
        }
        StructureCheck::Continuous {
            spec,
            perturbations,
            steps,
        } => {
            if perturbations.len() != spec.bodies().len() {
                return Err(Error::Config(
                    "one perturbation per body is required".into(),
                ));
            }
            if steps.len() < 2 || steps.windows(2).any(|w| !(w[1] < w[0])) || steps[0] <= 0.0 {
                return Err(Error::Config(
                    "steps must be positive and strictly decreasing".into(),
                ));
            }
            let base = orlicz_sum(spec.clone());
            let mut ratios = Vec::with_capacity(steps.len());
            let mut prev = f64::INFINITY;
            for &h in steps {
                let bodies = spec
                    .bodies()
                    .iter()
                    .zip(perturbations)
                    .map(|(k, p)| radial_minkowski_comb(k, p, 1.0, h))
                    .collect::<Result<Vec<_>>>()?;
                let d = radial_hausdorff(&orlicz_sum(with_bodies(spec, bodies)?), &base, rule)?;
                if !(d < prev) {
                    return Ok(InequalityReport::deviation(
                        case,
                        f64::INFINITY,
                        CONTINUITY_TOLERANCE,
                    ));
                }
                prev = d;
                ratios.push(d / h);
            }
            let drift = ratios
                .windows(2)
                .map(|w| ((w[1] - w[0]) / w[0]).abs())
                .fold(0.0, f64::max);
            Ok(InequalityReport::deviation(
                case,
                drift,
                CONTINUITY_TOLERANCE,
            ))
        }
        StructureCheck::PolyExpansion { k, l } => {
            let n = k.dim();
            let fitted = fit_expansion(k, l, &POLY_GRID, rule)?;
            let mut deviation: f64 = 0.0;
            for (i, c) in fitted.iter().enumerate() {
                let expected = binomial(n, i) * dual_mixed_volume_i(k, l, i, rule)?;
                deviation = deviation.max(((c - expected) / expected).abs());
            }
            Ok(InequalityReport::deviation(case, deviation, POLY_TOLERANCE))
        }
    }
}
