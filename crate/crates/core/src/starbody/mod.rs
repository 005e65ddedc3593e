//! Star bodies given by their radial functions.
//!
//! A [`StarBody`] is a cheap-to-clone handle on an immutable node. Leaf nodes
//! (balls, ℓ_p balls, trigonometric polynomials) evaluate in closed form;
//! composite nodes (linear images, dilates, additions) evaluate their
//! children first. Samples on a [`SphereRule`] are cached per body and rule.

mod quadrature;

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector};

pub use quadrature::{
    build_quadrature, integrate_sphere, surface_area, unit_ball_volume, RuleKey, RuleKind,
    SphereRule, DEFAULT_MONTE_CARLO_NODES, DEFAULT_RESOLUTION_2D, DEFAULT_RESOLUTION_3D,
    MIN_RESOLUTION,
};

use crate::additions::{self, SumSpec};
use crate::roots::BracketConfig;
use crate::{exec, Error, Result};

/// Grid size for the positivity scan of trigonometric radial functions.
const TRIG_POSITIVITY_GRID: usize = 4096;
const TRIG_POSITIVITY_FLOOR: f64 = 1e-9;
/// Largest condition number accepted for a linear image.
const MAX_CONDITION: f64 = 1e12;

/// A unit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction(Vec<f64>);

impl Direction {
    /// Accepts `u` if |u| = 1 within 1e-14.
    pub fn new(u: Vec<f64>) -> Result<Self> {
        let norm = euclidean_norm(&u);
        if (norm - 1.0).abs() > 1e-14 {
            return Err(Error::Config(format!(
                "|u| = {norm}, expected a unit vector"
            )));
        }
        Ok(Direction(u))
    }

    pub fn normalized(v: Vec<f64>) -> Result<Self> {
        let norm = euclidean_norm(&v);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Config("cannot normalize a zero vector".into()));
        }
        Ok(Direction(v.into_iter().map(|x| x / norm).collect()))
    }

    /// (cos θ, sin θ).
    pub fn from_angle(theta: f64) -> Self {
        Direction(vec![theta.cos(), theta.sin()])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Deref for Direction {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

pub(crate) fn euclidean_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) enum Kind {
    Ball {
        r: f64,
    },
    LpBall {
        p: f64,
        scale: f64,
    },
    TrigPoly {
        a0: f64,
        cos: Vec<f64>,
        sin: Vec<f64>,
    },
    LinearImage {
        matrix: DMatrix<f64>,
        inverse: DMatrix<f64>,
        child: StarBody,
    },
    Dilate {
        c: f64,
        child: StarBody,
    },
    OrliczSum {
        spec: SumSpec,
        cfg: BracketConfig,
    },
    RadialComb {
        coeffs: Vec<f64>,
        children: Vec<StarBody>,
    },
    LpRadialSum {
        p: f64,
        children: Vec<StarBody>,
    },
    /// ρ^{n+p}/V(sum) = Σ_j ρ_j^{n+p}/V_j with volumes fixed on a rule.
    HarmonicBlaschke {
        p: f64,
        children: Vec<StarBody>,
        volumes: Vec<f64>,
        sum_volume: f64,
    },
}

impl Kind {
    fn name(&self) -> &'static str {
        match self {
            Kind::Ball { .. } => "ball",
            Kind::LpBall { .. } => "lp_ball",
            Kind::TrigPoly { .. } => "radial_trig_poly",
            Kind::LinearImage { .. } => "linear_image",
            Kind::Dilate { .. } => "dilate",
            Kind::OrliczSum { .. } => "orlicz_sum",
            Kind::RadialComb { .. } => "radial_comb",
            Kind::LpRadialSum { .. } => "lp_radial_sum",
            Kind::HarmonicBlaschke { .. } => "harmonic_blaschke",
        }
    }
}

struct Node {
    dim: usize,
    kind: Kind,
    cache: Mutex<HashMap<RuleKey, Arc<[f64]>>>,
}

#[derive(Clone)]
pub struct StarBody(Arc<Node>);

impl fmt::Debug for StarBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StarBody({}, n={})", self.0.kind.name(), self.0.dim)
    }
}

impl StarBody {
    pub(crate) fn from_kind(dim: usize, kind: Kind) -> Self {
        StarBody(Arc::new(Node {
            dim,
            kind,
            cache: Mutex::new(HashMap::new()),
        }))
    }

    pub(crate) fn kind(&self) -> &Kind {
        &self.0.kind
    }

    pub fn ball(dim: usize, r: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Config(format!(
                "ball radius must be positive, got {r}"
            )));
        }
        Ok(Self::from_kind(dim, Kind::Ball { r }))
    }

    /// `scale · B_p`, radial function scale/‖u‖_p. Any p > 0 gives a star body.
    pub fn lp_ball(dim: usize, p: f64, scale: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::Config(format!(
                "lp_ball exponent must be positive, got {p}"
            )));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Config(format!(
                "lp_ball scale must be positive, got {scale}"
            )));
        }
        Ok(Self::from_kind(dim, Kind::LpBall { p, scale }))
    }

    /// Planar body with ρ(θ) = a0 + Σ_k (cos[k-1]·cos kθ + sin[k-1]·sin kθ).
    pub fn radial_trig_poly(a0: f64, cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        if !a0.is_finite() || cos.iter().chain(&sin).any(|c| !c.is_finite()) {
            return Err(Error::Config(
                "trigonometric coefficients must be finite".into(),
            ));
        }
        let kind = Kind::TrigPoly { a0, cos, sin };
        let min = (0..TRIG_POSITIVITY_GRID)
            .map(|i| {
                let theta = 2.0 * PI * i as f64 / TRIG_POSITIVITY_GRID as f64;
                trig_value(&kind, theta)
            })
            .fold(f64::INFINITY, f64::min);
        if !(min > TRIG_POSITIVITY_FLOOR) {
            return Err(Error::Degenerate { value: min });
        }
        Ok(Self::from_kind(2, kind))
    }

    /// c·K.
    pub fn dilate(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Config(format!(
                "dilation factor must be positive, got {c}"
            )));
        }
        Ok(Self::from_kind(
            self.dim(),
            Kind::Dilate {
                c,
                child: self.clone(),
            },
        ))
    }

    /// AK, with ρ(AK,u) = ρ(K, A⁻¹u/|A⁻¹u|) / |A⁻¹u|.
    pub fn linear_image(&self, matrix: DMatrix<f64>) -> Result<Self> {
        let n = self.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::Dimension {
                expected: n,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        let cond = condition_number(&matrix);
        if !(cond.is_finite() && cond <= MAX_CONDITION) {
            return Err(Error::Matrix(format!(
                "matrix is singular (condition number {cond:e})"
            )));
        }
        let inverse = matrix
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Matrix("matrix is singular".into()))?;
        Ok(Self::from_kind(
            n,
            Kind::LinearImage {
                matrix,
                inverse,
                child: self.clone(),
            },
        ))
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    /// Short name of the node kind.
    pub fn kind_name(&self) -> &'static str {
        self.0.kind.name()
    }

    /// The matrix of a linear image node.
    pub fn matrix(&self) -> Option<&DMatrix<f64>> {
        match &self.0.kind {
            Kind::LinearImage { matrix, .. } => Some(matrix),
            _ => None,
        }
    }

    /// ρ(K,u) for a unit vector `u` of matching dimension.
    pub fn radial(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: u.len(),
            });
        }
        let norm2: f64 = u.iter().map(|x| x * x).sum();
        if (norm2 - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "|u| = {}, expected a unit vector",
                norm2.sqrt()
            )));
        }
        let v = self.eval(u)?;
        positive(v).map_err(|e| e.at_direction(u))
    }

    /// Radial function without input validation; `u` must be a unit vector.
    pub(crate) fn eval(&self, u: &[f64]) -> Result<f64> {
        let n = self.dim() as f64;
        match &self.0.kind {
            Kind::Ball { r } => Ok(*r),
            Kind::LpBall { p, scale } => {
                let s: f64 = u.iter().map(|x| x.abs().powf(*p)).sum();
                Ok(scale / s.powf(1.0 / p))
            }
            Kind::TrigPoly { .. } => Ok(trig_value(&self.0.kind, u[1].atan2(u[0]))),
            Kind::LinearImage { inverse, child, .. } => {
                let v = inverse * DVector::from_column_slice(u);
                let len = v.norm();
                let w: Vec<f64> = v.iter().map(|x| x / len).collect();
                Ok(child.eval(&w)? / len)
            }
            Kind::Dilate { c, child } => Ok(c * child.eval(u)?),
            Kind::OrliczSum { spec, cfg } => {
                let radii = spec
                    .bodies()
                    .iter()
                    .map(|b| b.eval(u))
                    .collect::<Result<Vec<_>>>()?;
                additions::solve_radius(spec, &radii, cfg).map_err(|e| e.at_direction(u))
            }
            Kind::RadialComb { coeffs, children } => {
                let mut total = 0.0;
                for (c, b) in coeffs.iter().zip(children) {
                    if *c != 0.0 {
                        total += c * b.eval(u)?;
                    }
                }
                Ok(total)
            }
            Kind::LpRadialSum { p, children } => {
                let mut total = 0.0;
                for b in children {
                    total += b.eval(u)?.powf(*p);
                }
                Ok(total.powf(1.0 / p))
            }
            Kind::HarmonicBlaschke {
                p,
                children,
                volumes,
                sum_volume,
            } => {
                let e = n + p;
                let mut f = 0.0;
                for (b, v) in children.iter().zip(volumes) {
                    f += b.eval(u)?.powf(e) / v;
                }
                Ok((sum_volume * f).powf(1.0 / e))
            }
        }
    }

    /// ρ(K,·) at every node of `rule`, cached per rule.
    pub fn samples(&self, rule: &SphereRule) -> Result<Arc<[f64]>> {
        if rule.dim() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: rule.dim(),
            });
        }
        let key = rule.key();
        if let Some(hit) = self
            .0
            .cache
            .lock()
            .expect("radial cache poisoned")
            .get(&key)
        {
            return Ok(hit.clone());
        }
        let values = self.compute_samples(rule)?;
        if let Some((index, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v > 0.0 && v.is_finite()))
        {
            return Err(Error::Degenerate { value: *v }.at_node(index));
        }
        let values: Arc<[f64]> = values.into();
        // identical values if another thread filled the slot first
        self.0
            .cache
            .lock()
            .expect("radial cache poisoned")
            .insert(key, values.clone());
        Ok(values)
    }

    fn compute_samples(&self, rule: &SphereRule) -> Result<Vec<f64>> {
        let m = rule.len();
        let n = self.dim() as f64;
        match &self.0.kind {
            Kind::Ball { r } => Ok(vec![*r; m]),
            Kind::Dilate { c, child } => Ok(child.samples(rule)?.iter().map(|v| c * v).collect()),
            Kind::OrliczSum { spec, cfg } => {
                let children = spec
                    .bodies()
                    .iter()
                    .map(|b| b.samples(rule))
                    .collect::<Result<Vec<_>>>()?;
                exec::try_map_range(m, |i| {
                    let radii: Vec<f64> = children.iter().map(|s| s[i]).collect();
                    additions::solve_radius(spec, &radii, cfg)
                        .map_err(|e| e.at_direction(rule.node(i)))
                })
            }
            Kind::RadialComb { coeffs, children } => {
                let mut out = vec![0.0; m];
                for (c, b) in coeffs.iter().zip(children) {
                    if *c == 0.0 {
                        continue;
                    }
                    for (o, v) in out.iter_mut().zip(b.samples(rule)?.iter()) {
                        *o += c * v;
                    }
                }
                Ok(out)
            }
            Kind::LpRadialSum { p, children } => {
                let mut out = vec![0.0; m];
                for b in children {
                    for (o, v) in out.iter_mut().zip(b.samples(rule)?.iter()) {
                        *o += v.powf(*p);
                    }
                }
                Ok(out.into_iter().map(|s| s.powf(1.0 / p)).collect())
            }
            Kind::HarmonicBlaschke {
                p,
                children,
                volumes,
                sum_volume,
            } => {
                let e = n + p;
                let mut f = vec![0.0; m];
                for (b, vol) in children.iter().zip(volumes) {
                    for (o, v) in f.iter_mut().zip(b.samples(rule)?.iter()) {
                        *o += v.powf(e) / vol;
                    }
                }
                Ok(f.into_iter()
                    .map(|x| (sum_volume * x).powf(1.0 / e))
                    .collect())
            }
            Kind::LpBall { .. } | Kind::TrigPoly { .. } | Kind::LinearImage { .. } => {
                exec::try_map_range(m, |i| self.eval(rule.node(i)))
            }
        }
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::Config(format!("dimension must be >= 2, got {dim}")));
    }
    Ok(())
}

fn positive(v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Degenerate { value: v })
    }
}

fn trig_value(kind: &Kind, theta: f64) -> f64 {
    let Kind::TrigPoly { a0, cos, sin } = kind else {
        unreachable!("trig_value on a non-trigonometric body")
    };
    let mut v = *a0;
    for (k, c) in cos.iter().enumerate() {
        v += c * ((k + 1) as f64 * theta).cos();
    }
    for (k, s) in sin.iter().enumerate() {
        v += s * ((k + 1) as f64 * theta).sin();
    }
    v
}

/// Ratio of extreme singular values; infinite for singular matrices.
pub fn condition_number(matrix: &DMatrix<f64>) -> f64 {
    if matrix.iter().any(|x| !x.is_finite()) {
        return f64::INFINITY;
    }
    let sv = matrix.clone().svd(false, false).singular_values;
    let max = sv.max();
    let min = sv.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Radial Hausdorff distance max_i |ρ_K(u_i) - ρ_L(u_i)| over the nodes.
pub fn radial_hausdorff(k: &StarBody, l: &StarBody, rule: &SphereRule) -> Result<f64> {
    let a = k.samples(rule)?;
    let b = l.samples(rule)?;
    Ok(a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit(theta: f64) -> Vec<f64> {
        vec![theta.cos(), theta.sin()]
    }

    #[test]
    fn ball_radial() {
        let b = StarBody::ball(2, 1.5).unwrap();
        assert_eq!(b.radial(&unit(0.3)).unwrap(), 1.5);
        assert!(StarBody::ball(2, -1.0).is_err());
        assert!(StarBody::ball(1, 1.0).is_err());
    }

    #[test]
    fn cross_polytope_radial() {
        let k = StarBody::lp_ball(2, 1.0, 1.0).unwrap();
        let s = 0.5f64.sqrt();
        assert_relative_eq!(
            k.radial(&[s, s]).unwrap(),
            0.7071067811865475,
            max_relative = 1e-15
        );
        assert_relative_eq!(k.radial(&[1.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn ellipse_radial() {
        let b = StarBody::ball(2, 1.0).unwrap();
        let e = b
            .linear_image(DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]))
            .unwrap();
        assert_relative_eq!(e.radial(&[1.0, 0.0]).unwrap(), 2.0, max_relative = 1e-15);
        let s = 0.5f64.sqrt();
        // |A⁻¹u| = sqrt(1/8 + 1/2)
        assert_relative_eq!(
            e.radial(&[s, s]).unwrap(),
            (8.0f64 / 5.0).sqrt(),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            e.radial(&[s, s]).unwrap(),
            1.264911064067352,
            max_relative = 1e-12
        );
    }

    #[test]
    fn identity_and_scaling_images() {
        let rule = SphereRule::new(2, 64).unwrap();
        let k = StarBody::radial_trig_poly(1.0, vec![0.0, 0.2], vec![0.1]).unwrap();
        let same = k.linear_image(DMatrix::identity(2, 2)).unwrap();
        let a = k.samples(&rule).unwrap();
        let b = same.samples(&rule).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            assert_relative_eq!(x, y, max_relative = 1e-15);
        }
        let ball = StarBody::ball(2, 1.0).unwrap();
        let twice = ball.linear_image(DMatrix::identity(2, 2) * 2.0).unwrap();
        assert!(twice
            .samples(&rule)
            .unwrap()
            .iter()
            .all(|v| (v - 2.0).abs() < 1e-15));
    }

    #[test]
    fn singular_matrix_rejected() {
        let b = StarBody::ball(2, 1.0).unwrap();
        let err = b
            .linear_image(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]))
            .unwrap_err();
        assert!(matches!(err, Error::Matrix(_)));
        assert!(b.linear_image(DMatrix::identity(3, 3)).is_err());
    }

    #[test]
    fn image_then_inverse_restores() {
        let rule = SphereRule::new(2, 256).unwrap();
        let k = StarBody::lp_ball(2, 3.0, 1.2).unwrap();
        let a = DMatrix::from_row_slice(2, 2, &[1.3, 0.4, -0.7, 2.1]);
        let inv = a.clone().try_inverse().unwrap();
        let back = k.linear_image(a).unwrap().linear_image(inv).unwrap();
        let x = k.samples(&rule).unwrap();
        let y = back.samples(&rule).unwrap();
        for (p, q) in x.iter().zip(y.iter()) {
            assert_relative_eq!(p, q, max_relative = 1e-12);
        }
    }

    #[test]
    fn trig_poly_positivity() {
        assert!(StarBody::radial_trig_poly(1.0, vec![0.0, 0.0, 0.3], vec![]).is_ok());
        assert!(matches!(
            StarBody::radial_trig_poly(1.0, vec![1.0], vec![]),
            Err(Error::Degenerate { .. })
        ));
        assert!(StarBody::radial_trig_poly(1.0, vec![0.8], vec![0.8]).is_err());
    }

    #[test]
    fn trig_poly_values() {
        let k = StarBody::radial_trig_poly(1.0, vec![0.0, 0.0, 0.3], vec![]).unwrap();
        assert_relative_eq!(k.radial(&unit(0.0)).unwrap(), 1.3);
        assert_relative_eq!(
            k.radial(&unit(PI / 3.0)).unwrap(),
            0.7,
            max_relative = 1e-14
        );
        assert!(k.radial(&[1.0, 0.0, 0.0]).is_err());
        assert!(k.radial(&[2.0, 0.0]).is_err());
    }

    #[test]
    fn samples_cached_and_dimension_checked() {
        let rule = SphereRule::new(2, 32).unwrap();
        let k = StarBody::lp_ball(2, 1.5, 1.0).unwrap();
        let a = k.samples(&rule).unwrap();
        let b = k.samples(&rule).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        let r3 = SphereRule::new(3, 8).unwrap();
        assert!(k.samples(&r3).is_err());
    }

    #[test]
    fn three_dimensional_image() {
        let b = StarBody::ball(3, 1.0).unwrap();
        let e = b
            .linear_image(DMatrix::from_diagonal(&DVector::from_vec(vec![
                1.0, 2.0, 3.0,
            ])))
            .unwrap();
        assert_relative_eq!(
            e.radial(&[0.0, 0.0, 1.0]).unwrap(),
            3.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn direction_validation() {
        assert!(Direction::new(vec![1.0, 0.0]).is_ok());
        assert!(Direction::new(vec![1.0, 0.1]).is_err());
        let d = Direction::normalized(vec![3.0, 4.0]).unwrap();
        assert_relative_eq!(d[0], 0.6);
        assert!(Direction::normalized(vec![0.0, 0.0]).is_err());
        assert_eq!(Direction::from_angle(0.0).dim(), 2);
    }

    #[test]
    fn hausdorff_is_a_metric_on_nodes() {
        let rule = SphereRule::new(2, 128).unwrap();
        let a = StarBody::ball(2, 1.0).unwrap();
        let b = StarBody::lp_ball(2, 1.0, 1.0).unwrap();
        let c = StarBody::radial_trig_poly(1.1, vec![0.2], vec![]).unwrap();
        let ab = radial_hausdorff(&a, &b, &rule).unwrap();
        let ba = radial_hausdorff(&b, &a, &rule).unwrap();
        let bc = radial_hausdorff(&b, &c, &rule).unwrap();
        let ac = radial_hausdorff(&a, &c, &rule).unwrap();
        assert_eq!(ab, ba);
        assert!(ac <= ab + bc);
        assert_eq!(radial_hausdorff(&a, &a, &rule).unwrap(), 0.0);
    }

    #[test]
    fn condition_numbers() {
        assert_relative_eq!(condition_number(&DMatrix::identity(3, 3)), 1.0);
        let d = DMatrix::from_row_slice(2, 2, &[10.0, 0.0, 0.0, 1.0]);
        assert_relative_eq!(condition_number(&d), 10.0, max_relative = 1e-14);
        assert!(condition_number(&DMatrix::zeros(2, 2)).is_infinite());
    }
}
