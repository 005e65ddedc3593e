//! Quadrature rules on the unit sphere S^{n-1}.
//!
//! * n = 2: trapezoidal rule on a uniform angular grid. Spectrally accurate
//!   for smooth periodic integrands.
//! * n = 3: Gauss–Legendre in z = cos(polar angle) times a uniform azimuth
//!   grid with twice as many points.
//! * n >= 4: seeded Monte Carlo with equal weights.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{exec, Error, Result};

pub const DEFAULT_RESOLUTION_2D: usize = 1024;
pub const DEFAULT_RESOLUTION_3D: usize = 64;
pub const DEFAULT_MONTE_CARLO_NODES: usize = 1 << 14;
pub const MIN_RESOLUTION: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleKind {
    Trapezoid,
    GaussProduct,
    MonteCarlo { seed: u64 },
}

/// Identity of a rule for caching radial samples. Two rules with the same
/// key have identical nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RuleKey {
    pub dim: usize,
    pub resolution: usize,
    pub kind: RuleKind,
}

#[derive(Debug, Clone)]
pub struct SphereRule {
    key: RuleKey,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Surface measure of S^{n-1}, i.e. nκ_n.
pub fn surface_area(n: usize) -> f64 {
    // ω_1 = 2 (two points), ω_2 = 2π, ω_{k+2} = 2π ω_k / k
    let (mut k, mut area) = if n % 2 == 1 { (1, 2.0) } else { (2, 2.0 * PI) };
    while k < n {
        area *= 2.0 * PI / k as f64;
        k += 2;
    }
    area
}

/// Volume κ_n of the unit ball.
pub fn unit_ball_volume(n: usize) -> f64 {
    surface_area(n) / n as f64
}

/// Deterministic rule for n ∈ {2,3}; Monte Carlo with seed 0 and
/// `resolution` nodes otherwise.
pub fn build_quadrature(n: usize, resolution: usize) -> Result<SphereRule> {
    SphereRule::new(n, resolution)
}

/// Σ_i w_i f(u_i).
pub fn integrate_sphere<F>(rule: &SphereRule, f: F) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    rule.integrate(f)
}

impl SphereRule {
    pub fn new(n: usize, resolution: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config(format!(
                "sphere dimension must be >= 2, got {n}"
            )));
        }
        if resolution < MIN_RESOLUTION {
            return Err(Error::Config(format!(
                "resolution must be at least {MIN_RESOLUTION}, got {resolution}"
            )));
        }
        match n {
            2 => Ok(Self::circle(resolution)),
            3 => Ok(Self::gauss_product(resolution)),
            _ => Self::monte_carlo(n, resolution, 0),
        }
    }

    /// Default rule: 1024 nodes on the circle, 64×128 on S², Monte Carlo above.
    pub fn default_for(n: usize) -> Result<Self> {
        match n {
            2 => Self::new(2, DEFAULT_RESOLUTION_2D),
            3 => Self::new(3, DEFAULT_RESOLUTION_3D),
            _ => Self::monte_carlo(n, DEFAULT_MONTE_CARLO_NODES, 0),
        }
    }

    pub fn monte_carlo(n: usize, count: usize, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config(format!(
                "sphere dimension must be >= 2, got {n}"
            )));
        }
        if count < MIN_RESOLUTION {
            return Err(Error::Config(format!(
                "node count must be at least {MIN_RESOLUTION}, got {count}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut nodes = Vec::with_capacity(n * count);
        let mut v = vec![0.0; n];
        for _ in 0..count {
            loop {
                for x in v.iter_mut() {
                    *x = StandardNormal.sample(&mut rng);
                }
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 1e-12 {
                    nodes.extend(v.iter().map(|x| x / norm));
                    break;
                }
            }
        }
        let w = surface_area(n) / count as f64;
        Ok(SphereRule {
            key: RuleKey {
                dim: n,
                resolution: count,
                kind: RuleKind::MonteCarlo { seed },
            },
            nodes,
            weights: vec![w; count],
        })
    }

    fn circle(m: usize) -> Self {
        let mut nodes = Vec::with_capacity(2 * m);
        for i in 0..m {
            let theta = 2.0 * PI * i as f64 / m as f64;
            nodes.push(theta.cos());
            nodes.push(theta.sin());
        }
        SphereRule {
            key: RuleKey {
                dim: 2,
                resolution: m,
                kind: RuleKind::Trapezoid,
            },
            nodes,
            weights: vec![2.0 * PI / m as f64; m],
        }
    }

    fn gauss_product(m: usize) -> Self {
        let (z, wz) = gauss_legendre(m);
        let azimuths = 2 * m;
        let dphi = 2.0 * PI / azimuths as f64;
        let mut nodes = Vec::with_capacity(3 * m * azimuths);
        let mut weights = Vec::with_capacity(m * azimuths);
        for (zi, wi) in z.iter().zip(&wz) {
            let s = (1.0 - zi * zi).sqrt();
            for j in 0..azimuths {
                let phi = dphi * j as f64;
                nodes.extend_from_slice(&[s * phi.cos(), s * phi.sin(), *zi]);
                weights.push(wi * dphi);
            }
        }
        SphereRule {
            key: RuleKey {
                dim: 3,
                resolution: m,
                kind: RuleKind::GaussProduct,
            },
            nodes,
            weights,
        }
    }

    pub fn key(&self) -> RuleKey {
        self.key
    }

    pub fn dim(&self) -> usize {
        self.key.dim
    }

    pub fn resolution(&self) -> usize {
        self.key.resolution
    }

    pub fn kind(&self) -> RuleKind {
        self.key.kind
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        let n = self.key.dim;
        &self.nodes[i * n..(i + 1) * n]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[f64]> {
        self.nodes.chunks_exact(self.key.dim)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Polar angle of each node for circle rules.
    pub fn angles(&self) -> Option<Vec<f64>> {
        (self.key.kind == RuleKind::Trapezoid).then(|| {
            let m = self.len();
            (0..m).map(|i| 2.0 * PI * i as f64 / m as f64).collect()
        })
    }

    /// Σ_i w_i f(u_i); a non-finite value is reported with its node.
    pub fn integrate<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&[f64]) -> f64 + Sync + Send,
    {
        let values = exec::map_range(self.len(), |i| f(self.node(i)));
        self.integrate_values(&values)
    }

    /// Σ_i w_i v_i for values already sampled at the nodes.
    pub fn integrate_values(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                found: values.len(),
            });
        }
        // Neumaier-compensated: differences of nearby integrals (variational
        // quotients) would otherwise inherit the O(N·eps) accumulation error.
        let (mut total, mut carry) = (0.0f64, 0.0f64);
        for (index, (w, v)) in self.weights.iter().zip(values).enumerate() {
            if !v.is_finite() {
                return Err(Error::Integrand { index, value: *v });
            }
            let term = w * v;
            let t = total + term;
            carry += if total.abs() >= term.abs() {
                (total - t) + term
            } else {
                (term - t) + total
            };
            total = t;
        }
        Ok(total + carry)
    }

    /// Standard error of a Monte Carlo estimate; `None` for deterministic rules.
    pub fn standard_error(&self, values: &[f64]) -> Option<f64> {
        if !matches!(self.key.kind, RuleKind::MonteCarlo { .. }) || values.len() < 2 {
            return None;
        }
        let m = values.len() as f64;
        let mean = values.iter().sum::<f64>() / m;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
        Some(surface_area(self.key.dim) * (var / m).sqrt())
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1], ascending.
fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 1..=m {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j - 1) as f64 * z * p2 - (j - 1) as f64 * p3) / j as f64;
            }
            dp = m as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[m - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[m - 1 - i] = wi;
    }
    (x, w)
}
