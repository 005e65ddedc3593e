//! Seeded random star bodies for property checks.
//!
//! Each (case, instance) pair owns a ChaCha stream, so suites produce the
//! same bodies regardless of how work is scheduled.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::additions::{Constants, SumSpec};
use crate::functionals::radial_power_ratios;
use crate::phi::{OrliczFunction1, OrliczFunctionM};
use crate::starbody::{SphereRule, StarBody};
use crate::Result;

use super::CaseId;

/// Largest condition number of the matrices used inside random bodies.
const BODY_CONDITION: f64 = 4.0;

/// Harmonics in random trigonometric bodies.
const MAX_HARMONIC: usize = 4;

pub struct BodyGenerator {
    rng: ChaCha8Rng,
    dim: usize,
}

impl BodyGenerator {
    pub fn new(dim: usize, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        BodyGenerator { rng, dim }
    }

    /// Stream `case_index * 1_000_003 + instance`.
    pub fn for_case(dim: usize, seed: u64, case: CaseId, instance: usize) -> Self {
        Self::new(dim, seed, case.index() * 1_000_003 + instance as u64)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    /// A positive constant in [0.5, 2).
    pub fn constant(&mut self) -> f64 {
        self.uniform(0.5, 2.0)
    }

    pub fn ball(&mut self) -> Result<StarBody> {
        let r = self.uniform(0.6, 1.6);
        StarBody::ball(self.dim, r)
    }

    pub fn lp_ball(&mut self) -> Result<StarBody> {
        let p = self.uniform(0.8, 4.0);
        let scale = self.uniform(0.7, 1.5);
        StarBody::lp_ball(self.dim, p, scale)
    }

    /// A planar trigonometric body with Σ|c| <= 0.6·a0 and |c| <= 0.3·a0;
    /// falls back to an l_p ball outside the plane.
    pub fn trig_poly(&mut self) -> Result<StarBody> {
        if self.dim != 2 {
            return self.lp_ball();
        }
        let a0 = self.uniform(0.8, 1.4);
        let harmonics = 1 + self.index(MAX_HARMONIC);
        let mut cos: Vec<f64> = (0..harmonics)
            .map(|_| self.uniform(-0.3, 0.3) * a0)
            .collect();
        let mut sin: Vec<f64> = (0..harmonics)
            .map(|_| self.uniform(-0.3, 0.3) * a0)
            .collect();
        let total: f64 = cos.iter().chain(&sin).map(|c| c.abs()).sum();
        if total > 0.6 * a0 {
            let shrink = 0.6 * a0 / total;
            cos.iter_mut()
                .chain(sin.iter_mut())
                .for_each(|c| *c *= shrink);
        }
        StarBody::radial_trig_poly(a0, cos, sin)
    }

    fn orthogonal(&mut self) -> DMatrix<f64> {
        let n = self.dim;
        let g = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut self.rng));
        g.qr().q()
    }

    /// Q₁·diag(s)·Q₂ with s_max in [0.8, 1.5) and s_max/s_min <= `max_condition`.
    pub fn matrix(&mut self, max_condition: f64) -> DMatrix<f64> {
        let n = self.dim;
        let s_max = self.uniform(0.8, 1.5);
        let cond = self.uniform(1.0, max_condition.max(1.0 + 1e-9));
        let mut s: Vec<f64> = (0..n)
            .map(|i| match i {
                0 => s_max,
                _ if i == n - 1 => s_max / cond,
                _ => s_max / self.uniform(1.0, cond),
            })
            .collect();
        s.sort_by(|a, b| b.total_cmp(a));
        let q1 = self.orthogonal();
        let q2 = self.orthogonal();
        q1 * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(s)) * q2
    }

    pub fn linear_image(&mut self) -> Result<StarBody> {
        let child = match self.index(3) {
            0 => self.ball()?,
            1 => self.lp_ball()?,
            _ => self.trig_poly()?,
        };
        let m = self.matrix(BODY_CONDITION);
        child.linear_image(m)
    }

    /// Any of the four families, uniformly.
    pub fn body(&mut self) -> Result<StarBody> {
        match self.index(4) {
            0 => self.ball(),
            1 => self.lp_ball(),
            2 => self.trig_poly(),
            _ => self.linear_image(),
        }
    }

    /// Bodies with smooth radial functions.
    pub fn smooth_body(&mut self) -> Result<StarBody> {
        match self.index(3) {
            0 => self.ball(),
            1 => self.trig_poly(),
            _ => {
                let child = self.trig_poly()?;
                let m = self.matrix(BODY_CONDITION);
                child.linear_image(m)
            }
        }
    }

    /// A random pair, or (K, cK) when `dilate` is set.
    pub fn pair(&mut self, dilate: bool) -> Result<(StarBody, StarBody)> {
        let k = self.body()?;
        let l = if dilate {
            let c = self.uniform(0.5, 1.5);
            k.dilate(c)?
        } else {
            self.body()?
        };
        Ok((k, l))
    }

    /// Rescales `l` so that max k₂ρ_Lⁿ/(k₁ρ_Kⁿ) over the nodes equals `fill`.
    pub fn fit_inside(
        &mut self,
        k: &StarBody,
        l: &StarBody,
        k1: f64,
        k2: f64,
        fill: f64,
        rule: &SphereRule,
    ) -> Result<StarBody> {
        let max = radial_power_ratios(k, l, k1, k2, rule)?
            .into_iter()
            .fold(0.0, f64::max);
        l.dilate((fill / max).powf(1.0 / self.dim as f64))
    }

    /// A class member: a power t^q with q in [1, 3) or the normalized neglog.
    pub fn phi(&mut self) -> Result<OrliczFunction1> {
        if self.index(4) == 0 {
            Ok(OrliczFunction1::neglog())
        } else {
            let q = self.uniform(1.0, 3.0);
            OrliczFunction1::power(q)
        }
    }

    pub fn power_phi(&mut self) -> Result<OrliczFunction1> {
        let q = self.uniform(1.0, 3.0);
        OrliczFunction1::power(q)
    }

    /// φ₁(x₁) + … + φ_m(x_m) with random class members.
    pub fn phi_sum(&mut self, arity: usize) -> Result<OrliczFunctionM> {
        let terms = (0..arity)
            .map(|_| Ok((self.phi()?, 1.0)))
            .collect::<Result<Vec<_>>>()?;
        OrliczFunctionM::sum(terms)
    }

    pub fn constants(&mut self, m: usize) -> Constants {
        Constants {
            k: self.constant(),
            ks: (0..m).map(|_| self.constant()).collect(),
        }
    }

    /// An Orlicz sum of two random bodies with random φ and constants.
    pub fn sum_spec(&mut self) -> Result<SumSpec> {
        let (k, l) = self.pair(false)?;
        let phi = self.phi_sum(2)?;
        let c = self.constants(2);
        SumSpec::new(vec![k, l], phi, c.k, c.ks)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::starbody::condition_number;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let rule = SphereRule::new(2, 64).unwrap();
        let sample = |seed, stream| {
            let mut g = BodyGenerator::new(2, seed, stream);
            let b = g.body().unwrap();
            b.samples(&rule).unwrap().to_vec()
        };
        assert_eq!(sample(7, 3), sample(7, 3));
        assert_ne!(sample(7, 3), sample(7, 4));
        assert_ne!(sample(7, 3), sample(8, 3));
    }

    #[test]
    fn matrices_respect_condition_bound() {
        for dim in [2, 3] {
            let mut g = BodyGenerator::new(dim, 1, 0);
            for _ in 0..50 {
                let m = g.matrix(10.0);
                let c = condition_number(&m);
                assert!((1.0 - 1e-9..=10.0 + 1e-9).contains(&c), "{c}");
            }
        }
    }

    #[test]
    fn bodies_are_valid_and_moderate() {
        let rule = SphereRule::new(2, 256).unwrap();
        let mut g = BodyGenerator::new(2, 11, 0);
        for _ in 0..200 {
            let b = g.body().unwrap();
            let s = b.samples(&rule).unwrap();
            assert!(s.iter().all(|r| *r > 0.1 && *r < 10.0), "{}", b.kind_name());
        }
    }

    #[test]
    fn fit_inside_hits_the_fill_level() {
        let rule = SphereRule::new(2, 256).unwrap();
        let mut g = BodyGenerator::new(2, 5, 0);
        let (k, l) = g.pair(false).unwrap();
        let inner = g.fit_inside(&k, &l, 1.5, 0.7, 0.9, &rule).unwrap();
        let max = radial_power_ratios(&k, &inner, 1.5, 0.7, &rule)
            .unwrap()
            .into_iter()
            .fold(0.0, f64::max);
        assert!((max - 0.9).abs() < 1e-12);
    }
}
