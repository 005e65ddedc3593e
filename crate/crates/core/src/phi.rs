//! Orlicz functions.
//!
//! [`OrliczFunction1`] covers the one-variable class (convex, strictly
//! increasing, φ(0)=0, φ(1)=1) together with the weaker "convex with φ(0)=0
//! on [0,a)" functions accepted by the Jensen bound. [`OrliczFunctionM`]
//! covers the m-variable functions, which in practice are weighted sums
//! Σ ε_j φ_j(x_j).

use std::f64::consts::LN_2;
use std::fmt;
use std::sync::Arc;

use crate::{Error, Result};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Points used to spot-check user supplied functions.
const CHECK_POINTS: usize = 64;

#[derive(Clone)]
pub enum PhiFamily {
    /// t^q, q >= 1.
    Power {
        q: f64,
    },
    /// -log(1-t), divided by log 2 when normalized so that φ(1/2) = 1.
    NegLog {
        normalized: bool,
    },
    Custom {
        name: String,
        eval: ScalarFn,
    },
}

impl fmt::Debug for PhiFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhiFamily::Power { q } => write!(f, "Power {{ q: {q} }}"),
            PhiFamily::NegLog { normalized } => write!(f, "NegLog {{ normalized: {normalized} }}"),
            PhiFamily::Custom { name, .. } => write!(f, "Custom {{ name: {name:?} }}"),
        }
    }
}

/// A convex increasing function on `[0, a)` vanishing at zero.
#[derive(Clone, Debug)]
pub struct OrliczFunction1 {
    family: PhiFamily,
    domain_bound: f64,
    class_member: bool,
}

impl OrliczFunction1 {
    pub fn power(q: f64) -> Result<Self> {
        if !(q.is_finite() && q >= 1.0) {
            return Err(Error::InvalidPhi(format!(
                "power exponent must be >= 1, got {q}"
            )));
        }
        Ok(OrliczFunction1 {
            family: PhiFamily::Power { q },
            domain_bound: f64::INFINITY,
            class_member: true,
        })
    }

    /// `-log(1-t)/log 2` on `[0,1)`, scaled so that φ(1/2) = 1.
    pub fn neglog() -> Self {
        OrliczFunction1 {
            family: PhiFamily::NegLog { normalized: true },
            domain_bound: 1.0,
            class_member: true,
        }
    }

    /// `-log(1-t)` on `[0,1)`; convex with φ(0)=0 but not normalized.
    pub fn neglog_unnormalized() -> Self {
        OrliczFunction1 {
            family: PhiFamily::NegLog { normalized: false },
            domain_bound: 1.0,
            class_member: false,
        }
    }

    /// Wraps a callback defined on `[0, domain_bound)`.
    ///
    /// The callback is spot-checked on a 64 point grid for φ(0)=0, strict
    /// monotonicity and convexity. It counts as a class member when in
    /// addition φ(1)=1 (which needs `domain_bound > 1`).
    pub fn custom<F>(name: impl Into<String>, domain_bound: f64, eval: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(domain_bound > 0.0) {
            return Err(Error::InvalidPhi(format!(
                "domain bound must be positive, got {domain_bound}"
            )));
        }
        let eval: ScalarFn = Arc::new(eval);
        let at0 = eval(0.0);
        if !(at0.abs() <= 1e-14) {
            return Err(Error::InvalidPhi(format!("φ(0) = {at0}, expected 0")));
        }
        let span = if domain_bound.is_finite() {
            domain_bound * (1.0 - 1e-6)
        } else {
            4.0
        };
        let grid: Vec<f64> = (0..CHECK_POINTS)
            .map(|i| span * i as f64 / (CHECK_POINTS - 1) as f64)
            .collect();
        let values: Vec<f64> = grid.iter().map(|&t| eval(t)).collect();
        if let Some(i) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidPhi(format!(
                "φ({}) = {} is not a finite non-negative number",
                grid[i], values[i]
            )));
        }
        for i in 1..CHECK_POINTS {
            if values[i] <= values[i - 1] {
                return Err(Error::InvalidPhi(format!(
                    "not strictly increasing between {} and {}",
                    grid[i - 1],
                    grid[i]
                )));
            }
        }
        for i in 1..CHECK_POINTS - 1 {
            // uniform grid: midpoint convexity on neighbouring points
            let slack = 1e-12 * values[i + 1].abs().max(1.0);
            if values[i] > 0.5 * (values[i - 1] + values[i + 1]) + slack {
                return Err(Error::InvalidPhi(format!("not convex near {}", grid[i])));
            }
        }
        let class_member = domain_bound > 1.0 && (eval(1.0) - 1.0).abs() <= 1e-14;
        Ok(OrliczFunction1 {
            family: PhiFamily::Custom {
                name: name.into(),
                eval,
            },
            domain_bound,
            class_member,
        })
    }

    pub fn family(&self) -> &PhiFamily {
        &self.family
    }

    pub fn domain_bound(&self) -> f64 {
        self.domain_bound
    }

    /// Whether φ belongs to the normalized class (φ(1)=1 or the normalized
    /// log), as opposed to only being convex with φ(0)=0.
    pub fn is_class_member(&self) -> bool {
        self.class_member
    }

    /// Exponent when φ(t) = t^q.
    pub fn power_exponent(&self) -> Option<f64> {
        match self.family {
            PhiFamily::Power { q } => Some(q),
            _ => None,
        }
    }

    /// φ(t) for `0 <= t < a`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0 && t < self.domain_bound) {
            return Err(Error::Domain {
                value: t,
                bound: self.domain_bound,
            });
        }
        Ok(self.eval_unchecked(t))
    }

    fn eval_unchecked(&self, t: f64) -> f64 {
        match &self.family {
            PhiFamily::Power { q } => {
                if *q == 1.0 {
                    t
                } else if *q == 2.0 {
                    t * t
                } else {
                    t.powf(*q)
                }
            }
            PhiFamily::NegLog { normalized } => {
                let v = -(-t).ln_1p();
                if *normalized {
                    v / LN_2
                } else {
                    v
                }
            }
            PhiFamily::Custom { eval, .. } => eval(t),
        }
    }

    /// Solves φ(t) = y by bisection on `[0, a)`.
    pub fn invert(&self, y: f64) -> Result<f64> {
        if !(y >= 0.0) || !y.is_finite() {
            return Err(Error::Range { value: y });
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        let a = self.domain_bound;
        let mut lo = 0.0;
        let mut hi = if a.is_finite() { a } else { 1.0 };
        if !a.is_finite() {
            let mut steps = 0;
            while self.eval_unchecked(hi) < y {
                lo = hi;
                hi *= 2.0;
                steps += 1;
                if steps > 1100 || !hi.is_finite() {
                    return Err(Error::Range { value: y });
                }
            }
        }
        // hi is either in the domain with φ(hi) >= y or equal to the open
        // bound a, which is never evaluated.
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let v = self.eval_unchecked(mid);
            if v < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let candidates = [lo, hi];
        let best = candidates
            .iter()
            .copied()
            .filter(|&t| t < a)
            .min_by(|s, t| {
                let ds = (self.eval_unchecked(*s) - y).abs();
                let dt = (self.eval_unchecked(*t) - y).abs();
                ds.total_cmp(&dt)
            })
            .unwrap_or(lo);
        let residual = (self.eval_unchecked(best) - y).abs();
        // Near the bound the inverse is as good as floating point allows;
        // anything worse than a relative 1e-6 means y is out of reach.
        if residual > 1e-6 * y.max(1.0) {
            return Err(Error::Range { value: y });
        }
        Ok(best)
    }

    /// Left derivative (φ)'_l(t) for `0 < t < a`.
    pub fn left_derivative(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t < self.domain_bound) {
            return Err(Error::Domain {
                value: t,
                bound: self.domain_bound,
            });
        }
        Ok(match &self.family {
            PhiFamily::Power { q } => q * t.powf(q - 1.0),
            PhiFamily::NegLog { normalized } => {
                let d = 1.0 / (1.0 - t);
                if *normalized {
                    d / LN_2
                } else {
                    d
                }
            }
            PhiFamily::Custom { eval, .. } => {
                // second order backward difference, stays left of t
                let mut h = 1e-6 * t.max(1.0);
                if 2.0 * h > t {
                    h = 0.5 * t;
                }
                (3.0 * eval(t) - 4.0 * eval(t - h) + eval(t - 2.0 * h)) / (2.0 * h)
            }
        })
    }
}

/// An m-variable Orlicz function.
#[derive(Clone)]
pub struct OrliczFunctionM {
    terms: Vec<(OrliczFunction1, f64)>,
    arity: usize,
    custom: Option<VectorFn>,
}

impl fmt::Debug for OrliczFunctionM {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OrliczFunctionM")
            .field("terms", &self.terms)
            .field("arity", &self.arity)
            .field("custom", &self.custom.is_some())
            .finish()
    }
}

impl OrliczFunctionM {
    /// Σ_j ε_j φ_j(x_j).
    pub fn sum(terms: Vec<(OrliczFunction1, f64)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidPhi("sum needs at least one term".into()));
        }
        if let Some((_, w)) = terms.iter().find(|(_, w)| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidPhi(format!(
                "weights must be finite and >= 0, got {w}"
            )));
        }
        if !terms.iter().any(|(_, w)| *w > 0.0) {
            return Err(Error::InvalidPhi(
                "at least one weight must be positive".into(),
            ));
        }
        let arity = terms.len();
        Ok(OrliczFunctionM {
            terms,
            arity,
            custom: None,
        })
    }

    /// Σ_j x_j^q with unit weights.
    pub fn power_sum(q: f64, arity: usize) -> Result<Self> {
        let phi = OrliczFunction1::power(q)?;
        Self::sum(vec![(phi, 1.0); arity])
    }

    /// A general member given by its evaluator on `[0,∞)^arity`.
    ///
    /// Spot-checks φ(0)=0 and monotonicity along each axis.
    pub fn custom<F>(arity: usize, eval: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if arity == 0 {
            return Err(Error::InvalidPhi("arity must be positive".into()));
        }
        let at0 = eval(&vec![0.0; arity]);
        if !(at0.abs() <= 1e-14) {
            return Err(Error::InvalidPhi(format!("φ(0) = {at0}, expected 0")));
        }
        let mut x = vec![2.0; arity];
        for j in 0..arity {
            x[j] = 0.25;
            let mut prev = eval(&x);
            for step in 1..=8 {
                x[j] = 0.25 + 0.5 * step as f64;
                let v = eval(&x);
                if !(v > prev) {
                    return Err(Error::InvalidPhi(format!(
                        "not strictly increasing in coordinate {j}"
                    )));
                }
                prev = v;
            }
            x[j] = 2.0;
        }
        Ok(OrliczFunctionM {
            terms: Vec::new(),
            arity,
            custom: Some(Arc::new(eval)),
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// The (φ_j, ε_j) terms; empty for custom evaluators.
    pub fn terms(&self) -> &[(OrliczFunction1, f64)] {
        &self.terms
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.arity {
            return Err(Error::Dimension {
                expected: self.arity,
                found: x.len(),
            });
        }
        if let Some(f) = &self.custom {
            if let Some(index) = x.iter().position(|v| !(*v >= 0.0)) {
                return Err(Error::CoordinateDomain {
                    index,
                    value: x[index],
                    bound: f64::INFINITY,
                });
            }
            return Ok(f(x));
        }
        let mut total = 0.0;
        for (index, ((phi, w), &xj)) in self.terms.iter().zip(x).enumerate() {
            if *w == 0.0 {
                continue;
            }
            let v = phi.eval(xj).map_err(|_| Error::CoordinateDomain {
                index,
                value: xj,
                bound: phi.domain_bound(),
            })?;
            total += w * v;
        }
        Ok(total)
    }
}
