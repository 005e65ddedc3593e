//! Bracketed bisection for strictly decreasing maps.

use crate::{Error, Result};

/// Controls the bracket search and bisection used by every implicit solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketConfig {
    /// Bisection stops once `hi - lo <= rel_tol * hi`.
    pub rel_tol: f64,
    /// Doublings (or halvings) allowed while looking for a sign change.
    pub max_bracket_steps: u32,
}

impl Default for BracketConfig {
    fn default() -> Self {
        BracketConfig {
            rel_tol: 1e-12,
            max_bracket_steps: 128,
        }
    }
}

impl BracketConfig {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        BracketConfig {
            rel_tol,
            ..Self::default()
        }
    }
}

/// Position of a decreasing map relative to its target level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Side {
    /// Above the target, or the argument left φ's domain: x is too small.
    Above,
    /// At or below the target.
    Below,
}

/// Locates `inf { x > 0 : g(x) <= target }` for a decreasing `g`, given as a
/// probe that classifies each trial point.
pub(crate) fn solve_decreasing<F>(x0: f64, cfg: &BracketConfig, mut probe: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<Side>,
{
    if !(x0.is_finite() && x0 > 0.0) {
        return Err(Error::Solver(format!("invalid starting point {x0}")));
    }
    let (mut lo, mut hi);
    match probe(x0)? {
        Side::Above => {
            lo = x0;
            hi = x0;
            let mut steps = 0;
            loop {
                hi *= 2.0;
                steps += 1;
                if steps > cfg.max_bracket_steps || !hi.is_finite() {
                    return Err(Error::Solver(format!(
                        "bracket growth exceeded {} doublings from {x0}",
                        cfg.max_bracket_steps
                    )));
                }
                match probe(hi)? {
                    Side::Above => lo = hi,
                    Side::Below => break,
                }
            }
        }
        Side::Below => {
            hi = x0;
            lo = x0;
            let mut steps = 0;
            loop {
                lo *= 0.5;
                steps += 1;
                if steps > cfg.max_bracket_steps || lo == 0.0 {
                    return Err(Error::Solver(format!(
                        "bracket shrink exceeded {} halvings from {x0}",
                        cfg.max_bracket_steps
                    )));
                }
                match probe(lo)? {
                    Side::Below => hi = lo,
                    Side::Above => break,
                }
            }
        }
    }
    while hi - lo > cfg.rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match probe(mid)? {
            Side::Above => lo = mid,
            Side::Below => hi = mid,
        }
    }
    Ok(0.5 * (lo + hi))
}
