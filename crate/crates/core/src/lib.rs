//! Numerical dual Brunn-Minkowski theory for star bodies.
//!
//! The crate builds star bodies from their radial functions, forms Orlicz
//! harmonic Blaschke sums by solving the implicit pointwise equation
//!
//! ```text
//! φ(k₁ρ(K₁,u)ⁿ/(kλ), …, k_mρ(K_m,u)ⁿ/(kλ)) = 1,    λ = ρ(sum,u)ⁿ
//! ```
//!
//! and evaluates dual mixed volume functionals by quadrature on the sphere.
//! The [`verify`] module turns the inequalities of the theory into checks
//! with oriented margins.
//!
//! Module map:
//!
//! * [`phi`]: Orlicz functions of one and several variables.
//! * [`starbody`]: radial functions, linear images, sphere quadrature.
//! * [`additions`]: Orlicz and classical additions of star bodies.
//! * [`functionals`]: volumes, dual mixed volumes, cone measure, projection norm.
//! * [`verify`]: inequality, structure and variational-limit reports.
//! * [`exec`]: sequential / rayon execution switch.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod additions;
pub mod error;
pub mod exec;
pub mod functionals;
pub mod phi;
mod roots;
pub mod starbody;
pub mod verify;

pub use error::{Error, Result};
pub use roots::BracketConfig;
