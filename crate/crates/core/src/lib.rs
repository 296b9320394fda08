//! Singular measures on the circle built from dyadic rules, their Poisson and Herglotz transforms,
//! singular inner functions, and numerical regularity tests (Zygmund-type conditions,
//! Beurling–Carleson sums, w-entropy, W¹ membership evidence).
//!
//! Measures are exact: every dyadic arc carries a rational mass. Transforms are evaluated in
//! floating point (`f32` or `f64`, see [`scalar::Scalar`]) with an attached error bound.

pub mod construct;
pub mod cli;
pub mod criteria;
pub mod dyadic;
pub mod error;
pub mod majorant;
pub mod quad;
pub mod rational;
pub mod scalar;
pub mod transform;

pub use error::{BlochError, Result};
pub use rational::Rational;

pub type DiscPoint64 = transform::DiscPoint<f64>;
pub type DiscPoint32 = transform::DiscPoint<f32>;
