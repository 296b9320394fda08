//! Measure constructions.

pub mod basic;
pub mod clark;
pub mod nomoc;
pub mod nosupp;
pub mod riesz;
