//! Root-based distinguishing attacks on Polynomial LWE.
//!
//! Layers, bottom up: prime and extension field arithmetic, the quotient
//! ring and its root structure, samplers, the attacks themselves, the
//! closed-form probability calculators, and a seeded campaign harness.

pub mod extension;
pub mod field;
pub mod ring;
pub mod sampling;
pub mod univariate;
pub mod sigma;
pub mod analysis;
pub mod attacks;
pub mod scan;
pub mod harness;
