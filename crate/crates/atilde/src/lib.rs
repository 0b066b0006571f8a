//! Exact combinatorics of triangle-presentation groups and the boundaries
//! of their affine buildings.
//!
//! A triangle presentation over a finite projective geometry Π of order q
//! determines a group whose Cayley graph is the 1-skeleton of an
//! n-dimensional affine building. This crate constructs these objects at
//! desk scale and computes, in exact arithmetic throughout:
//!
//! - the projective geometry Π = PG(n, q), its dualities and incidence
//!   counts ([`pgeom`]);
//! - triangle presentations: validation of the five compatibility axioms,
//!   backtracking search, file round-trips ([`tripres`]);
//! - normal-form words, Cayley balls, spheres `S_k`, vertex types and
//!   distances ([`wordcore`]);
//! - closed-form counts: Gaussian q-analogs, the sphere-size formula, the
//!   sector-triangle census ([`counting`]);
//! - boundary cylinder sets, their measures, displacement vectors and
//!   Radon–Nikodym derivatives ([`boundary`]);
//! - ratio-set descriptors, the type III_λ classification certificate, and
//!   constructive full-group automorphisms between cylinders ([`dynamics`]).
//!
//! No floating point appears anywhere: measures are exact rationals and
//! every count is an exact integer.

pub mod boundary;
pub mod counting;
pub mod dynamics;
mod error;
pub mod pgeom;
pub mod tripres;
pub mod wordcore;

pub use error::{Error, Result};
