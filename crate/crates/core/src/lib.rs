//! Algebraic invariants of sub-Riemannian structures given by polynomial
//! generating families: growth vectors and homogeneous dimensions, flags
//! restricted to submanifolds, the determinant function controlling the
//! density of the regular-part Hausdorff volume, transverse order exponents,
//! and integrability / Radon verdicts, cross-checked by seeded quadrature
//! and reachable-set experiments.

pub mod algebra;
pub mod cli;
pub mod coords;
pub mod error;
pub mod flags;
pub mod linalg;
pub mod measure;
pub mod numerics;
pub mod sample;
pub mod strata;
pub mod verdict;

pub use error::{Error, Result};
