//! Numerical toolkit for special Hermite expansions, twisted Laplacians and
//! spectral restriction operators on step-two nilpotent Lie groups.

pub mod bounds;
pub mod calculus;
pub mod error;
pub mod field;
pub mod gaussian;
pub mod group;
pub mod kv;
pub mod mixnorm;
pub mod normest;
pub mod product;
pub mod quad;
pub mod specfun;
pub mod twisted;

pub use error::{Error, Result};
pub use field::{GridSpec, SampledField};
pub use product::{CentralAxis, ProductField};
