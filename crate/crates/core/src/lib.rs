//! Exact Eriksen and exponential Foldy–Wouthuysen operators for
//! finite-dimensional Hamiltonians of arbitrary spin, in stationary fields
//! and in time-periodic fields represented on a truncated Floquet space.
//!
//! Natural units ℏ = c = 1 throughout.

pub mod blockop;
pub mod dump;
pub mod eriksen;
pub mod error;
pub mod expgen;
pub mod floquet;
pub mod matfun;
pub mod models;
pub mod pipeline;
pub mod tolerance;

pub use blockop::{BetaMatrix, BlockOperator, Layout, Metric, SplitHamiltonian};
pub use error::{FwError, Result};
pub use eriksen::FwResult;
pub use expgen::GeneratorResult;
pub use floquet::{ExtendedOperator, FloquetReport};
pub use models::{Model, ModelKind, ModelSpec};
pub use tolerance::Tolerances;

pub use faer::c64;
