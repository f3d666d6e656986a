//! Least angle regression with Cp-based model selection, per-case Cp
//! allocation diagnostics, sliced-inverse-regression dimension checks, and
//! selection stress experiments.
//!
//! The pieces fit together like this: [`ingest`] loads and transforms named
//! datasets, [`lars`] walks the equiangular path and selects by Cp,
//! [`diagnostics`] decomposes each step's Cp into per-case terms and
//! validates the covariance plug-in by simulation, [`dimension`] checks that
//! a single linear index is enough before any of that is trusted, and
//! [`stress`] reruns selection under rounded copies, reparameterized
//! expansions, and marginal shifts.

pub mod diagnostics;
pub mod dimension;
pub mod error;
pub mod ingest;
pub mod lars;
pub mod numerics;
pub mod stress;

pub use error::{Error, Result};
