//! Simulation and verification toolkit for weakly dependent stationary
//! sequences observed along the path of a transient random walk on ℤ.
//!
//! The crate is organised bottom-up:
//!
//! * [`process`] generates stationary windows of the catalog models and
//!   exposes their analytic covariances.
//! * [`walk`] samples walk paths, local times, self-intersection local times
//!   and Green functions.
//! * [`dependence`] evaluates θ₂ dependence bounds and the summability
//!   condition on them.
//! * [`variance`] computes asymptotic and quenched variances of sampled sums.
//! * [`harness`] runs Monte Carlo central limit experiments with normality
//!   diagnostics.
//! * [`estimation`] covers mean estimation from randomly sampled series and
//!   optimal sampling designs.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dependence;
pub mod error;
pub mod estimation;
pub mod harness;
pub mod process;
pub mod seed;
pub mod variance;
pub mod walk;

pub use error::{Error, Result};
