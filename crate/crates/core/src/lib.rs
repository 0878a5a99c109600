//! Exactly computable Bayesian procedures for sparse and smooth sequence
//! models.
//!
//! The crate is organised by subsystem:
//!
//! - [`distributions`]: noise and slab densities, the convolved marginal
//!   `g = γ ∗ φ`, quadrature and Rényi/L¹ divergence utilities.
//! - [`sas`]: exact per-coordinate spike-and-slab posteriors and exact
//!   ℓ-values under subset-selection priors.
//! - [`eb`]: marginal maximum likelihood for the spike-and-slab weight and
//!   hierarchical dimension priors.
//! - [`testing`]: multiple-testing procedures, their losses, boundary
//!   functions, Monte Carlo risk estimation and the block-prior lower bound.
//! - [`conjugate`]: (tempered) conjugate posteriors for Gaussian series
//!   priors, functional posteriors and shift-and-rescale intervals.
//! - [`vb`]: mean-field spike-and-slab variational Bayes for sparse linear
//!   regression, with an exact enumeration oracle for small problems.
//! - [`experiment`]: configuration-driven experiment runner used by the CLI.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod conjugate;
pub mod distributions;
pub mod eb;
pub mod error;
pub mod experiment;
pub mod rng;
pub mod sas;
pub mod stats;
pub mod testing;
pub mod vb;

pub use error::{Error, Result};
