//! Variable screening for binary responses with a linear-programming Dantzig selector.
//!
//! The logistic mean is linearized at the intercept-only fit, which turns the
//! l1-minimal score-constrained estimator into a linear program in the
//! tuning parameter `delta`. Sweeping `delta` over `[0, delta0]` gives a
//! coefficient profile; the order in which variables shrink to zero ranks
//! them, and cross-validated AUC under a cap on the selected-set size picks
//! the working `delta`.
//!
//! Modules, bottom up:
//!
//! - [`types`]: datasets, models, the logistic link and standardization
//! - [`lp`]: dense revised simplex with warm starts
//! - [`dantzig`]: LP assembly, the exact score residual and SLP refinement
//! - [`path`]: `delta` grids, coefficient paths, shrink positions and ranks
//! - [`selection`]: stratified folds, AUC, cross-validation, logistic refit
//! - [`diagnostics`]: remainder-ratio checks and a brute-force oracle
//! - [`pipeline`]: CSV ingest, synthetic data and the on-disk run
//!
//! See `examples/` for one runnable program per capability.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dantzig;
pub mod diagnostics;
pub mod error;
pub mod lp;
pub mod path;
pub mod pipeline;
pub mod selection;
pub mod svg;
pub mod types;

pub use error::{Result, ScreenError};
pub use types::{logistic, logit, standardize, ColumnTransform, Dataset, ScreeningModel, ZERO_TOL};

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 20240101;
