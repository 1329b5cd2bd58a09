//! Expert-guided multi-task learning.
//!
//! The crate is split along the processing pipeline:
//!
//! * [`annotations`]: time-continuous rating traces, quality control,
//!   resampling, median fusion and concordance statistics.
//! * [`design`]: assembly of the stacked crowd/expert problem (feature and
//!   indicator matrices, reliability weights, task-graph incidence).
//! * [`solvers`]: proximal operators, the accelerated proximal-gradient
//!   engine and the model zoo (EG-MTL plus single-task and MTL baselines).
//! * [`experiments`]: synthetic data, snippet and cross-validation
//!   protocols, metrics and result tables.
//!
//! Data-parallel loops (independent fits over grids, folds and runs) go
//! through [`par`], which uses rayon when the `parallel` feature is on and
//! falls back to plain iteration otherwise.

pub mod annotations;
pub mod design;
mod error;
pub mod experiments;
pub mod par;
pub mod rng;
pub mod solvers;

pub use error::{Error, Result};
