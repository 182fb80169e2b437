//! Expected distortion of two-candidate majority elections in finite metric
//! spaces, with both candidates drawn i.i.d. from a candidate distribution.
//!
//! The crate is `no_std` (it needs `alloc`). It covers:
//!
//! - [`metric`]: finite metrics, distributions, instances and their validation;
//! - [`election`]: social costs, majority winners, pairwise and expected distortion;
//! - [`line`]: median structure on the line and the support reduction to three points;
//! - [`bounds`]: the cost cap, the `CSoc` functional and the near-extremal-pair diagnostics;
//! - [`generators`]: the named worst-case families and seeded random instances;
//! - [`search`]: simulated annealing and grid search for high-distortion instances.
//!
//! File formats, parallel drivers and the command-line interface live in the
//! companion `distortion-lab` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bounds;
pub mod election;
mod error;
pub mod generators;
pub mod line;
pub mod metric;
pub mod search;
pub mod sum;

pub use error::{Error, Result};
pub use metric::{Distribution, FiniteMetric, Instance, LineInstance};

/// Worst-case expected distortion on the line with `p = q`: `4 - 2√2`.
pub const LINE_WORST_CASE: f64 = 4.0 - 2.0 * core::f64::consts::SQRT_2;

/// Upper bound on the expected distortion in general metrics with `p = q`: `2 - 1/652`.
pub const METRIC_UPPER_BOUND: f64 = 2.0 - 1.0 / 652.0;

/// Conjectured worst-case expected distortion in general metrics with `p = q`.
pub const METRIC_CONJECTURE: f64 = 1.5;

/// Tight upper bound on the expected distortion when `p` and `q` may differ.
pub const DIFFERENT_DISTRIBUTIONS_BOUND: f64 = 2.0;
