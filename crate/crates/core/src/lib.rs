//! Active state tracking of finite-state Markov chains under sensing costs.
//!
//! The crate covers the Kalman-like and exact Bayes belief recursions, the current-cost
//! forms of the tracking POMDP, grid-based dynamic programming, the sequential
//! Weiss–Weinstein bound used by the cost-efficient strategy, and Monte Carlo evaluation.

// `!(x > 0.0)` is used on purpose so NaN is rejected with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod cost;
pub mod dp;
pub mod error;
pub mod estimator;
pub mod linalg;
pub mod model;
pub mod output;
pub mod sim;
pub mod strategy;
pub mod wwlb;

pub use error::{Error, Result};
