//! Primal-dual coordinate solvers for bilinearly coupled saddle-point problems
//!
//! This crate implements randomized primal-dual coordinate methods with
//! extrapolation for problems of the form
//!
//! ```text
//!     min_x max_y  g(x) + <Ax, y> - h*(y)
//! ```
//!
//! with separable `g` and `h*`, alongside a deterministic PDHG baseline,
//! step-size schedules for six parameter regimes, optimality metrics
//! (restricted gap, suboptimality, feasibility, distance to solution),
//! and independent oracles for ground-truth verification.
//!
//! Crate layout:
//! - [`sparse`] — CSR storage and the row-local kernels the sparse solver needs
//! - [`prox`] — scalar/separable proximal operators with convexity metadata
//! - [`problems`] — saddle-problem assembly and synthetic instance generators
//! - [`schedules`] — per-iteration step-size parameters for each regime
//! - [`solvers`] — the iteration engines and output/averaging rules
//! - [`metrics`] — optimality measures and rate fitting
//! - [`oracle`] — exact small-instance solvers and enumeration checks
//! - [`harness`] — experiment configs, multi-seed aggregation, persistence

pub mod error;
pub mod harness;
pub mod metrics;
pub mod oracle;
pub mod problems;
pub mod prox;
pub mod schedules;
pub mod solvers;
pub mod sparse;

pub use error::Error;
pub use metrics::MetricsRecord;
pub use problems::{CompactSet, SaddleProblem};
pub use prox::{ScalarConvexFn, SeparableFunction};
pub use schedules::{Regime, StepSchedule};
pub use solvers::{IterateState, Method, OutputRule, RunConfig, Trace};
pub use sparse::{DualCache, SparseMatrix};
