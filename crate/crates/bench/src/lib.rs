//! Shared fixtures for the criterion benchmarks.

use purecd::problems::{gen_constrained_qp, gen_lasso, SaddleProblem};
use purecd::schedules::StepSchedule;

/// A dense constrained QP with its importance-sampling schedule.
pub fn dense_fixture() -> (SaddleProblem, StepSchedule) {
    let p = gen_constrained_qp(50, 100, 0, 1.0).expect("generator");
    let s = StepSchedule::dense_importance(&p.a, 0.99).expect("schedule");
    (p, s)
}

/// A sparse Lasso instance with its strongly-concave-side schedule.
pub fn sparse_fixture() -> (SaddleProblem, StepSchedule) {
    let p = gen_lasso(200, 400, 0, 0.1, 0.05).expect("generator");
    let s = StepSchedule::csc(&p.a, 1.0).expect("schedule");
    (p, s)
}
