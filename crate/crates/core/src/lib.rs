//! Projection-free online convex optimization.
//!
//! Online Frank-Wolfe with a fixed step, with line search and with multiple
//! updates per round, plus projected online gradient descent and a greedy
//! baseline. Traces are checked against per-round contraction inequalities
//! and the dynamic-regret bounds those inequalities imply.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod learners;
pub mod linalg;
pub mod metrics;
pub mod selftest;
pub mod sets;
pub mod streams;

pub use error::{Error, Result};
pub use learners::{run_learner, LearnerConfig, LearnerKind};
pub use metrics::{fill_minimizers, lemma_check, theorem_bound, trace_metrics, LemmaId, TheoremId};
pub use sets::FeasibleSet;
pub use streams::{make_stream, DriftSchedule, FamilySpec, LossSpec, LossStream, ScheduleKind};
