//! Experiment harness for the online constrained convex optimization
//! solver: declarative configs, trace persistence, envelope verification,
//! Monte Carlo ensembles, and accuracy sweeps.

// Validation uses `!(x > 0.0)` so NaN inputs fail the checks too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod mc;
pub mod report;
pub mod run;
pub mod sweep;
pub mod trace;
pub mod verify;
