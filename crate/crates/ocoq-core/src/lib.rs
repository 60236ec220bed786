//! Online convex optimization with time-varying inequality constraints.
//!
//! A controller picks a point `X_t` from a compact convex set every slot,
//! before that slot's objective `f_t` and constraints `g_{t,i}` are revealed.
//! The solver in this crate tracks one nonnegative virtual queue per
//! constraint and greedily minimizes a drift-plus-penalty expression each
//! slot, which reduces to a single Euclidean projection. Companion modules
//! supply the scenario generators the solver is exercised on, hindsight
//! oracles to compare against, and the closed-form performance envelopes
//! that the experiment harness verifies traces against.
//!
//! The crate is `no_std`-compatible (enable the `libm` feature and disable
//! `std`); everything here is pure computation over heap-allocated vectors.

#![cfg_attr(not(feature = "std"), no_std)]
// Validation uses `!(x > 0.0)` so NaN inputs fail the checks too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(not(any(feature = "std", feature = "libm")))]
compile_error!("ocoq-core requires either the `std` or the `libm` feature");

pub mod bounds;
pub mod geometry;
pub mod linalg;
pub mod oracle;
pub mod rng;
pub mod solver;
pub mod streams;

mod fp;

use alloc::string::String;
use core::fmt;

/// Errors shared across the solver, geometry, and scenario modules.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A vector argument does not match the ambient dimension.
    DimensionMismatch { expected: usize, found: usize },
    /// A constructor or operation argument is out of its valid range.
    InvalidInput(String),
    /// A slot index at or beyond the scenario horizon was requested.
    SlotOutOfRange { slot: u64, horizon: u64 },
    /// A slot was fed to the solver out of order.
    SlotSequence { expected: u64, found: u64 },
    /// The operation needs history that the state does not hold yet
    /// (e.g. a decision step before the first slot was observed).
    NoHistory,
    /// The iterative projection failed to reach its residual tolerance.
    ProjectionStalled { residual: f64, iterations: u32 },
    /// A bound or envelope needs a constant that was not supplied.
    MissingConstant(&'static str),
    /// No feasible point was found at the requested tolerance.
    Infeasible { residual: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::SlotOutOfRange { slot, horizon } => {
                write!(f, "slot {slot} is outside the horizon {horizon}")
            }
            Error::SlotSequence { expected, found } => {
                write!(f, "expected slot {expected}, got slot {found}")
            }
            Error::NoHistory => write!(f, "no previous slot data: advance past slot 0 first"),
            Error::ProjectionStalled {
                residual,
                iterations,
            } => write!(
                f,
                "projection did not converge after {iterations} iterations (residual {residual:e})"
            ),
            Error::MissingConstant(name) => write!(f, "missing constant: {name}"),
            Error::Infeasible { residual } => {
                write!(f, "no feasible point found (best residual {residual:e})")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
