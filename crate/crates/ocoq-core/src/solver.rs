//! The virtual-queue drift-plus-penalty solver, the fixed-step projected
//! subgradient baseline, and the frame-doubling wrapper.
//!
//! Per slot the solver keeps one nonnegative queue per constraint,
//! `Q_i(0) = Q_i(1) = 0`, updated at the end of slot `t ≥ 1` with the
//! previous slot's data:
//!
//! ```text
//! Q_i(t+1) = max[Q_i(t) + g_{t-1,i}(X_{t-1}) + g'_{t-1,i}(X_{t-1})·(X_t − X_{t-1}), 0]
//! ```
//!
//! and picks `X_t` as the minimizer over the set of
//!
//! ```text
//! [V f'_{t-1}(X_{t-1}) + Σ_i Q_i(t) g'_{t-1,i}(X_{t-1})]·x + α‖x − X_{t-1}‖²
//! ```
//!
//! The first-order condition `2α(x − X_{t-1}) + W_t = 0` makes the
//! unconstrained minimizer `X_{t-1} − W_t/(2α)`, so the constrained one is
//! its projection; the test suite pins this sign against an exhaustive grid
//! minimization of the expression.

use alloc::format;
use alloc::vec::Vec;

use crate::fp;
use crate::geometry::DecisionSet;
use crate::linalg::{dot, norm_sq, sub};
use crate::streams::{ScenarioSpec, SlotFunctions};
use crate::{Error, Result};

/// Solver weights: `v` on the objective subgradient and `alpha` on the
/// proximal term. Both strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgorithmParams {
    pub v: f64,
    pub alpha: f64,
}

impl AlgorithmParams {
    pub fn new(v: f64, alpha: f64) -> Result<Self> {
        if !(v > 0.0) || !(alpha > 0.0) {
            return Err(Error::InvalidInput(format!(
                "need v > 0 and alpha > 0, got v={v} alpha={alpha}"
            )));
        }
        Ok(AlgorithmParams { v, alpha })
    }

    /// Default derivation from a target accuracy: `V = ⌈1/ε⌉`, `α = V²`.
    pub fn from_epsilon(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidInput(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        let v = fp::ceil(1.0 / epsilon);
        Self::new(v, v * v)
    }
}

/// Snapshot of one executed slot, carrying both `Q(t)` and `Q(t+1)` so
/// every per-slot inequality can be checked locally without re-simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotRecord {
    pub slot: u64,
    pub decision: Vec<f64>,
    pub objective_value: f64,
    pub constraint_values: Vec<f64>,
    /// `Q(t)`, the queues the decision saw.
    pub queues: Vec<f64>,
    /// `Q(t+1)`, the queues after this slot's update.
    pub queues_next: Vec<f64>,
    /// Lyapunov drift `Δ(t) = ½‖Q(t+1)‖² − ½‖Q(t)‖²`.
    pub drift: f64,
    /// `‖X_t − X_{t-1}‖²` (zero at `t = 0`).
    pub step_sq: f64,
}

/// Stored evaluations from the previous slot, everything the next decision
/// and queue update need.
#[derive(Debug, Clone, PartialEq)]
struct PrevSlotData {
    objective_subgradient: Vec<f64>,
    constraint_values: Vec<f64>,
    constraint_subgradients: Vec<Vec<f64>>,
}

/// Sequential solver state. A self-contained value: independent runs share
/// nothing and may execute concurrently.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    t: u64,
    decision: Vec<f64>,
    queues: Vec<f64>,
    prev: Option<PrevSlotData>,
}

/// One virtual-queue update: `max[q + g_val + g_sub·dx, 0]`.
pub fn queue_update(q: f64, g_val: f64, g_sub: &[f64], dx: &[f64]) -> Result<f64> {
    if g_sub.len() != dx.len() {
        return Err(Error::DimensionMismatch {
            expected: g_sub.len(),
            found: dx.len(),
        });
    }
    debug_assert!(q >= 0.0);
    Ok((q + g_val + dot(g_sub, dx)).max(0.0))
}

/// One fixed-step projected subgradient update:
/// `project(x_prev − step·f_sub)`.
pub fn zinkevich_step(
    x_prev: &[f64],
    f_sub: &[f64],
    step: f64,
    set: &DecisionSet,
) -> Result<Vec<f64>> {
    if !(step > 0.0) {
        return Err(Error::InvalidInput(format!(
            "step size must be positive, got {step}"
        )));
    }
    if f_sub.len() != x_prev.len() {
        return Err(Error::DimensionMismatch {
            expected: x_prev.len(),
            found: f_sub.len(),
        });
    }
    let target: Vec<f64> = x_prev
        .iter()
        .zip(f_sub)
        .map(|(x, g)| x - step * g)
        .collect();
    set.project(&target)
}

impl SolverState {
    /// Fresh state at `t = 0` with `X_0 = x0` and all queues zero.
    pub fn init(set: &DecisionSet, x0: &[f64], num_constraints: usize) -> Result<Self> {
        if !set.contains(x0, 1e-9)? {
            return Err(Error::InvalidInput(
                "x0 is not a member of the decision set".into(),
            ));
        }
        Ok(SolverState {
            t: 0,
            decision: x0.to_vec(),
            queues: alloc::vec![0.0; num_constraints],
            prev: None,
        })
    }

    pub fn slot(&self) -> u64 {
        self.t
    }

    pub fn decision(&self) -> &[f64] {
        &self.decision
    }

    /// Current queue vector `Q(t)`.
    pub fn queues(&self) -> &[f64] {
        &self.queues
    }

    /// Lyapunov value `L(t) = ½‖Q(t)‖²`.
    pub fn lyapunov(&self) -> f64 {
        0.5 * norm_sq(&self.queues)
    }

    /// The weighted subgradient `W_t = V f'_{t-1} + Σ_i Q_i(t) g'_{t-1,i}`.
    fn weighted_subgradient(&self, params: &AlgorithmParams) -> Result<Vec<f64>> {
        let prev = self.prev.as_ref().ok_or(Error::NoHistory)?;
        let mut w: Vec<f64> = prev
            .objective_subgradient
            .iter()
            .map(|g| params.v * g)
            .collect();
        for (q, g_sub) in self.queues.iter().zip(&prev.constraint_subgradients) {
            for (wj, gj) in w.iter_mut().zip(g_sub) {
                *wj += q * gj;
            }
        }
        Ok(w)
    }

    /// The decision for slot `t ≥ 1`: `project(X_{t-1} − W_t/(2α))`, the
    /// unique minimizer of the drift-plus-penalty expression over the set.
    pub fn decision_step(&self, set: &DecisionSet, params: &AlgorithmParams) -> Result<Vec<f64>> {
        let w = self.weighted_subgradient(params)?;
        let target: Vec<f64> = self
            .decision
            .iter()
            .zip(&w)
            .map(|(x, wj)| x - wj / (2.0 * params.alpha))
            .collect();
        set.project(&target)
    }

    /// Executes one slot: picks the decision, updates the queues from the
    /// previous slot's stored data, then evaluates and stores this slot's
    /// functions at the new decision.
    pub fn advance(
        &mut self,
        slot: &SlotFunctions,
        set: &DecisionSet,
        params: &AlgorithmParams,
    ) -> Result<SlotRecord> {
        if slot.slot != self.t {
            return Err(Error::SlotSequence {
                expected: self.t,
                found: slot.slot,
            });
        }
        if slot.num_constraints() != self.queues.len() {
            return Err(Error::DimensionMismatch {
                expected: self.queues.len(),
                found: slot.num_constraints(),
            });
        }
        let queues_before = self.queues.clone();
        let (decision, step_sq) = if self.t == 0 {
            (self.decision.clone(), 0.0)
        } else {
            let next = self.decision_step(set, params)?;
            if !set.contains(&next, 1e-9)? {
                return Err(Error::InvalidInput("decision left the feasible set".into()));
            }
            let dx = sub(&next, &self.decision);
            let prev = self.prev.as_ref().expect("t > 0 implies stored slot data");
            for (i, q) in self.queues.iter_mut().enumerate() {
                *q = queue_update(
                    *q,
                    prev.constraint_values[i],
                    &prev.constraint_subgradients[i],
                    &dx,
                )?;
            }
            let s = norm_sq(&dx);
            (next, s)
        };
        let drift = 0.5 * (norm_sq(&self.queues) - norm_sq(&queues_before));
        let objective_value = slot.objective_value(&decision);
        let constraint_values = slot.constraint_values(&decision);
        self.prev = Some(PrevSlotData {
            objective_subgradient: slot.objective_subgradient(&decision),
            constraint_values: constraint_values.clone(),
            constraint_subgradients: (0..slot.num_constraints())
                .map(|i| slot.constraint_subgradient(i, &decision))
                .collect(),
        });
        let record = SlotRecord {
            slot: self.t,
            decision: decision.clone(),
            objective_value,
            constraint_values,
            queues: queues_before,
            queues_next: self.queues.clone(),
            drift,
            step_sq,
        };
        self.decision = decision;
        self.t += 1;
        Ok(record)
    }

    /// Restarts queues and the slot counter while keeping the current
    /// decision as the new `x0`. Used at frame boundaries of the doubling
    /// wrapper.
    fn restart_frame(&mut self) {
        for q in &mut self.queues {
            *q = 0.0;
        }
        self.t = 0;
        self.prev = None;
    }
}

/// Runs the drift-plus-penalty solver over the scenario's full horizon.
pub fn run_dpp(
    spec: &ScenarioSpec,
    set: &DecisionSet,
    params: &AlgorithmParams,
    x0: &[f64],
) -> Result<Vec<SlotRecord>> {
    let mut state = SolverState::init(set, x0, spec.num_constraints())?;
    let mut records = Vec::with_capacity(spec.horizon as usize);
    for t in 0..spec.horizon {
        let slot = spec.generate_slot(t)?;
        records.push(state.advance(&slot, set, params)?);
    }
    Ok(records)
}

/// Runs the fixed-step projected subgradient baseline. Queues stay zero in
/// the records; constraint values are still recorded for comparison.
pub fn run_zinkevich(
    spec: &ScenarioSpec,
    set: &DecisionSet,
    step: f64,
    x0: &[f64],
) -> Result<Vec<SlotRecord>> {
    if !(step > 0.0) {
        return Err(Error::InvalidInput(format!(
            "step size must be positive, got {step}"
        )));
    }
    if !set.contains(x0, 1e-9)? {
        return Err(Error::InvalidInput(
            "x0 is not a member of the decision set".into(),
        ));
    }
    let k = spec.num_constraints();
    let mut decision = x0.to_vec();
    let mut prev_sub: Option<Vec<f64>> = None;
    let mut records = Vec::with_capacity(spec.horizon as usize);
    for t in 0..spec.horizon {
        let slot = spec.generate_slot(t)?;
        let mut step_sq = 0.0;
        if let Some(f_sub) = &prev_sub {
            let next = zinkevich_step(&decision, f_sub, step, set)?;
            step_sq = crate::linalg::dist_sq(&next, &decision);
            decision = next;
        }
        prev_sub = Some(slot.objective_subgradient(&decision));
        records.push(SlotRecord {
            slot: t,
            decision: decision.clone(),
            objective_value: slot.objective_value(&decision),
            constraint_values: slot.constraint_values(&decision),
            queues: alloc::vec![0.0; k],
            queues_next: alloc::vec![0.0; k],
            drift: 0.0,
            step_sq,
        });
    }
    Ok(records)
}

/// One frame of a doubling run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameInfo {
    /// Global slot the frame starts at.
    pub start: u64,
    /// Slots actually executed (the last frame may be truncated).
    pub len: u64,
    pub epsilon: f64,
    pub v: f64,
    pub alpha: f64,
}

/// Runs the solver over consecutive frames of lengths 2, 4, 8, …, restarting
/// queues at every boundary while carrying the decision over as the new
/// starting point. Frame `m` uses `ε_m = (1/√2)^m` with `V = ⌈1/ε_m⌉` and
/// `α = V²`.
pub fn doubling_run(
    spec: &ScenarioSpec,
    set: &DecisionSet,
    x0: &[f64],
    total_slots: u64,
) -> Result<(Vec<SlotRecord>, Vec<FrameInfo>)> {
    if total_slots < 2 {
        return Err(Error::InvalidInput(
            "doubling run needs at least 2 slots".into(),
        ));
    }
    if total_slots > spec.horizon {
        return Err(Error::SlotOutOfRange {
            slot: total_slots,
            horizon: spec.horizon,
        });
    }
    let mut state = SolverState::init(set, x0, spec.num_constraints())?;
    let mut records = Vec::with_capacity(total_slots as usize);
    let mut frames = Vec::new();
    let mut global = 0u64;
    let mut m = 1u32;
    while global < total_slots {
        let frame_len = 1u64 << m;
        let run_len = frame_len.min(total_slots - global);
        // ε_m = 1/√T_m for the nominal frame length T_m = 2^m.
        let epsilon = 1.0 / fp::sqrt(frame_len as f64);
        let params = AlgorithmParams::from_epsilon(epsilon)?;
        state.restart_frame();
        for local in 0..run_len {
            let t = global + local;
            let slot = spec.generate_slot(t)?;
            // The state counts slots from the frame start; relabel the
            // record with the global slot index.
            let mut record = state.advance(&slot.relabeled(local), set, &params)?;
            record.slot = t;
            records.push(record);
        }
        frames.push(FrameInfo {
            start: global,
            len: run_len,
            epsilon,
            v: params.v,
            alpha: params.alpha,
        });
        global += run_len;
        m += 1;
    }
    Ok((records, frames))
}
