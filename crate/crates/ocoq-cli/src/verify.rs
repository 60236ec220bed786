//! Envelope and inequality verification against a persisted trace.
//!
//! Verification is read-only: the trace supplies decisions, function
//! values, queues, and drifts per slot, and the scenario regenerated from
//! the embedded config supplies subgradients and comparison-point values.
//! Each check reports the worst margin `lhs − rhs − slack` it saw.

use ocoq_core::bounds::{
    self, constraint_avg_envelope, doubling_regret_coefficient, drift_constant,
    fixed_step_gap_coefficient, objective_gap_envelope, queue_norm_envelope, queue_step_bound,
    ProblemConstants,
};
use ocoq_core::geometry::DecisionSet;
use ocoq_core::linalg::{dist_sq, dot, norm, sub};
use ocoq_core::oracle::best_fixed_common_subset;
use ocoq_core::rng::derive_seed;
use ocoq_core::streams::ScenarioSpec;

use crate::config::{self, BuiltConfig, SolverVariant};
use crate::error::{HarnessError, Result};
use crate::report::{CheckResult, Margin, VerificationReport};
use crate::trace::RunTrace;

/// Scale-aware slack for accumulated floating-point error.
fn slack(base: f64, rhs: f64) -> f64 {
    base * (1.0 + rhs.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckSelector {
    Theorem1,
    Theorem2,
    Theorem3,
    Lemmas,
    Doubling,
    Zinkevich,
}

pub fn parse_selectors(text: &str) -> Result<Vec<CheckSelector>> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part {
            "t1" | "theorem1" => out.push(CheckSelector::Theorem1),
            "t2" | "theorem2" => out.push(CheckSelector::Theorem2),
            "t3" | "theorem3" => out.push(CheckSelector::Theorem3),
            "lemmas" => out.push(CheckSelector::Lemmas),
            "doubling" => out.push(CheckSelector::Doubling),
            "zinkevich" => out.push(CheckSelector::Zinkevich),
            "all" => {
                return Ok(vec![
                    CheckSelector::Theorem1,
                    CheckSelector::Theorem2,
                    CheckSelector::Theorem3,
                    CheckSelector::Lemmas,
                ])
            }
            other => {
                return Err(HarnessError::Config(format!(
                    "unknown theorem selector: {other}"
                )))
            }
        }
    }
    if out.is_empty() {
        return Err(HarnessError::Config("no theorem selectors given".into()));
    }
    Ok(out)
}

struct VerifyCtx<'a> {
    trace: &'a RunTrace,
    set: DecisionSet,
    spec: ScenarioSpec,
    constants: ProblemConstants,
}

impl<'a> VerifyCtx<'a> {
    fn from_trace(trace: &'a RunTrace) -> Result<Self> {
        if crate::trace::digest(&trace.meta.config_text) != trace.meta.config_digest {
            return Err(HarnessError::Config(
                "trace: embedded config does not match its recorded digest".into(),
            ));
        }
        let built: BuiltConfig = config::build(&trace.meta.config_text)?;
        if built.set.dimension() != trace.meta.dimension
            || built.spec.num_constraints() != trace.meta.num_constraints
        {
            return Err(HarnessError::Config(
                "trace metadata does not match its embedded config".into(),
            ));
        }
        Ok(VerifyCtx {
            trace,
            set: built.set,
            spec: built.spec,
            constants: built.constants,
        })
    }

    fn horizon(&self) -> u64 {
        self.trace.horizon()
    }

    fn require_variant(&self, expected: SolverVariant, what: &str) -> Result<()> {
        if self.trace.meta.variant != expected {
            return Err(HarnessError::Config(format!(
                "{what} applies to {} traces, got {}",
                expected.as_str(),
                self.trace.meta.variant.as_str()
            )));
        }
        Ok(())
    }

    /// Integer V from the trace parameters.
    fn integer_v(&self) -> Result<u64> {
        let v = self
            .trace
            .meta
            .v
            .ok_or_else(|| HarnessError::Config("trace has no V parameter".into()))?;
        if v < 1.0 || v.fract() != 0.0 {
            return Err(HarnessError::Config(format!(
                "this envelope needs a positive integer V, got {v}"
            )));
        }
        Ok(v as u64)
    }

    fn alpha(&self) -> Result<f64> {
        self.trace
            .meta
            .alpha
            .ok_or_else(|| HarnessError::Config("trace has no alpha parameter".into()))
    }

    /// Cumulative `Σ_{t<T} f_t(x)` for a fixed comparison point.
    fn fixed_point_objective_prefix(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.horizon() as usize);
        let mut acc = 0.0;
        for t in 0..self.horizon() {
            acc += self.spec.generate_slot(t)?.objective_value(x);
            out.push(acc);
        }
        Ok(out)
    }

    fn hindsight_point(&self) -> Result<Vec<f64>> {
        let sol = best_fixed_common_subset(&self.spec, &self.set, self.horizon())?;
        Ok(sol.x_star)
    }
}

pub fn verify(trace: &RunTrace, selectors: &[CheckSelector]) -> Result<VerificationReport> {
    let ctx = VerifyCtx::from_trace(trace)?;
    let mut results = Vec::new();
    for sel in selectors {
        match sel {
            CheckSelector::Theorem1 => results.push(check_objective_envelope(&ctx)?),
            CheckSelector::Theorem2 => results.push(check_queue_envelope(&ctx)?),
            CheckSelector::Theorem3 => results.push(check_constraint_envelope(&ctx)?),
            CheckSelector::Lemmas => {
                results.push(check_drift_bound(&ctx)?);
                results.push(check_queue_coupling(&ctx)?);
                results.push(check_drift_plus_penalty(&ctx)?);
                results.push(check_strong_convexity(&ctx)?);
                results.push(check_queue_step(&ctx)?);
            }
            CheckSelector::Doubling => results.push(check_doubling_regret(&ctx)?),
            CheckSelector::Zinkevich => {
                results.push(check_fixed_step_gap(&ctx)?);
                results.push(check_fixed_step_pathwise(&ctx)?);
            }
        }
    }
    Ok(VerificationReport { results })
}

/// Time-average objective versus the hindsight fixed point, at every
/// prefix, against `B/V + VG²/(2α) + αD²/(VT)`.
fn check_objective_envelope(ctx: &VerifyCtx) -> Result<CheckResult> {
    ctx.require_variant(SolverVariant::Dpp, "the objective envelope")?;
    let mut margin = Margin::new();
    if ctx.horizon() > 0 {
        let v = ctx
            .trace
            .meta
            .v
            .ok_or_else(|| HarnessError::Config("trace has no V parameter".into()))?;
        let alpha = ctx.alpha()?;
        let x_hat = ctx.hindsight_point()?;
        let prefix = ctx.fixed_point_objective_prefix(&x_hat)?;
        for t in 1..=ctx.horizon() {
            let gap = (ctx.trace.objective_sum(t) - prefix[t as usize - 1]) / t as f64;
            let envelope = objective_gap_envelope(&ctx.constants, v, alpha, t);
            margin.check(gap, envelope, 1e-6);
        }
    }
    let mut result = CheckResult::from_margin("theorem1-objective", margin.finish(), 1e-6);
    // The bound quantifies over every fixed feasible point; the check uses
    // the hindsight oracle's single best one, which is the binding case at
    // the full horizon but an approximation of the universal quantifier at
    // shorter prefixes.
    result.note = Some("gap measured against the hindsight oracle's best fixed point".into());
    Ok(result)
}

/// `‖Q(t)‖ ≤ θV` at every slot.
fn check_queue_envelope(ctx: &VerifyCtx) -> Result<CheckResult> {
    ctx.require_variant(SolverVariant::Dpp, "the queue envelope")?;
    let v = ctx.integer_v()?;
    let alpha = ctx.alpha()?;
    let envelope = queue_norm_envelope(&ctx.constants, v, alpha)
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let mut margin = Margin::new();
    for r in &ctx.trace.records {
        margin.check(norm(&r.queues), envelope, slack(1e-8, envelope));
    }
    if let Some(last) = ctx.trace.records.last() {
        margin.check(norm(&last.queues_next), envelope, slack(1e-8, envelope));
    }
    let mut result = CheckResult::from_margin("theorem2-queue", margin.finish(), 1e-8);
    result.envelope = Some(envelope);
    Ok(result)
}

/// Time-average of every constraint at every prefix against
/// `θV/T + G²/(4V) + G²(1 + θ√k)²/(4V)` (requires `α = V²`).
fn check_constraint_envelope(ctx: &VerifyCtx) -> Result<CheckResult> {
    ctx.require_variant(SolverVariant::Dpp, "the constraint envelope")?;
    let v = ctx.integer_v()?;
    let alpha = ctx.alpha()?;
    let vf = v as f64;
    if (alpha - vf * vf).abs() > 1e-9 * vf.max(1.0) {
        return Err(HarnessError::Config(format!(
            "the constraint envelope needs alpha = V²; got V={vf}, alpha={alpha}"
        )));
    }
    let mut margin = Margin::new();
    for t in 1..=ctx.horizon() {
        let envelope = constraint_avg_envelope(&ctx.constants, v, t)
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        for i in 0..ctx.trace.meta.num_constraints {
            let avg = ctx.trace.constraint_sum(i, t) / t as f64;
            margin.check(avg, envelope, 1e-6);
        }
    }
    Ok(CheckResult::from_margin(
        "theorem3-constraint",
        margin.finish(),
        1e-6,
    ))
}

/// Per-slot drift bound `Δ(t) ≤ B + Σ Q_i(t)·[g + g'·dx]`.
fn check_drift_bound(ctx: &VerifyCtx) -> Result<CheckResult> {
    ctx.require_variant(SolverVariant::Dpp, "the drift bound")?;
    let b = drift_constant(&ctx.constants);
    let mut margin = Margin::new();
    for t in 1..ctx.trace.records.len() {
        let prev = &ctx.trace.records[t - 1];
        let cur = &ctx.trace.records[t];
        let slot_prev = ctx.spec.generate_slot(prev.slot)?;
        let dx = sub(&cur.decision, &prev.decision);
        let mut rhs = b;
        for i in 0..ctx.trace.meta.num_constraints {
            let linearized = prev.constraint_values[i]
                + dot(&slot_prev.constraint_subgradient(i, &prev.decision), &dx);
            rhs += cur.queues[i] * linearized;
        }
        margin.check(cur.drift, rhs, slack(1e-8, rhs));
    }
    Ok(CheckResult::from_margin(
        "lemma3-drift",
        margin.finish(),
        1e-8,
    ))
}

/// Queue/constraint coupling at every prefix `T` (up to the last slot with
/// `Q(T+1)` recorded), for β ∈ {0.5, 1, V}.
fn check_queue_coupling(ctx: &VerifyCtx) -> Result<CheckResult> {
    ctx.require_variant(SolverVariant::Dpp, "the queue coupling bound")?;
    let g = ctx.constants.subgradient_bound;
    let mut betas = vec![0.5, 1.0];
    if let Some(v) = ctx.trace.meta.v {
        betas.push(v);
    }
    let mut margin = Margin::new();
    for t in 1..ctx.trace.records.len() {
        let tf = t as f64;
        // The step sum runs through slot T inclusive: Σ_{τ=1..T} ‖X_τ − X_{τ-1}‖².
        let step_sum = ctx.trace.step_sq_sum(t as u64 + 1);
        for i in 0..ctx.trace.meta.num_constraints {
            let lhs = ctx.trace.constraint_sum(i, t as u64) / tf;
            let q_next = ctx.trace.records[t].queues_next[i];
            for beta in &betas {
                let rhs = q_next / tf + g * g / (4.0 * beta) + beta / tf * step_sum;
                margin.check(lhs, rhs, slack(1e-8, rhs));
            }
        }
    }
    Ok(CheckResult::from_margin(
        "lemma2-queue-coupling",
        margin.finish(),
        1e-8,
    ))
}

/// Slots to sample for the checks that need per-slot comparison points.
fn sampled_slots(records: usize) -> Vec<usize> {
    const CAP: usize = 512;
    if records <= CAP {
        (1..records).collect()
    } else {
        let stride = records.div_ceil(CAP);
        let mut slots: Vec<usize> = (1..records).step_by(stride).collect();
        if *slots.last().unwrap_or(&0) != records - 1 {
            slots.push(records - 1);
        }
        slots
    }
}

/// Drift-plus-penalty bound against 50 sampled comparison points per slot.
fn check_drift_plus_penalty(ctx: &VerifyCtx) -> Result<CheckResult> {
    ctx.require_variant(SolverVariant::Dpp, "the drift-plus-penalty bound")?;
    let v = ctx
        .trace
        .meta
        .v
        .ok_or_else(|| HarnessError::Config("trace has no V parameter".into()))?;
    let alpha = ctx.alpha()?;
    let b = drift_constant(&ctx.constants);
    let g = ctx.constants.subgradient_bound;
    let mut margin = Margin::new();
    for t in sampled_slots(ctx.trace.records.len()) {
        let prev = &ctx.trace.records[t - 1];
        let cur = &ctx.trace.records[t];
        let slot_prev = ctx.spec.generate_slot(prev.slot)?;
        let lhs = cur.drift + alpha / 2.0 * cur.step_sq;
        for s in 0..50u64 {
            let y = ctx.set.sample(derive_seed(0xd41 + t as u64, s));
            let mut rhs = b + v * slot_prev.objective_value(&y) - v * prev.objective_value
                + alpha * dist_sq(&y, &prev.decision)
                - alpha * dist_sq(&y, &cur.decision)
                + v * v * g * g / (2.0 * alpha);
            for i in 0..ctx.trace.meta.num_constraints {
                rhs += cur.queues[i] * slot_prev.constraint_value(i, &y);
            }
            margin.check(lhs, rhs, slack(1e-8, rhs));
        }
    }
    Ok(CheckResult::from_margin(
        "lemma4-drift-plus-penalty",
        margin.finish(),
        1e-8,
    ))
}

/// The decision minimizes a 2α-strongly convex expression, so it improves
/// on every sampled comparison point by `α‖y − X_t‖²`.
fn check_strong_convexity(ctx: &VerifyCtx) -> Result<CheckResult> {
    ctx.require_variant(SolverVariant::Dpp, "the strong convexity certificate")?;
    let v = ctx
        .trace
        .meta
        .v
        .ok_or_else(|| HarnessError::Config("trace has no V parameter".into()))?;
    let alpha = ctx.alpha()?;
    let mut margin = Margin::new();
    for t in sampled_slots(ctx.trace.records.len()) {
        let prev = &ctx.trace.records[t - 1];
        let cur = &ctx.trace.records[t];
        let slot_prev = ctx.spec.generate_slot(prev.slot)?;
        let mut w: Vec<f64> = slot_prev
            .objective_subgradient(&prev.decision)
            .iter()
            .map(|x| v * x)
            .collect();
        for i in 0..ctx.trace.meta.num_constraints {
            let gs = slot_prev.constraint_subgradient(i, &prev.decision);
            for (wj, gj) in w.iter_mut().zip(&gs) {
                *wj += cur.queues[i] * gj;
            }
        }
        let expr = |x: &[f64]| dot(&w, x) + alpha * dist_sq(x, &prev.decision);
        let at_decision = expr(&cur.decision);
        for s in 0..50u64 {
            let y = ctx.set.sample(derive_seed(0x5c0 + t as u64, s));
            let rhs = expr(&y) - alpha * dist_sq(&y, &cur.decision);
            margin.check(at_decision, rhs, slack(1e-8, rhs));
        }
    }
    Ok(CheckResult::from_margin(
        "strong-convexity",
        margin.finish(),
        1e-8,
    ))
}

/// `‖Q(t+1)‖ − ‖Q(t)‖ ≤ δ` every slot.
fn check_queue_step(ctx: &VerifyCtx) -> Result<CheckResult> {
    let delta = queue_step_bound(&ctx.constants);
    let mut margin = Margin::new();
    for r in &ctx.trace.records {
        margin.check(norm(&r.queues_next) - norm(&r.queues), delta, 1e-10);
    }
    let mut result = CheckResult::from_margin("queue-step", margin.finish(), 1e-10);
    result.envelope = Some(delta);
    Ok(result)
}

/// Cumulative objective regret of the doubling run stays under `β√T`.
fn check_doubling_regret(ctx: &VerifyCtx) -> Result<CheckResult> {
    ctx.require_variant(SolverVariant::DppDoubling, "the doubling regret bound")?;
    let beta = doubling_regret_coefficient(&ctx.constants);
    let mut margin = Margin::new();
    if ctx.horizon() > 0 {
        let x_hat = ctx.hindsight_point()?;
        let prefix = ctx.fixed_point_objective_prefix(&x_hat)?;
        for t in 1..=ctx.horizon() {
            let regret = ctx.trace.objective_sum(t) - prefix[t as usize - 1];
            let rhs = beta * (t as f64).sqrt();
            margin.check(regret, rhs, slack(1e-9, rhs));
        }
    }
    let mut result = CheckResult::from_margin("doubling-regret", margin.finish(), 1e-9);
    result.envelope = Some(beta);
    Ok(result)
}

/// Fixed-step baseline: average gap within `cε` of the hindsight decision
/// for every `T ≥ 1/ε²`.
fn check_fixed_step_gap(ctx: &VerifyCtx) -> Result<CheckResult> {
    ctx.require_variant(SolverVariant::Zinkevich, "the fixed-step gap bound")?;
    let step = ctx
        .trace
        .meta
        .step
        .ok_or_else(|| HarnessError::Config("trace has no step parameter".into()))?;
    let c = fixed_step_gap_coefficient(&ctx.constants);
    let start = (1.0 / (step * step)).ceil() as u64;
    let mut margin = Margin::new();
    if ctx.horizon() > 0 && start <= ctx.horizon() {
        let x_hat = ctx.hindsight_point()?;
        let prefix = ctx.fixed_point_objective_prefix(&x_hat)?;
        for t in start..=ctx.horizon() {
            let gap = (ctx.trace.objective_sum(t) - prefix[t as usize - 1]) / t as f64;
            margin.check(gap, c * step, slack(1e-9, c * step));
        }
    }
    let mut result = CheckResult::from_margin("zinkevich-gap", margin.finish(), 1e-9);
    result.envelope = Some(c * step);
    Ok(result)
}

/// The sharper pathwise form `gap(T) ≤ D²/(2εT) + εG²/2` for every prefix.
fn check_fixed_step_pathwise(ctx: &VerifyCtx) -> Result<CheckResult> {
    ctx.require_variant(SolverVariant::Zinkevich, "the fixed-step pathwise bound")?;
    let step = ctx
        .trace
        .meta
        .step
        .ok_or_else(|| HarnessError::Config("trace has no step parameter".into()))?;
    let d = ctx.constants.diameter;
    let g = ctx.constants.subgradient_bound;
    let mut margin = Margin::new();
    if ctx.horizon() > 0 {
        let x_hat = ctx.hindsight_point()?;
        let prefix = ctx.fixed_point_objective_prefix(&x_hat)?;
        for t in 1..=ctx.horizon() {
            let gap = (ctx.trace.objective_sum(t) - prefix[t as usize - 1]) / t as f64;
            let rhs = d * d / (2.0 * step * t as f64) + step * g * g / 2.0;
            margin.check(gap, rhs, slack(1e-9, rhs));
        }
    }
    Ok(CheckResult::from_margin(
        "zinkevich-pathwise",
        margin.finish(),
        1e-9,
    ))
}

/// Empirical re-validation of the declared constants, exposed alongside
/// verify for the CLI.
pub fn validate_declared_constants(
    trace: &RunTrace,
    samples: u64,
) -> Result<ocoq_core::streams::ConstantsReport> {
    let ctx = VerifyCtx::from_trace(trace)?;
    ctx.spec
        .validate_constants(&ctx.set, samples, derive_seed(trace.meta.seed, 0xcde))
        .map_err(HarnessError::from)
}

pub use bounds::frame_gap_coefficients;
