//! Monte Carlo verification of the expected-value envelopes.
//!
//! Runs independent trials with seeds derived injectively from the master
//! seed, then checks the stochastic-model envelopes with a statistical
//! slack of three standard errors added to the closed-form right-hand
//! sides. Trials execute sequentially and reduce in trial order, so the
//! report is independent of timing.

use ocoq_core::bounds::{constraint_avg_envelope, iid_objective_gap_envelope, iid_queue_envelope};
use ocoq_core::linalg::norm;
use ocoq_core::oracle::best_fixed_expected;
use ocoq_core::rng::derive_seed;
use ocoq_core::solver::run_dpp;
use ocoq_core::streams::ScenarioFamily;

use crate::config::{BuiltConfig, SolverVariant};
use crate::error::{HarnessError, Result};
use crate::report::{CheckResult, VerificationReport};

pub struct McOptions {
    pub trials: u64,
    /// Draws for the expected-value oracle's Monte Carlo estimates.
    pub mc_slots: u64,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions {
            trials: 100,
            mc_slots: 100_000,
        }
    }
}

struct Sample {
    mean: f64,
    std_error: f64,
}

fn summarize(values: &[f64]) -> Sample {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Sample {
        mean,
        std_error: (var / n).sqrt(),
    }
}

fn stochastic_check(
    id: &str,
    sample: Sample,
    envelope: f64,
    trials: u64,
    slots: u64,
) -> CheckResult {
    let allowed = envelope + 3.0 * sample.std_error;
    CheckResult {
        id: id.to_string(),
        pass: sample.mean <= allowed + 1e-12 * (1.0 + allowed.abs()),
        slots_checked: slots,
        max_violation: sample.mean - allowed,
        tolerance: 3.0 * sample.std_error,
        trials: Some(trials),
        mean: Some(sample.mean),
        envelope: Some(envelope),
        std_error: Some(sample.std_error),
        note: None,
    }
}

pub fn monte_carlo(built: &BuiltConfig, opts: &McOptions) -> Result<VerificationReport> {
    if opts.trials < 2 {
        return Err(HarnessError::Config(
            "mc: need at least 2 trials for a standard error".into(),
        ));
    }
    if built.config.solver.variant != SolverVariant::Dpp {
        return Err(HarnessError::Config(
            "mc: only the dpp variant is supported".into(),
        ));
    }
    let is_model2 = match built.spec.family {
        ScenarioFamily::Model1Iid { .. } => false,
        ScenarioFamily::Model2Iid { .. } => true,
        _ => {
            return Err(HarnessError::Config(
                "mc: scenario family must be model1-iid or model2-iid".into(),
            ))
        }
    };
    let params = built.config.solver_params()?;
    let horizon = built.config.horizon;
    if horizon < 2 {
        return Err(HarnessError::Config(
            "mc: horizon must be at least 2".into(),
        ));
    }
    let k = built.spec.num_constraints();

    // Independent trials, seeds derived injectively from the master seed.
    let trials = opts.trials;
    let mut avg_objectives = Vec::with_capacity(trials as usize);
    let mut avg_constraints = vec![Vec::with_capacity(trials as usize); k];
    let mut final_queue_norms = Vec::with_capacity(trials as usize);
    for j in 0..trials {
        let mut spec = built.spec.clone();
        spec.seed = derive_seed(built.config.seed, j);
        let records = run_dpp(&spec, &built.set, &params, &built.config.solver.x0)?;
        let tf = horizon as f64;
        avg_objectives.push(records.iter().map(|r| r.objective_value).sum::<f64>() / tf);
        for (i, sink) in avg_constraints.iter_mut().enumerate() {
            sink.push(records.iter().map(|r| r.constraint_values[i]).sum::<f64>() / tf);
        }
        final_queue_norms.push(norm(&records.last().expect("horizon >= 2").queues_next));
    }

    let mut results = Vec::new();

    // Objective: mean time-average against the best fixed decision that
    // satisfies the constraints in expectation.
    let oracle = best_fixed_expected(&built.spec, &built.set, opts.mc_slots)?;
    let reference = if is_model2 {
        built.constants.optimal_value.unwrap_or(
            oracle
                .f_star
                .expect("model2 oracle reports the optimal expected objective"),
        )
    } else {
        // Deterministic objective schedule: its prefix average at the run
        // horizon is the comparison term.
        let mut acc = 0.0;
        for t in 0..horizon {
            acc += built.spec.generate_slot(t)?.objective_value(&oracle.x_star);
        }
        acc / horizon as f64
    };
    let gaps: Vec<f64> = avg_objectives.iter().map(|a| a - reference).collect();
    let envelope = iid_objective_gap_envelope(&built.constants, params.v, horizon);
    let id = if is_model2 {
        "model2-objective"
    } else {
        "model1-objective"
    };
    results.push(stochastic_check(
        id,
        summarize(&gaps),
        envelope,
        trials,
        horizon,
    ));

    // Constraints: the worst-case envelope applies when the scenario also
    // satisfies a pathwise Slater condition.
    if built.constants.slater_margin.is_some() {
        let v_int = params.v as u64;
        if params.v.fract() == 0.0
            && v_int >= 1
            && (params.alpha - params.v * params.v).abs() <= 1e-9 * params.v.max(1.0)
        {
            let envelope = constraint_avg_envelope(&built.constants, v_int, horizon)
                .map_err(|e| HarnessError::Config(e.to_string()))?;
            for (i, sink) in avg_constraints.iter().enumerate() {
                let id = format!(
                    "{}-constraint-{i}",
                    if is_model2 { "model2" } else { "model1" }
                );
                results.push(stochastic_check(
                    &id,
                    summarize(sink),
                    envelope,
                    trials,
                    horizon,
                ));
            }
        }
    }

    // Queue growth for the fully i.i.d. model, when multipliers are known;
    // the final recorded queues are Q(T+1) for T = horizon − 1.
    if is_model2 && built.constants.lagrange_multipliers.is_some() {
        let envelope = iid_queue_envelope(&built.constants, params.v, params.alpha, horizon - 1)
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        results.push(stochastic_check(
            "model2-queue",
            summarize(&final_queue_norms),
            envelope,
            trials,
            horizon,
        ));
    }

    Ok(VerificationReport { results })
}
