//! Accuracy sweeps: for each target ε, run with the derived parameters and
//! record when the objective gap and every constraint average first drop
//! below the envelope level at the nominal convergence horizon `⌈1/ε²⌉`.

use ocoq_core::bounds::{constraint_avg_envelope, objective_gap_envelope};
use ocoq_core::oracle::best_fixed_common_subset;
use ocoq_core::solver::{run_dpp, AlgorithmParams};

use crate::config::{BuiltConfig, SolverVariant};
use crate::error::{HarnessError, Result};
use crate::trace::fmt_f64;

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub epsilon: f64,
    pub v: f64,
    pub alpha: f64,
    pub horizon: u64,
    pub objective_threshold: f64,
    pub constraint_threshold: f64,
    /// First slot where both the gap and every constraint average are
    /// under their thresholds; none if that never happens.
    pub convergence_slot: Option<u64>,
    pub final_gap: f64,
    pub final_max_constraint: f64,
}

pub fn sweep(built: &BuiltConfig, epsilons: &[f64]) -> Result<Vec<SweepRow>> {
    if epsilons.is_empty() {
        return Err(HarnessError::Config("sweep: epsilon list is empty".into()));
    }
    if built.config.solver.variant != SolverVariant::Dpp {
        return Err(HarnessError::Config(
            "sweep: only the dpp variant is supported".into(),
        ));
    }
    if built.constants.slater_margin.is_none() {
        return Err(HarnessError::Config(
            "sweep: constraint thresholds need constants.slater".into(),
        ));
    }
    let mut rows = Vec::with_capacity(epsilons.len());
    for &epsilon in epsilons {
        if !(epsilon > 0.0) {
            return Err(HarnessError::Config(format!(
                "sweep: epsilon {epsilon} not positive"
            )));
        }
        let params = AlgorithmParams::from_epsilon(epsilon)
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        let v_int = params.v as u64;
        let t0 = (1.0 / (epsilon * epsilon)).ceil() as u64;
        let horizon = built.config.horizon.max(t0);
        let spec = built.config.build_spec_with_horizon(&built.set, horizon)?;
        let records = run_dpp(&spec, &built.set, &params, &built.config.solver.x0)?;
        let x_hat = best_fixed_common_subset(&spec, &built.set, horizon)?.x_star;

        let objective_threshold =
            objective_gap_envelope(&built.constants, params.v, params.alpha, t0);
        let constraint_threshold = constraint_avg_envelope(&built.constants, v_int, t0)
            .map_err(|e| HarnessError::Config(e.to_string()))?;

        let k = spec.num_constraints();
        let mut run_sum = 0.0;
        let mut ref_sum = 0.0;
        let mut con_sums = vec![0.0f64; k];
        let mut convergence_slot = None;
        let mut final_gap = 0.0;
        let mut final_max_constraint = f64::NEG_INFINITY;
        for (idx, r) in records.iter().enumerate() {
            run_sum += r.objective_value;
            ref_sum += spec.generate_slot(r.slot)?.objective_value(&x_hat);
            for (s, g) in con_sums.iter_mut().zip(&r.constraint_values) {
                *s += g;
            }
            let tf = (idx + 1) as f64;
            let gap = (run_sum - ref_sum) / tf;
            let worst_con = con_sums
                .iter()
                .map(|s| s / tf)
                .fold(f64::NEG_INFINITY, f64::max);
            if convergence_slot.is_none()
                && gap <= objective_threshold
                && (k == 0 || worst_con <= constraint_threshold)
            {
                convergence_slot = Some(idx as u64 + 1);
            }
            final_gap = gap;
            final_max_constraint = worst_con;
        }
        rows.push(SweepRow {
            epsilon,
            v: params.v,
            alpha: params.alpha,
            horizon,
            objective_threshold,
            constraint_threshold,
            convergence_slot,
            final_gap,
            final_max_constraint,
        });
    }
    Ok(rows)
}

/// Comma-separated rendering for external plotting.
pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "epsilon,v,alpha,horizon,objective_threshold,constraint_threshold,convergence_slot,final_gap,final_max_constraint\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            fmt_f64(r.epsilon),
            fmt_f64(r.v),
            fmt_f64(r.alpha),
            r.horizon,
            fmt_f64(r.objective_threshold),
            fmt_f64(r.constraint_threshold),
            r.convergence_slot
                .map_or(String::from(""), |s| s.to_string()),
            fmt_f64(r.final_gap),
            fmt_f64(r.final_max_constraint),
        ));
    }
    out
}
