//! Executes a configured run and packages it as a trace.

use ocoq_core::solver::{doubling_run, run_dpp, run_zinkevich};

use crate::config::{BuiltConfig, SolverVariant};
use crate::error::Result;
use crate::trace::{digest, RunTrace, TraceMeta};

pub fn execute(built: &BuiltConfig) -> Result<RunTrace> {
    let cfg = &built.config;
    let x0 = &cfg.solver.x0;
    let (records, frames, v, alpha, step) = match cfg.solver.variant {
        SolverVariant::Dpp => {
            let params = cfg.solver_params()?;
            let records = run_dpp(&built.spec, &built.set, &params, x0)?;
            (records, None, Some(params.v), Some(params.alpha), None)
        }
        SolverVariant::Zinkevich => {
            let step = cfg.baseline_step()?;
            let records = run_zinkevich(&built.spec, &built.set, step, x0)?;
            (records, None, None, None, Some(step))
        }
        SolverVariant::DppDoubling => {
            let (records, frames) = doubling_run(&built.spec, &built.set, x0, cfg.horizon)?;
            (records, Some(frames), None, None, None)
        }
    };
    let meta = TraceMeta {
        variant: cfg.solver.variant,
        seed: cfg.seed,
        horizon: cfg.horizon,
        dimension: built.set.dimension(),
        num_constraints: built.spec.num_constraints(),
        v,
        alpha,
        step,
        config_digest: digest(&built.config_text),
        config_text: built.config_text.clone(),
        frames,
    };
    Ok(RunTrace::new(meta, records))
}
