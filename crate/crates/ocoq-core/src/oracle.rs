//! Offline hindsight solvers.
//!
//! These produce the comparison targets for the regret metrics: the best
//! fixed decision over the subset where every realized constraint is
//! nonpositive (deterministic scenarios), and the best fixed decision over
//! the subset where constraints hold in expectation (stochastic models),
//! including an approximation of the offline optimal expected objective.
//!
//! Instances with dimension ≤ 2 are solved by exhaustive grid search at
//! resolution `10⁻³·D`; higher dimensions fall back to projected
//! subgradient descent on a penalized objective, which the test suite
//! certifies against the grid method on 2D instances.

use alloc::vec::Vec;

use crate::geometry::DecisionSet;
use crate::linalg::add_scaled;
use crate::rng::derive_seed;
use crate::streams::{ScenarioFamily, ScenarioSpec, SlotFunctions};
use crate::{Error, Result};

/// Iteration budget for the projected-subgradient fallback.
const SUBGRADIENT_ITERS: u32 = 100_000;
/// Default feasibility slack for membership in the hindsight subset on
/// deterministic scenarios.
const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    Grid,
    OfflineSubgradient,
}

/// Best fixed decision found in hindsight.
#[derive(Debug, Clone, PartialEq)]
pub struct HindsightSolution {
    pub x_star: Vec<f64>,
    /// The achieved time-average (or expected) objective at `x_star`.
    pub objective_avg: f64,
    /// Worst value of the relevant constraint aggregate at `x_star`.
    pub feasibility_residual: f64,
    pub method: OracleMethod,
    pub tolerance: f64,
    /// Offline optimal expected objective; populated for the fully i.i.d.
    /// model, where the best fixed decision attains it.
    pub f_star: Option<f64>,
}

/// Calls `visit` on every grid point of the set's bounding box that is a
/// member of the set, spacing points `resolution` apart per axis with both
/// endpoints included.
pub fn for_each_grid_member<F: FnMut(&[f64])>(
    set: &DecisionSet,
    resolution: f64,
    mut visit: F,
) -> Result<()> {
    if !(resolution > 0.0) {
        return Err(Error::InvalidInput(
            "grid resolution must be positive".into(),
        ));
    }
    let (lower, upper) = set.bounding_box();
    let n = lower.len();
    let counts: Vec<u64> = lower
        .iter()
        .zip(&upper)
        .map(|(l, u)| {
            let span = u - l;
            if span <= 0.0 {
                1
            } else {
                crate::fp::ceil(span / resolution) as u64 + 1
            }
        })
        .collect();
    let mut idx = alloc::vec![0u64; n];
    let mut point = alloc::vec![0.0f64; n];
    loop {
        for ((p, (&l, &u)), (&j, &c)) in point
            .iter_mut()
            .zip(lower.iter().zip(&upper))
            .zip(idx.iter().zip(&counts))
        {
            *p = if j + 1 == c {
                u
            } else {
                (l + j as f64 * resolution).min(u)
            };
        }
        if set.contains(&point, 1e-12)? {
            visit(&point);
        }
        // odometer increment
        let mut axis = 0;
        loop {
            if axis == n {
                return Ok(());
            }
            idx[axis] += 1;
            if idx[axis] < counts[axis] {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
    }
}

/// Exhaustive grid minimization of `objective` over the set's members.
pub fn grid_minimize<F: FnMut(&[f64]) -> f64>(
    set: &DecisionSet,
    resolution: f64,
    mut objective: F,
) -> Result<(Vec<f64>, f64)> {
    let mut best: Option<(Vec<f64>, f64)> = None;
    for_each_grid_member(set, resolution, |x| {
        let v = objective(x);
        if best.as_ref().is_none_or(|(_, bv)| v < *bv) {
            best = Some((x.to_vec(), v));
        }
    })?;
    best.ok_or(Error::Infeasible {
        residual: f64::INFINITY,
    })
}

/// The hindsight problem in aggregate form: a (possibly weighted) average
/// objective and per-constraint worst-case or expected aggregates.
struct AggregateProblem {
    /// `(slot functions, weight)`; the average objective is the weighted sum.
    objective_slots: Vec<(SlotFunctions, f64)>,
    /// Constraint aggregate is, per constraint index, the max over these.
    constraint_slots: Vec<SlotFunctions>,
    num_constraints: usize,
}

impl AggregateProblem {
    fn avg_objective(&self, x: &[f64]) -> f64 {
        self.objective_slots
            .iter()
            .map(|(s, w)| w * s.objective_value(x))
            .sum()
    }

    /// Worst violation across constraints and aggregate slots at `x`.
    fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for i in 0..self.num_constraints {
            for s in &self.constraint_slots {
                worst = worst.max(s.constraint_value(i, x));
            }
        }
        if self.num_constraints == 0 {
            worst = 0.0;
        }
        worst
    }

    fn avg_objective_subgradient(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let mut g = alloc::vec![0.0; n];
        for (s, w) in &self.objective_slots {
            let sub = s.objective_subgradient(x);
            for (gi, si) in g.iter_mut().zip(&sub) {
                *gi += w * si;
            }
        }
        g
    }

    /// Subgradient of `max(0, max violation)` at `x`: the active slot's
    /// constraint subgradient, or zero when strictly feasible.
    fn violation_subgradient(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let mut worst = 0.0f64;
        let mut arg: Option<(usize, usize)> = None;
        for i in 0..self.num_constraints {
            for (j, s) in self.constraint_slots.iter().enumerate() {
                let v = s.constraint_value(i, x);
                if v > worst {
                    worst = v;
                    arg = Some((i, j));
                }
            }
        }
        match arg {
            Some((i, j)) => self.constraint_slots[j].constraint_subgradient(i, x),
            None => alloc::vec![0.0; n],
        }
    }
}

/// Number of `t < horizon` congruent to `r` modulo `period`.
fn residue_count(r: u64, horizon: u64, period: u64) -> u64 {
    if r >= horizon {
        0
    } else {
        (horizon - r).div_ceil(period)
    }
}

fn realized_aggregates(spec: &ScenarioSpec, horizon: u64) -> Result<AggregateProblem> {
    if horizon == 0 || horizon > spec.horizon {
        return Err(Error::SlotOutOfRange {
            slot: horizon,
            horizon: spec.horizon,
        });
    }
    let objective_slots = match spec.objective_period() {
        Some(p) => {
            let distinct = p.min(horizon);
            (0..distinct)
                .map(|r| {
                    Ok((
                        spec.generate_slot(r)?,
                        residue_count(r, horizon, p) as f64 / horizon as f64,
                    ))
                })
                .collect::<Result<Vec<_>>>()?
        }
        None => (0..horizon)
            .map(|t| Ok((spec.generate_slot(t)?, 1.0 / horizon as f64)))
            .collect::<Result<Vec<_>>>()?,
    };
    let constraint_slots = match spec.constraint_period() {
        Some(p) => (0..p.min(horizon))
            .map(|r| spec.generate_slot(r))
            .collect::<Result<Vec<_>>>()?,
        None => (0..horizon)
            .map(|t| spec.generate_slot(t))
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(AggregateProblem {
        objective_slots,
        constraint_slots,
        num_constraints: spec.num_constraints(),
    })
}

fn solve_aggregate(
    problem: &AggregateProblem,
    set: &DecisionSet,
    spec: &ScenarioSpec,
    tolerance: f64,
    force_subgradient: bool,
) -> Result<(Vec<f64>, f64, f64, OracleMethod)> {
    if set.dimension() <= 2 && !force_subgradient {
        let resolution = 1e-3 * set.diameter();
        let mut best: Option<(Vec<f64>, f64)> = None;
        let mut best_residual = f64::INFINITY;
        for_each_grid_member(set, resolution, |x| {
            let viol = problem.max_violation(x);
            best_residual = best_residual.min(viol);
            if viol <= tolerance {
                let v = problem.avg_objective(x);
                if best.as_ref().is_none_or(|(_, bv)| v < *bv) {
                    best = Some((x.to_vec(), v));
                }
            }
        })?;
        match best {
            Some((x, v)) => {
                let residual = problem.max_violation(&x);
                Ok((x, v, residual, OracleMethod::Grid))
            }
            None => Err(Error::Infeasible {
                residual: best_residual,
            }),
        }
    } else {
        let x = constrained_subgradient(problem, set, spec, tolerance)?;
        let residual = problem.max_violation(&x);
        if residual > tolerance.max(1e-6) {
            return Err(Error::Infeasible { residual });
        }
        let v = problem.avg_objective(&x);
        Ok((x, v, residual, OracleMethod::OfflineSubgradient))
    }
}

/// Projected subgradient descent with functional constraints: infeasible
/// iterates take a Polyak step back toward the constraint level set,
/// feasible ones take a diminishing objective step. Returns the best
/// iterate seen within the feasibility slack.
fn constrained_subgradient(
    problem: &AggregateProblem,
    set: &DecisionSet,
    spec: &ScenarioSpec,
    tolerance: f64,
) -> Result<Vec<f64>> {
    let scale = set.diameter().max(1e-6) / spec.subgradient_bound.max(1.0);
    let mut x = set.witness().to_vec();
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut objective_steps = 0u32;
    for _ in 0..SUBGRADIENT_ITERS {
        let viol = problem.max_violation(&x);
        if viol > tolerance.max(1e-12) {
            let d = problem.violation_subgradient(&x);
            let d_sq = crate::linalg::norm_sq(&d);
            if d_sq == 0.0 {
                break;
            }
            x = set.project(&add_scaled(&x, -viol / d_sq, &d))?;
        } else {
            let v = problem.avg_objective(&x);
            if best.as_ref().is_none_or(|(_, bv)| v < *bv) {
                best = Some((x.clone(), v));
            }
            let d = problem.avg_objective_subgradient(&x);
            objective_steps += 1;
            let step = scale / crate::fp::sqrt(objective_steps as f64);
            x = set.project(&add_scaled(&x, -step, &d))?;
        }
    }
    match best {
        Some((x, _)) => Ok(x),
        None => Ok(x),
    }
}

/// Best fixed decision over the subset of the set where every realized
/// constraint of slots `0..horizon` is nonpositive (within the default
/// feasibility slack).
pub fn best_fixed_common_subset(
    spec: &ScenarioSpec,
    set: &DecisionSet,
    horizon: u64,
) -> Result<HindsightSolution> {
    let problem = realized_aggregates(spec, horizon)?;
    let (x_star, objective_avg, feasibility_residual, method) =
        solve_aggregate(&problem, set, spec, FEASIBILITY_TOL, false)?;
    Ok(HindsightSolution {
        x_star,
        objective_avg,
        feasibility_residual,
        method,
        tolerance: FEASIBILITY_TOL,
        f_star: None,
    })
}

fn expected_aggregates(spec: &ScenarioSpec) -> Result<AggregateProblem> {
    // Constraints in expectation collapse to a single affine slot per
    // constraint; the (deterministic or expectation-averaged) objective is
    // the schedule average over one period.
    let k = spec.num_constraints();
    let expected_constraints: Vec<crate::streams::FunctionSpec> = (0..k)
        .map(|i| {
            // E[g_i] is affine for the built-in stochastic families; probe
            // it through two evaluations per coordinate.
            expected_affine(spec, i)
        })
        .collect::<Result<Vec<_>>>()?;
    let constraint_slots = alloc::vec![SlotFunctions::new(
        0,
        crate::streams::FunctionSpec::Affine {
            coeffs: alloc::vec![0.0; spec.dimension],
            offset: 0.0
        },
        expected_constraints,
    )];
    let objective_slots = match &spec.family {
        ScenarioFamily::Model1Iid { .. } => match spec.objective_period() {
            // Deterministic schedule: weight each residue by how often it
            // occurs within the spec's own horizon.
            Some(p) => {
                if spec.horizon == 0 {
                    return Err(Error::InvalidInput("scenario horizon is zero".into()));
                }
                (0..p.min(spec.horizon))
                    .map(|r| {
                        Ok((
                            spec.generate_slot(r)?,
                            residue_count(r, spec.horizon, p) as f64 / spec.horizon as f64,
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            None => unreachable!("model1 objective schedules are periodic"),
        },
        ScenarioFamily::Model2Iid { .. } => {
            alloc::vec![(expected_objective_slot(spec)?, 1.0)]
        }
        _ => {
            return Err(Error::InvalidInput(
                "expected-value oracle needs the model1 or model2 family".into(),
            ))
        }
    };
    Ok(AggregateProblem {
        objective_slots,
        constraint_slots,
        num_constraints: k,
    })
}

/// Reconstructs `E[g_i]` as an explicit affine function by probing the
/// closed-form expectation at the origin and the coordinate directions.
fn expected_affine(spec: &ScenarioSpec, i: usize) -> Result<crate::streams::FunctionSpec> {
    let n = spec.dimension;
    let zero = alloc::vec![0.0; n];
    let at_zero = spec
        .expected_constraint(i, &zero)
        .ok_or_else(|| Error::InvalidInput("family has no constraint expectations".into()))?;
    let mut coeffs = alloc::vec![0.0; n];
    let mut e = alloc::vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        coeffs[j] = spec.expected_constraint(i, &e).unwrap() - at_zero;
        e[j] = 0.0;
    }
    Ok(crate::streams::FunctionSpec::Affine {
        coeffs,
        offset: -at_zero,
    })
}

/// A synthetic slot whose objective value equals `E[f_t(x)]` for the fully
/// i.i.d. family: the mean-shifted quadratic plus the constant variance
/// term, represented exactly.
fn expected_objective_slot(spec: &ScenarioSpec) -> Result<SlotFunctions> {
    match &spec.family {
        ScenarioFamily::Model2Iid {
            objective_center,
            objective_dir,
            omega_lo,
            omega_hi,
            ..
        } => {
            // E[f](x) = ‖x − (c + E[ω]·dir)‖² + Var(ω)‖dir‖². The quadratic
            // below carries the x-dependent part; the constant variance term
            // is added back by `expected_objective_offset`.
            let mean = 0.5 * (omega_lo + omega_hi);
            let center: Vec<f64> = objective_center
                .iter()
                .zip(objective_dir)
                .map(|(c, d)| c + mean * d)
                .collect();
            Ok(SlotFunctions::new(
                0,
                crate::streams::FunctionSpec::Quadratic { center },
                alloc::vec![],
            ))
        }
        _ => Err(Error::InvalidInput(
            "expected objective slot needs model2".into(),
        )),
    }
}

/// Constant offset between the synthetic expected-objective slot and the
/// true `E[f_t(x)]` for the fully i.i.d. family (the variance term).
fn expected_objective_offset(spec: &ScenarioSpec) -> f64 {
    match &spec.family {
        ScenarioFamily::Model2Iid {
            objective_dir,
            omega_lo,
            omega_hi,
            ..
        } => {
            let var = (omega_hi - omega_lo) * (omega_hi - omega_lo) / 12.0;
            var * crate::linalg::norm_sq(objective_dir)
        }
        _ => 0.0,
    }
}

/// Best fixed decision over the subset where every constraint holds in
/// expectation. For the fully i.i.d. family the solution's objective is the
/// offline optimal value `f*`, reported with a Monte Carlo certification
/// over `mc_slots` fresh draws.
pub fn best_fixed_expected(
    spec: &ScenarioSpec,
    set: &DecisionSet,
    mc_slots: u64,
) -> Result<HindsightSolution> {
    best_fixed_expected_impl(spec, set, mc_slots, false)
}

pub(crate) fn best_fixed_expected_impl(
    spec: &ScenarioSpec,
    set: &DecisionSet,
    mc_slots: u64,
    force_subgradient: bool,
) -> Result<HindsightSolution> {
    if mc_slots == 0 {
        return Err(Error::InvalidInput("mc_slots must be positive".into()));
    }
    match spec.family {
        ScenarioFamily::Model1Iid { .. } | ScenarioFamily::Model2Iid { .. } => {}
        _ => {
            return Err(Error::InvalidInput(
                "expected-value oracle needs the model1 or model2 family".into(),
            ))
        }
    }
    let problem = expected_aggregates(spec)?;
    // Monte Carlo standard error widens the feasibility slack: expectations
    // are only estimable on stochastic scenarios.
    let mut mc_tol = 0.0f64;
    let probe = set.witness().to_vec();
    for i in 0..spec.num_constraints() {
        let est =
            spec.mc_expected_constraint(i, &probe, mc_slots, derive_seed(spec.seed, 0x7e5))?;
        mc_tol = mc_tol.max(3.0 * est.std_error);
    }
    let tolerance = FEASIBILITY_TOL.max(mc_tol);
    let (x_star, raw_avg, feasibility_residual, method) =
        solve_aggregate(&problem, set, spec, tolerance, force_subgradient)?;
    let objective_avg = raw_avg + expected_objective_offset(spec);
    let f_star = match spec.family {
        ScenarioFamily::Model2Iid { .. } => Some(objective_avg),
        _ => None,
    };
    Ok(HindsightSolution {
        x_star,
        objective_avg,
        feasibility_residual,
        method,
        tolerance,
        f_star,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::streams::{FunctionSpec, ScenarioFamily, SlaterData};

    fn seg(lo: f64, hi: f64) -> DecisionSet {
        DecisionSet::hyperbox(alloc::vec![lo], alloc::vec![hi]).unwrap()
    }

    fn invariant_1d(objective: FunctionSpec, constraints: Vec<FunctionSpec>) -> ScenarioSpec {
        ScenarioSpec::new(
            ScenarioFamily::TimeInvariant {
                objective,
                constraints,
            },
            1,
            16.0,
            16.0,
            None,
            64,
            0,
        )
        .unwrap()
    }

    #[test]
    fn constrained_quadratic_clips_to_boundary() {
        let spec = invariant_1d(
            FunctionSpec::Quadratic {
                center: alloc::vec![0.8],
            },
            alloc::vec![FunctionSpec::Affine {
                coeffs: alloc::vec![1.0],
                offset: 0.5
            }],
        );
        let sol = best_fixed_common_subset(&spec, &seg(-1.0, 1.0), 64).unwrap();
        assert!((sol.x_star[0] - 0.5).abs() <= 2.1e-3);
        assert!((sol.objective_avg - 0.09).abs() <= 2e-3);
        assert!(sol.feasibility_residual <= sol.tolerance);
        assert_eq!(sol.method, OracleMethod::Grid);
    }

    #[test]
    fn hindsight_solution_beats_sampled_feasible_points() {
        let spec = invariant_1d(
            FunctionSpec::Quadratic {
                center: alloc::vec![0.8],
            },
            alloc::vec![FunctionSpec::Affine {
                coeffs: alloc::vec![1.0],
                offset: 0.5
            }],
        );
        let set = seg(-1.0, 1.0);
        let sol = best_fixed_common_subset(&spec, &set, 64).unwrap();
        let slot = spec.generate_slot(0).unwrap();
        for s in 0..100u64 {
            let x = set.sample(derive_seed(71, s));
            if slot.constraint_value(0, &x) <= 0.0 {
                assert!(sol.objective_avg <= slot.objective_value(&x) + 1e-5);
            }
        }
    }

    #[test]
    fn slack_constraint_frees_the_minimizer() {
        let spec = invariant_1d(
            FunctionSpec::Quadratic {
                center: alloc::vec![0.3],
            },
            alloc::vec![FunctionSpec::Affine {
                coeffs: alloc::vec![0.0],
                offset: 1.0
            }],
        );
        let sol = best_fixed_common_subset(&spec, &seg(-1.0, 1.0), 64).unwrap();
        assert!((sol.x_star[0] - 0.3).abs() <= 2.1e-3);
    }

    #[test]
    fn alternating_objectives_balance_at_zero() {
        // f alternates (x−1)² and (x+1)²: the average is minimized at 0
        // with value 1.
        let spec = ScenarioSpec::new(
            ScenarioFamily::AdversarialCommonSubset {
                objective_centers: alloc::vec![alloc::vec![1.0], alloc::vec![-1.0]],
                num_constraints: 1,
                direction_bound: 1e-9,
                slack_range: 0.0,
                period: 1,
            },
            1,
            16.0,
            16.0,
            Some(SlaterData {
                witness: alloc::vec![0.0],
                margin: 1.0,
            }),
            64,
            0,
        )
        .unwrap();
        let sol = best_fixed_common_subset(&spec, &seg(-1.0, 1.0), 64).unwrap();
        assert!(sol.x_star[0].abs() <= 2.1e-3);
        assert!((sol.objective_avg - 1.0).abs() <= 1e-5);
    }

    #[test]
    fn infeasible_subset_is_reported() {
        let spec = invariant_1d(
            FunctionSpec::Quadratic {
                center: alloc::vec![0.0],
            },
            alloc::vec![FunctionSpec::Affine {
                coeffs: alloc::vec![0.0],
                offset: -0.5
            }],
        );
        match best_fixed_common_subset(&spec, &seg(-1.0, 1.0), 64) {
            Err(Error::Infeasible { residual }) => assert!((residual - 0.5).abs() < 1e-12),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    fn model2_1d(seed: u64) -> ScenarioSpec {
        ScenarioSpec::new(
            ScenarioFamily::Model2Iid {
                objective_center: alloc::vec![0.0],
                objective_dir: alloc::vec![1.0],
                constraint_dirs: alloc::vec![alloc::vec![1.0]],
                constraint_offsets: alloc::vec![0.0],
                constraint_omega_scale: alloc::vec![1.0],
                omega_lo: 0.0,
                omega_hi: 1.0,
            },
            1,
            4.0,
            4.0,
            Some(SlaterData {
                witness: alloc::vec![-1.0],
                margin: 1.0,
            }),
            1024,
            seed,
        )
        .unwrap()
    }

    #[test]
    fn expected_oracle_finds_the_boundary_optimum() {
        // E[g](x) = x − 0.5, E[f](x) = (x−0.5)² + 1/12: x* = 0.5, f* = 1/12.
        let spec = model2_1d(3);
        let sol = best_fixed_expected(&spec, &seg(-1.0, 1.0), 10_000).unwrap();
        assert!((sol.x_star[0] - 0.5).abs() <= 1e-3);
        let f_star = sol.f_star.unwrap();
        assert!((f_star - 1.0 / 12.0).abs() <= 1e-3, "f* = {f_star}");
    }

    #[test]
    fn model1_expected_oracle_respects_mean_constraint() {
        // E[g](x) = x − 0.5 on [−1,1] with objective center 0.8: clipped.
        let spec = ScenarioSpec::new(
            ScenarioFamily::Model1Iid {
                objective_centers: alloc::vec![alloc::vec![0.8]],
                constraint_dirs: alloc::vec![alloc::vec![1.0]],
                omega_lo: alloc::vec![0.0],
                omega_hi: alloc::vec![1.0],
            },
            1,
            4.0,
            4.0,
            None,
            1024,
            9,
        )
        .unwrap();
        let sol = best_fixed_expected(&spec, &seg(-1.0, 1.0), 10_000).unwrap();
        // The feasibility slack is 3 Monte Carlo standard errors, so the
        // optimizer may sit that far past the mean constraint boundary.
        assert!(
            (sol.x_star[0] - 0.5).abs() <= sol.tolerance + 2.1e-3,
            "x* = {}",
            sol.x_star[0]
        );
        assert!(sol.f_star.is_none());
    }

    #[test]
    fn expected_oracle_rejects_deterministic_families() {
        let spec = invariant_1d(
            FunctionSpec::Quadratic {
                center: alloc::vec![0.0],
            },
            alloc::vec![],
        );
        assert!(best_fixed_expected(&spec, &seg(-1.0, 1.0), 100).is_err());
    }

    #[test]
    fn grid_and_subgradient_paths_agree_in_2d() {
        let spec = ScenarioSpec::new(
            ScenarioFamily::Model2Iid {
                objective_center: alloc::vec![0.2, -0.1],
                objective_dir: alloc::vec![1.0, 0.5],
                constraint_dirs: alloc::vec![alloc::vec![1.0, 1.0]],
                constraint_offsets: alloc::vec![0.4],
                constraint_omega_scale: alloc::vec![1.0],
                omega_lo: 0.0,
                omega_hi: 1.0,
            },
            2,
            16.0,
            16.0,
            None,
            1024,
            17,
        )
        .unwrap();
        let set = DecisionSet::hyperbox(alloc::vec![-1.0, -1.0], alloc::vec![1.0, 1.0]).unwrap();
        let grid = best_fixed_expected_impl(&spec, &set, 10_000, false).unwrap();
        let sub = best_fixed_expected_impl(&spec, &set, 10_000, true).unwrap();
        assert_eq!(grid.method, OracleMethod::Grid);
        assert_eq!(sub.method, OracleMethod::OfflineSubgradient);
        let resolution = 1e-3 * set.diameter();
        assert!(crate::linalg::dist(&grid.x_star, &sub.x_star) <= 10.0 * resolution);
        assert!((grid.objective_avg - sub.objective_avg).abs() <= 1e-4);
    }

    #[test]
    fn three_dimensional_instances_use_the_subgradient_path() {
        // min ‖x − 0.8·1‖² over [−1,1]³ subject to Σx ≤ 1.5: the optimum
        // projects the center onto the plane, x* = 0.5·1 with value 0.27.
        let spec = ScenarioSpec::new(
            ScenarioFamily::TimeInvariant {
                objective: FunctionSpec::Quadratic {
                    center: alloc::vec![0.8, 0.8, 0.8],
                },
                constraints: alloc::vec![FunctionSpec::Affine {
                    coeffs: alloc::vec![1.0, 1.0, 1.0],
                    offset: 1.5,
                }],
            },
            3,
            16.0,
            8.0,
            None,
            16,
            0,
        )
        .unwrap();
        let set = DecisionSet::hyperbox(alloc::vec![-1.0; 3], alloc::vec![1.0; 3]).unwrap();
        let sol = best_fixed_common_subset(&spec, &set, 16).unwrap();
        assert_eq!(sol.method, OracleMethod::OfflineSubgradient);
        for xi in &sol.x_star {
            assert!((xi - 0.5).abs() <= 1e-3, "x* = {:?}", sol.x_star);
        }
        assert!((sol.objective_avg - 0.27).abs() <= 1e-3);
        assert!(sol.feasibility_residual <= sol.tolerance);
    }

    #[test]
    fn oracle_beats_random_feasible_points() {
        let spec = model2_1d(5);
        let set = seg(-1.0, 1.0);
        let sol = best_fixed_expected(&spec, &set, 10_000).unwrap();
        for s in 0..100u64 {
            let x = set.sample(derive_seed(40, s));
            let feasible = spec.expected_constraint(0, &x).unwrap() <= 0.0;
            if feasible {
                let v = spec.expected_objective(&x).unwrap();
                assert!(sol.objective_avg <= v + sol.tolerance.max(1e-5));
            }
        }
    }

    #[test]
    fn grid_minimize_matches_projection() {
        // min ‖x − y‖² over the set IS the projection; check agreement.
        let set = DecisionSet::hyperbox(alloc::vec![0.0, 0.0], alloc::vec![1.0, 1.0]).unwrap();
        let y = [1.4, -0.2];
        let (xg, _) = grid_minimize(&set, 1e-3 * set.diameter(), |x| {
            crate::linalg::dist_sq(x, &y)
        })
        .unwrap();
        let p = set.project(&y).unwrap();
        assert!(crate::linalg::dist(&xg, &p) <= 2e-3 * set.diameter());
    }

    #[test]
    fn residue_counts_partition_the_horizon() {
        for (t, p) in [(10u64, 4u64), (17, 5), (64, 8), (3, 7)] {
            let total: u64 = (0..p).map(|r| residue_count(r, t, p)).sum();
            assert_eq!(total, t);
        }
    }
}
