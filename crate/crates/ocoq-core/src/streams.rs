//! Per-slot objective and constraint function streams.
//!
//! A scenario produces, for each slot `t`, one convex objective and `k`
//! convex constraint functions with value and subgradient evaluation. All
//! randomness is counter-based: the draw behind slot `t` is a pure function
//! of `(seed, t)`, so any slot can be regenerated bit-identically without
//! storing the stream.
//!
//! Four families are built in:
//! * `TimeInvariant` — the same functions every slot.
//! * `AdversarialCommonSubset` — deterministic time-varying affine
//!   constraints constructed to keep a declared Slater point strictly
//!   feasible every slot, with a cycling quadratic objective.
//! * `Model1Iid` — constraints driven by i.i.d. uniform draws while the
//!   objective follows an arbitrary deterministic schedule.
//! * `Model2Iid` — one i.i.d. draw per slot drives the objective and every
//!   constraint.

use alloc::format;
use alloc::vec::Vec;

use crate::fp;
use crate::geometry::DecisionSet;
use crate::linalg::{dist_sq, dot, norm, norm_sq};
use crate::rng::{derive_seed, SlotRng};
use crate::{Error, Result};

/// A convex function given by explicit parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSpec {
    /// `coeffs · x − offset`.
    Affine { coeffs: Vec<f64>, offset: f64 },
    /// `‖x − center‖²`.
    Quadratic { center: Vec<f64> },
    /// `Σ_i |x_i − center_i|`, nonsmooth on every axis through the center.
    AbsoluteValue { center: Vec<f64> },
}

impl FunctionSpec {
    pub fn dimension(&self) -> usize {
        match self {
            FunctionSpec::Affine { coeffs, .. } => coeffs.len(),
            FunctionSpec::Quadratic { center } | FunctionSpec::AbsoluteValue { center } => {
                center.len()
            }
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            FunctionSpec::Affine { coeffs, offset } => dot(coeffs, x) - offset,
            FunctionSpec::Quadratic { center } => dist_sq(x, center),
            FunctionSpec::AbsoluteValue { center } => {
                x.iter().zip(center).map(|(xi, ci)| fp::abs(xi - ci)).sum()
            }
        }
    }

    /// A deterministic subgradient choice. At the nonsmooth points of the
    /// absolute-value family the flat coordinates get 0, which is a valid
    /// subgradient and keeps runs reproducible.
    pub fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        match self {
            FunctionSpec::Affine { coeffs, .. } => coeffs.clone(),
            FunctionSpec::Quadratic { center } => x
                .iter()
                .zip(center)
                .map(|(xi, ci)| 2.0 * (xi - ci))
                .collect(),
            FunctionSpec::AbsoluteValue { center } => x
                .iter()
                .zip(center)
                .map(|(xi, ci)| {
                    if xi > ci {
                        1.0
                    } else if xi < ci {
                        -1.0
                    } else {
                        0.0
                    }
                })
                .collect(),
        }
    }
}

/// One slot's objective and constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotFunctions {
    pub slot: u64,
    objective: FunctionSpec,
    constraints: Vec<FunctionSpec>,
}

impl SlotFunctions {
    pub fn new(slot: u64, objective: FunctionSpec, constraints: Vec<FunctionSpec>) -> Self {
        SlotFunctions {
            slot,
            objective,
            constraints,
        }
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// The same functions filed under a different slot index.
    pub fn relabeled(mut self, slot: u64) -> Self {
        self.slot = slot;
        self
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.value(x)
    }

    pub fn objective_subgradient(&self, x: &[f64]) -> Vec<f64> {
        self.objective.subgradient(x)
    }

    pub fn constraint_value(&self, i: usize, x: &[f64]) -> f64 {
        self.constraints[i].value(x)
    }

    pub fn constraint_subgradient(&self, i: usize, x: &[f64]) -> Vec<f64> {
        self.constraints[i].subgradient(x)
    }

    pub fn constraint_values(&self, x: &[f64]) -> Vec<f64> {
        self.constraints.iter().map(|g| g.value(x)).collect()
    }
}

/// Slater data: a witness `s` with `g_{t,i}(s) ≤ −margin` for all `t, i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlaterData {
    pub witness: Vec<f64>,
    pub margin: f64,
}

/// Scenario family with its generator parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioFamily {
    TimeInvariant {
        objective: FunctionSpec,
        constraints: Vec<FunctionSpec>,
    },
    /// Affine constraints redrawn per slot (cycling with `period`) whose
    /// offsets are constructed so the Slater witness keeps margin plus a
    /// random extra slack; quadratic objective centers cycle through the
    /// given schedule.
    AdversarialCommonSubset {
        objective_centers: Vec<Vec<f64>>,
        num_constraints: usize,
        direction_bound: f64,
        slack_range: f64,
        period: u64,
    },
    /// `g_{t,i}(x) = dirs_i · x − ω_{t,i}` with `ω_{t,i} ~ U[lo_i, hi_i)`
    /// i.i.d. across slots; quadratic objective centers follow the
    /// deterministic schedule.
    Model1Iid {
        objective_centers: Vec<Vec<f64>>,
        constraint_dirs: Vec<Vec<f64>>,
        omega_lo: Vec<f64>,
        omega_hi: Vec<f64>,
    },
    /// One scalar draw `ω_t ~ U[lo, hi)` per slot drives everything:
    /// objective `‖x − (center + ω_t·dir)‖²`, constraints
    /// `dirs_i · x − (offset_i + scale_i·ω_t)`.
    Model2Iid {
        objective_center: Vec<f64>,
        objective_dir: Vec<f64>,
        constraint_dirs: Vec<Vec<f64>>,
        constraint_offsets: Vec<f64>,
        constraint_omega_scale: Vec<f64>,
        omega_lo: f64,
        omega_hi: f64,
    },
}

/// A fully specified scenario: family, declared constants, Slater data,
/// horizon, and seed. Immutable and freely shareable.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub family: ScenarioFamily,
    pub dimension: usize,
    /// Declared universal bound `F` on `|f_t|` and `|g_{t,i}|` over the set.
    pub value_bound: f64,
    /// Declared bound `G` on subgradient norms over the set.
    pub subgradient_bound: f64,
    pub slater: Option<SlaterData>,
    pub horizon: u64,
    pub seed: u64,
}

/// Empirical check of the declared constants over sampled `(t, x)` pairs.
/// Violations are reported, never thrown.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantsReport {
    pub samples: u64,
    pub max_abs_value: f64,
    pub max_subgradient_norm: f64,
    pub value_flag: bool,
    pub subgradient_flag: bool,
    /// Worst (largest) `g_{t,i}(s)` seen across sampled slots, when Slater
    /// data is declared.
    pub slater_worst: Option<f64>,
    pub slater_flag: bool,
}

impl ScenarioSpec {
    pub fn new(
        family: ScenarioFamily,
        dimension: usize,
        value_bound: f64,
        subgradient_bound: f64,
        slater: Option<SlaterData>,
        horizon: u64,
        seed: u64,
    ) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        if !(value_bound >= 0.0) || !(subgradient_bound >= 0.0) {
            return Err(Error::InvalidInput(
                "bounds F and G must be nonnegative".into(),
            ));
        }
        if let Some(s) = &slater {
            if s.witness.len() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    found: s.witness.len(),
                });
            }
            if !(s.margin > 0.0) {
                return Err(Error::InvalidInput("Slater margin must be positive".into()));
            }
        }
        let spec = ScenarioSpec {
            family,
            dimension,
            value_bound,
            subgradient_bound,
            slater,
            horizon,
            seed,
        };
        spec.validate_family()?;
        Ok(spec)
    }

    fn validate_family(&self) -> Result<()> {
        let n = self.dimension;
        let check = |d: usize| -> Result<()> {
            if d != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: d,
                });
            }
            Ok(())
        };
        match &self.family {
            ScenarioFamily::TimeInvariant {
                objective,
                constraints,
            } => {
                check(objective.dimension())?;
                for g in constraints {
                    check(g.dimension())?;
                }
            }
            ScenarioFamily::AdversarialCommonSubset {
                objective_centers,
                num_constraints,
                direction_bound,
                slack_range,
                period,
            } => {
                if self.slater.is_none() {
                    return Err(Error::MissingConstant("slater"));
                }
                if objective_centers.is_empty() || *num_constraints == 0 {
                    return Err(Error::InvalidInput(
                        "adversarial family needs objective centers and constraints".into(),
                    ));
                }
                for c in objective_centers {
                    check(c.len())?;
                }
                if !(*direction_bound > 0.0) || *slack_range < 0.0 || *period == 0 {
                    return Err(Error::InvalidInput(
                        "adversarial family parameters out of range".into(),
                    ));
                }
            }
            ScenarioFamily::Model1Iid {
                objective_centers,
                constraint_dirs,
                omega_lo,
                omega_hi,
            } => {
                if objective_centers.is_empty() {
                    return Err(Error::InvalidInput("model1 needs objective centers".into()));
                }
                for c in objective_centers {
                    check(c.len())?;
                }
                for d in constraint_dirs {
                    check(d.len())?;
                }
                let k = constraint_dirs.len();
                if omega_lo.len() != k || omega_hi.len() != k {
                    return Err(Error::InvalidInput(
                        "model1 omega ranges must match k".into(),
                    ));
                }
                for (lo, hi) in omega_lo.iter().zip(omega_hi) {
                    if !(lo <= hi) {
                        return Err(Error::InvalidInput(format!(
                            "omega range [{lo}, {hi}] empty"
                        )));
                    }
                }
            }
            ScenarioFamily::Model2Iid {
                objective_center,
                objective_dir,
                constraint_dirs,
                constraint_offsets,
                constraint_omega_scale,
                omega_lo,
                omega_hi,
            } => {
                check(objective_center.len())?;
                check(objective_dir.len())?;
                for d in constraint_dirs {
                    check(d.len())?;
                }
                let k = constraint_dirs.len();
                if constraint_offsets.len() != k || constraint_omega_scale.len() != k {
                    return Err(Error::InvalidInput(
                        "model2 constraint parameter lengths must match".into(),
                    ));
                }
                if !(omega_lo <= omega_hi) {
                    return Err(Error::InvalidInput(format!(
                        "omega range [{omega_lo}, {omega_hi}] empty"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn num_constraints(&self) -> usize {
        match &self.family {
            ScenarioFamily::TimeInvariant { constraints, .. } => constraints.len(),
            ScenarioFamily::AdversarialCommonSubset {
                num_constraints, ..
            } => *num_constraints,
            ScenarioFamily::Model1Iid {
                constraint_dirs, ..
            }
            | ScenarioFamily::Model2Iid {
                constraint_dirs, ..
            } => constraint_dirs.len(),
        }
    }

    /// `Some(p)` when `g_{t+p,i} ≡ g_{t,i}` for all slots, so worst-case
    /// aggregates over the horizon only need the first `p` slots.
    pub fn constraint_period(&self) -> Option<u64> {
        match &self.family {
            ScenarioFamily::TimeInvariant { .. } => Some(1),
            ScenarioFamily::AdversarialCommonSubset { period, .. } => Some(*period),
            _ => None,
        }
    }

    /// `Some(p)` when `f_{t+p} ≡ f_t` for all slots.
    pub fn objective_period(&self) -> Option<u64> {
        match &self.family {
            ScenarioFamily::TimeInvariant { .. } => Some(1),
            ScenarioFamily::AdversarialCommonSubset {
                objective_centers, ..
            }
            | ScenarioFamily::Model1Iid {
                objective_centers, ..
            } => Some(objective_centers.len() as u64),
            ScenarioFamily::Model2Iid { .. } => None,
        }
    }

    fn omega_model2(&self, seed: u64, t: u64) -> f64 {
        match &self.family {
            ScenarioFamily::Model2Iid {
                omega_lo, omega_hi, ..
            } => SlotRng::at(seed, t, 0).next_range(*omega_lo, *omega_hi),
            _ => unreachable!("omega_model2 outside model2"),
        }
    }

    /// Generates slot `t`. Deterministic: regenerating the same slot yields
    /// bit-identical function parameters.
    pub fn generate_slot(&self, t: u64) -> Result<SlotFunctions> {
        if t >= self.horizon {
            return Err(Error::SlotOutOfRange {
                slot: t,
                horizon: self.horizon,
            });
        }
        match &self.family {
            ScenarioFamily::TimeInvariant {
                objective,
                constraints,
            } => Ok(SlotFunctions::new(
                t,
                objective.clone(),
                constraints.clone(),
            )),
            ScenarioFamily::AdversarialCommonSubset {
                objective_centers,
                num_constraints,
                direction_bound,
                slack_range,
                period,
            } => {
                let slater = self.slater.as_ref().expect("validated at construction");
                let objective = FunctionSpec::Quadratic {
                    center: objective_centers[(t % objective_centers.len() as u64) as usize]
                        .clone(),
                };
                let r = t % period;
                let mut constraints = Vec::with_capacity(*num_constraints);
                for i in 0..*num_constraints {
                    let mut rng = SlotRng::at(self.seed, r, i as u64 + 1);
                    let coeffs: Vec<f64> = (0..self.dimension)
                        .map(|_| rng.next_range(-*direction_bound, *direction_bound))
                        .collect();
                    let slack = rng.next_range(0.0, *slack_range);
                    // Offset forces g(s) = −margin − slack ≤ −margin.
                    let offset = dot(&coeffs, &slater.witness) + slater.margin + slack;
                    constraints.push(FunctionSpec::Affine { coeffs, offset });
                }
                Ok(SlotFunctions::new(t, objective, constraints))
            }
            ScenarioFamily::Model1Iid {
                objective_centers,
                constraint_dirs,
                omega_lo,
                omega_hi,
            } => {
                let objective = FunctionSpec::Quadratic {
                    center: objective_centers[(t % objective_centers.len() as u64) as usize]
                        .clone(),
                };
                let constraints = constraint_dirs
                    .iter()
                    .enumerate()
                    .map(|(i, dir)| {
                        let omega = SlotRng::at(self.seed, t, i as u64 + 1)
                            .next_range(omega_lo[i], omega_hi[i]);
                        FunctionSpec::Affine {
                            coeffs: dir.clone(),
                            offset: omega,
                        }
                    })
                    .collect();
                Ok(SlotFunctions::new(t, objective, constraints))
            }
            ScenarioFamily::Model2Iid {
                objective_center,
                objective_dir,
                constraint_dirs,
                constraint_offsets,
                constraint_omega_scale,
                ..
            } => {
                let omega = self.omega_model2(self.seed, t);
                let center = objective_center
                    .iter()
                    .zip(objective_dir)
                    .map(|(c, d)| c + omega * d)
                    .collect();
                let constraints = constraint_dirs
                    .iter()
                    .enumerate()
                    .map(|(i, dir)| FunctionSpec::Affine {
                        coeffs: dir.clone(),
                        offset: constraint_offsets[i] + constraint_omega_scale[i] * omega,
                    })
                    .collect();
                Ok(SlotFunctions::new(
                    t,
                    FunctionSpec::Quadratic { center },
                    constraints,
                ))
            }
        }
    }

    /// Closed-form `E[f_t(x)]` for families where it is slot-invariant.
    pub fn expected_objective(&self, x: &[f64]) -> Option<f64> {
        match &self.family {
            ScenarioFamily::TimeInvariant { objective, .. } => Some(objective.value(x)),
            ScenarioFamily::Model2Iid {
                objective_center,
                objective_dir,
                omega_lo,
                omega_hi,
                ..
            } => {
                // E‖x − c − ωu‖² = ‖x − c − E[ω]u‖² + Var(ω)‖u‖².
                let mean = 0.5 * (omega_lo + omega_hi);
                let var = (omega_hi - omega_lo) * (omega_hi - omega_lo) / 12.0;
                let shifted: Vec<f64> = x
                    .iter()
                    .zip(objective_center.iter().zip(objective_dir))
                    .map(|(xi, (ci, di))| xi - ci - mean * di)
                    .collect();
                Some(norm_sq(&shifted) + var * norm_sq(objective_dir))
            }
            _ => None,
        }
    }

    /// Closed-form `E[g_{t,i}(x)]` for stochastic families (slot-invariant).
    pub fn expected_constraint(&self, i: usize, x: &[f64]) -> Option<f64> {
        match &self.family {
            ScenarioFamily::TimeInvariant { constraints, .. } => {
                constraints.get(i).map(|g| g.value(x))
            }
            ScenarioFamily::Model1Iid {
                constraint_dirs,
                omega_lo,
                omega_hi,
                ..
            } => {
                let dir = constraint_dirs.get(i)?;
                Some(dot(dir, x) - 0.5 * (omega_lo[i] + omega_hi[i]))
            }
            ScenarioFamily::Model2Iid {
                constraint_dirs,
                constraint_offsets,
                constraint_omega_scale,
                omega_lo,
                omega_hi,
                ..
            } => {
                let dir = constraint_dirs.get(i)?;
                let mean = 0.5 * (omega_lo + omega_hi);
                Some(dot(dir, x) - constraint_offsets[i] - constraint_omega_scale[i] * mean)
            }
            ScenarioFamily::AdversarialCommonSubset { .. } => None,
        }
    }

    /// Monte Carlo estimate of `E[f_t(x)]` over fresh draws (Model 2 only;
    /// the other stochastic family has a deterministic objective).
    pub fn mc_expected_objective(&self, x: &[f64], draws: u64, seed: u64) -> Result<McEstimate> {
        match &self.family {
            ScenarioFamily::Model2Iid {
                objective_center,
                objective_dir,
                ..
            } => {
                let mc_seed = derive_seed(seed, 0x0b1);
                let mut sum = 0.0;
                let mut sum_sq = 0.0;
                for j in 0..draws {
                    let omega = self.omega_model2(mc_seed, j);
                    let shifted: Vec<f64> = x
                        .iter()
                        .zip(objective_center.iter().zip(objective_dir))
                        .map(|(xi, (ci, di))| xi - ci - omega * di)
                        .collect();
                    let v = norm_sq(&shifted);
                    sum += v;
                    sum_sq += v * v;
                }
                Ok(McEstimate::from_sums(sum, sum_sq, draws))
            }
            _ => Err(Error::InvalidInput(
                "Monte Carlo objective estimation needs the model2 family".into(),
            )),
        }
    }

    /// Monte Carlo estimate of `E[g_{t,i}(x)]` over fresh draws.
    pub fn mc_expected_constraint(
        &self,
        i: usize,
        x: &[f64],
        draws: u64,
        seed: u64,
    ) -> Result<McEstimate> {
        let mc_seed = derive_seed(seed, 0xc0 + i as u64);
        match &self.family {
            ScenarioFamily::Model1Iid {
                constraint_dirs,
                omega_lo,
                omega_hi,
                ..
            } => {
                let dir = &constraint_dirs[i];
                let base = dot(dir, x);
                let mut sum = 0.0;
                let mut sum_sq = 0.0;
                for j in 0..draws {
                    let omega =
                        SlotRng::at(mc_seed, j, i as u64 + 1).next_range(omega_lo[i], omega_hi[i]);
                    let v = base - omega;
                    sum += v;
                    sum_sq += v * v;
                }
                Ok(McEstimate::from_sums(sum, sum_sq, draws))
            }
            ScenarioFamily::Model2Iid {
                constraint_dirs,
                constraint_offsets,
                constraint_omega_scale,
                ..
            } => {
                let base = dot(&constraint_dirs[i], x);
                let mut sum = 0.0;
                let mut sum_sq = 0.0;
                for j in 0..draws {
                    let omega = self.omega_model2(mc_seed, j);
                    let v = base - constraint_offsets[i] - constraint_omega_scale[i] * omega;
                    sum += v;
                    sum_sq += v * v;
                }
                Ok(McEstimate::from_sums(sum, sum_sq, draws))
            }
            _ => Err(Error::InvalidInput(
                "Monte Carlo constraint estimation needs a stochastic family".into(),
            )),
        }
    }

    /// Samples `(t, x)` pairs and reports the empirical maxima of function
    /// values and subgradient norms against the declared `F` and `G`, plus
    /// the worst Slater margin when Slater data is declared.
    pub fn validate_constants(
        &self,
        set: &DecisionSet,
        samples: u64,
        seed: u64,
    ) -> Result<ConstantsReport> {
        if samples == 0 {
            return Err(Error::InvalidInput("need at least one sample".into()));
        }
        if self.horizon == 0 {
            return Ok(ConstantsReport {
                samples: 0,
                max_abs_value: 0.0,
                max_subgradient_norm: 0.0,
                value_flag: false,
                subgradient_flag: false,
                slater_worst: None,
                slater_flag: false,
            });
        }
        let mut max_abs_value = 0.0f64;
        let mut max_sub_norm = 0.0f64;
        let mut slater_worst = f64::NEG_INFINITY;
        let mut rng = SlotRng::at(seed, 0, 0x5a1);
        for s in 0..samples {
            let t = rng.next_u64() % self.horizon;
            let slot = self.generate_slot(t)?;
            let x = set.sample(derive_seed(seed, s));
            max_abs_value = max_abs_value.max(fp::abs(slot.objective_value(&x)));
            max_sub_norm = max_sub_norm.max(norm(&slot.objective_subgradient(&x)));
            for i in 0..slot.num_constraints() {
                max_abs_value = max_abs_value.max(fp::abs(slot.constraint_value(i, &x)));
                max_sub_norm = max_sub_norm.max(norm(&slot.constraint_subgradient(i, &x)));
                if let Some(sl) = &self.slater {
                    slater_worst = slater_worst.max(slot.constraint_value(i, &sl.witness));
                }
            }
        }
        let slater_flag = match &self.slater {
            Some(sl) => slater_worst > -sl.margin + 1e-9,
            None => false,
        };
        Ok(ConstantsReport {
            samples,
            max_abs_value,
            max_subgradient_norm: max_sub_norm,
            value_flag: max_abs_value > self.value_bound,
            subgradient_flag: max_sub_norm > self.subgradient_bound,
            slater_worst: self.slater.as_ref().map(|_| slater_worst),
            slater_flag,
        })
    }
}

/// Mean and standard error of a Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub draws: u64,
}

impl McEstimate {
    fn from_sums(sum: f64, sum_sq: f64, draws: u64) -> Self {
        let n = draws as f64;
        let mean = sum / n;
        let var = (sum_sq / n - mean * mean).max(0.0);
        McEstimate {
            mean,
            std_error: fp::sqrt(var / n),
            draws,
        }
    }
}
