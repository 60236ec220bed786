//! Declarative run configuration.
//!
//! A single TOML document specifies the decision set, the scenario family
//! and its parameters, the declared constants, the solver variant with its
//! parameters, the horizon, and the seed. Parsing errors carry the field
//! path they refer to.

use serde::Deserialize;

use ocoq_core::bounds::ProblemConstants;
use ocoq_core::geometry::{DecisionSet, Halfspace};
use ocoq_core::solver::AlgorithmParams;
use ocoq_core::streams::{FunctionSpec, ScenarioFamily, ScenarioSpec, SlaterData};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub horizon: u64,
    pub set: SetConfig,
    pub scenario: ScenarioConfig,
    pub constants: ConstantsConfig,
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SetConfig {
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Polytope {
        lower: Vec<f64>,
        upper: Vec<f64>,
        halfspaces: Vec<HalfspaceConfig>,
        witness: Vec<f64>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfspaceConfig {
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionConfig {
    Affine { coeffs: Vec<f64>, offset: f64 },
    Quadratic { center: Vec<f64> },
    AbsoluteValue { center: Vec<f64> },
}

impl FunctionConfig {
    fn build(&self) -> FunctionSpec {
        match self {
            FunctionConfig::Affine { coeffs, offset } => FunctionSpec::Affine {
                coeffs: coeffs.clone(),
                offset: *offset,
            },
            FunctionConfig::Quadratic { center } => FunctionSpec::Quadratic {
                center: center.clone(),
            },
            FunctionConfig::AbsoluteValue { center } => FunctionSpec::AbsoluteValue {
                center: center.clone(),
            },
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScenarioConfig {
    TimeInvariant {
        objective: FunctionConfig,
        #[serde(default)]
        constraints: Vec<FunctionConfig>,
    },
    AdversarialCommonSubset {
        objective_centers: Vec<Vec<f64>>,
        num_constraints: usize,
        direction_bound: f64,
        slack_range: f64,
        period: u64,
    },
    Model1Iid {
        objective_centers: Vec<Vec<f64>>,
        constraint_dirs: Vec<Vec<f64>>,
        omega_lo: Vec<f64>,
        omega_hi: Vec<f64>,
    },
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

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsConfig {
    /// Universal value bound F.
    pub value_bound: f64,
    /// Subgradient norm bound G.
    pub subgradient_bound: f64,
    /// Diameter D; defaults to the set's declared diameter.
    pub diameter: Option<f64>,
    pub slater: Option<SlaterConfig>,
    /// Lagrange multipliers for the fully i.i.d. model, when known.
    pub mu: Option<Vec<f64>>,
    /// Offline optimal expected objective, when known.
    pub f_star: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlaterConfig {
    pub witness: Vec<f64>,
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverVariant {
    Dpp,
    Zinkevich,
    DppDoubling,
}

impl SolverVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverVariant::Dpp => "dpp",
            SolverVariant::Zinkevich => "zinkevich",
            SolverVariant::DppDoubling => "dpp-doubling",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "dpp" => Some(SolverVariant::Dpp),
            "zinkevich" => Some(SolverVariant::Zinkevich),
            "dpp-doubling" => Some(SolverVariant::DppDoubling),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub variant: SolverVariant,
    pub x0: Vec<f64>,
    /// Accuracy target; derives V = ⌈1/ε⌉, α = V² (and the baseline step).
    pub epsilon: Option<f64>,
    pub v: Option<f64>,
    pub alpha: Option<f64>,
    /// Fixed step for the subgradient baseline; defaults to epsilon.
    pub step: Option<f64>,
}

/// Everything the harness needs to execute a run, built from a parsed
/// config.
#[derive(Debug)]
pub struct BuiltConfig {
    pub config: RunConfig,
    pub config_text: String,
    pub set: DecisionSet,
    pub spec: ScenarioSpec,
    pub constants: ProblemConstants,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig> {
        toml::from_str(text).map_err(|e| HarnessError::Config(format!("config parse: {e}")))
    }

    fn build_set(&self) -> Result<DecisionSet> {
        let set = match &self.set {
            SetConfig::Box { lower, upper } => DecisionSet::hyperbox(lower.clone(), upper.clone()),
            SetConfig::Ball { center, radius } => DecisionSet::ball(center.clone(), *radius),
            SetConfig::Polytope {
                lower,
                upper,
                halfspaces,
                witness,
            } => {
                let hs = halfspaces
                    .iter()
                    .map(|h| Halfspace::new(h.normal.clone(), h.offset))
                    .collect::<ocoq_core::Result<Vec<_>>>()
                    .map_err(|e| HarnessError::config("set.halfspaces", e))?;
                DecisionSet::polytope(lower.clone(), upper.clone(), hs, witness.clone())
            }
        };
        set.map_err(|e| HarnessError::config("set", e))
    }

    fn build_family(&self) -> ScenarioFamily {
        match &self.scenario {
            ScenarioConfig::TimeInvariant {
                objective,
                constraints,
            } => ScenarioFamily::TimeInvariant {
                objective: objective.build(),
                constraints: constraints.iter().map(FunctionConfig::build).collect(),
            },
            ScenarioConfig::AdversarialCommonSubset {
                objective_centers,
                num_constraints,
                direction_bound,
                slack_range,
                period,
            } => ScenarioFamily::AdversarialCommonSubset {
                objective_centers: objective_centers.clone(),
                num_constraints: *num_constraints,
                direction_bound: *direction_bound,
                slack_range: *slack_range,
                period: *period,
            },
            ScenarioConfig::Model1Iid {
                objective_centers,
                constraint_dirs,
                omega_lo,
                omega_hi,
            } => ScenarioFamily::Model1Iid {
                objective_centers: objective_centers.clone(),
                constraint_dirs: constraint_dirs.clone(),
                omega_lo: omega_lo.clone(),
                omega_hi: omega_hi.clone(),
            },
            ScenarioConfig::Model2Iid {
                objective_center,
                objective_dir,
                constraint_dirs,
                constraint_offsets,
                constraint_omega_scale,
                omega_lo,
                omega_hi,
            } => ScenarioFamily::Model2Iid {
                objective_center: objective_center.clone(),
                objective_dir: objective_dir.clone(),
                constraint_dirs: constraint_dirs.clone(),
                constraint_offsets: constraint_offsets.clone(),
                constraint_omega_scale: constraint_omega_scale.clone(),
                omega_lo: *omega_lo,
                omega_hi: *omega_hi,
            },
        }
    }

    /// Builds the scenario with an overridden horizon (used by sweeps).
    pub fn build_spec_with_horizon(&self, set: &DecisionSet, horizon: u64) -> Result<ScenarioSpec> {
        let slater = self.constants.slater.as_ref().map(|s| SlaterData {
            witness: s.witness.clone(),
            margin: s.margin,
        });
        ScenarioSpec::new(
            self.build_family(),
            set.dimension(),
            self.constants.value_bound,
            self.constants.subgradient_bound,
            slater,
            horizon,
            self.seed,
        )
        .map_err(|e| HarnessError::config("scenario", e))
    }

    fn build_constants(&self, set: &DecisionSet, spec: &ScenarioSpec) -> Result<ProblemConstants> {
        let diameter = self.constants.diameter.unwrap_or_else(|| set.diameter());
        let mut c = ProblemConstants::new(
            diameter,
            self.constants.value_bound,
            self.constants.subgradient_bound,
            spec.num_constraints(),
        )
        .map_err(|e| HarnessError::config("constants", e))?;
        if let Some(s) = &self.constants.slater {
            c = c
                .with_slater_margin(s.margin)
                .map_err(|e| HarnessError::config("constants.slater.margin", e))?;
        }
        if let Some(mu) = &self.constants.mu {
            c = c
                .with_lagrange_multipliers(mu.clone())
                .map_err(|e| HarnessError::config("constants.mu", e))?;
        }
        if let Some(f_star) = self.constants.f_star {
            c = c.with_optimal_value(f_star);
        }
        Ok(c)
    }

    /// Resolved solver parameters for the queue-based variants.
    pub fn solver_params(&self) -> Result<AlgorithmParams> {
        if let Some(eps) = self.solver.epsilon {
            if self.solver.v.is_some() || self.solver.alpha.is_some() {
                return Err(HarnessError::Config(
                    "solver: give either epsilon or explicit v/alpha, not both".into(),
                ));
            }
            return AlgorithmParams::from_epsilon(eps)
                .map_err(|e| HarnessError::config("solver.epsilon", e));
        }
        match (self.solver.v, self.solver.alpha) {
            (Some(v), Some(alpha)) => {
                AlgorithmParams::new(v, alpha).map_err(|e| HarnessError::config("solver", e))
            }
            _ => Err(HarnessError::Config(
                "solver: need epsilon or both v and alpha".into(),
            )),
        }
    }

    /// Fixed step for the subgradient baseline.
    pub fn baseline_step(&self) -> Result<f64> {
        let step =
            self.solver.step.or(self.solver.epsilon).ok_or_else(|| {
                HarnessError::Config("solver: baseline needs step or epsilon".into())
            })?;
        if !(step > 0.0) {
            return Err(HarnessError::Config(format!(
                "solver.step: must be positive, got {step}"
            )));
        }
        Ok(step)
    }
}

/// Parses and cross-validates a config document.
pub fn build(text: &str) -> Result<BuiltConfig> {
    let config = RunConfig::parse(text)?;
    let set = config.build_set()?;
    let spec = config.build_spec_with_horizon(&set, config.horizon)?;
    let constants = config.build_constants(&set, &spec)?;
    if config.solver.x0.len() != set.dimension() {
        return Err(HarnessError::config(
            "solver.x0",
            format!(
                "expected dimension {}, got {}",
                set.dimension(),
                config.solver.x0.len()
            ),
        ));
    }
    if !set
        .contains(&config.solver.x0, 1e-9)
        .map_err(|e| HarnessError::config("solver.x0", e))?
    {
        return Err(HarnessError::Config(
            "solver.x0: not a member of the set".into(),
        ));
    }
    match config.solver.variant {
        SolverVariant::Dpp | SolverVariant::Zinkevich => {}
        SolverVariant::DppDoubling => {
            if config.horizon < 2 {
                return Err(HarnessError::Config(
                    "horizon: doubling runs need at least 2 slots".into(),
                ));
            }
        }
    }
    // Parameter resolution is variant-specific; surface problems now.
    match config.solver.variant {
        SolverVariant::Dpp => {
            config.solver_params()?;
        }
        SolverVariant::Zinkevich => {
            config.baseline_step()?;
        }
        SolverVariant::DppDoubling => {}
    }
    Ok(BuiltConfig {
        config,
        config_text: text.to_string(),
        set,
        spec,
        constants,
    })
}

pub fn build_from_path(path: &std::path::Path) -> Result<BuiltConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })?;
    build(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
seed = 7
horizon = 16

[set]
kind = "box"
lower = [0.0]
upper = [1.0]

[scenario]
family = "time-invariant"

[scenario.objective]
kind = "affine"
coeffs = [1.0]
offset = 0.0

[[scenario.constraints]]
kind = "affine"
coeffs = [-1.0]
offset = -0.5

[constants]
value_bound = 1.5
subgradient_bound = 1.0

[constants.slater]
witness = [1.0]
margin = 0.5

[solver]
variant = "dpp"
v = 1.0
alpha = 1.0
x0 = [0.0]
"#;

    #[test]
    fn minimal_config_builds() {
        let built = build(MINIMAL).unwrap();
        assert_eq!(built.set.dimension(), 1);
        assert_eq!(built.spec.num_constraints(), 1);
        assert_eq!(built.constants.slater_margin, Some(0.5));
        let params = built.config.solver_params().unwrap();
        assert_eq!((params.v, params.alpha), (1.0, 1.0));
    }

    #[test]
    fn x0_membership_is_checked() {
        let bad = MINIMAL.replace("x0 = [0.0]", "x0 = [2.0]");
        let err = build(&bad).unwrap_err();
        assert!(err.to_string().contains("x0"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_fields_are_rejected_with_a_path() {
        let bad = MINIMAL.replace("seed = 7", "seed = 7\ntypo_field = 1");
        assert!(build(&bad).is_err());
    }

    #[test]
    fn epsilon_conflicts_with_explicit_params() {
        let bad = MINIMAL.replace("v = 1.0", "v = 1.0\nepsilon = 0.5");
        let err = build(&bad).unwrap_err();
        assert!(err.to_string().contains("not both"), "{err}");
    }
}
