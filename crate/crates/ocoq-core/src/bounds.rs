//! Closed-form constants and performance envelopes.
//!
//! Every function here is a pure transcription of a formula in the declared
//! problem constants; the verifier compares these right-hand sides against
//! empirical traces. Envelope names describe the quantity they bound:
//!
//! * `objective_gap_envelope` — slack of the time-average objective versus
//!   any fixed point of the common feasible subset.
//! * `queue_norm_envelope` — uniform bound `θV` on `‖Q(t)‖` under a Slater
//!   condition (V must be a positive integer for the bound to hold).
//! * `constraint_avg_envelope` — time-average constraint bound valid when
//!   `α = V²`.
//! * `iid_*` — expected-value counterparts for the stochastic models.

use alloc::vec::Vec;

use crate::fp;
use crate::{Error, Result};

/// Declared problem constants. `D`, `F`, `G` and `k` are always needed;
/// the Slater margin, Lagrange multipliers, and the offline optimal value
/// only gate the envelopes that use them.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConstants {
    /// Diameter `D` of the decision set.
    pub diameter: f64,
    /// Universal bound `F` on `|f_t|` and `|g_{t,i}|`.
    pub value_bound: f64,
    /// Bound `G` on subgradient norms.
    pub subgradient_bound: f64,
    /// Number of constraints `k`.
    pub num_constraints: usize,
    /// Slater margin `η`, when a Slater point is declared.
    pub slater_margin: Option<f64>,
    /// Lagrange multipliers `μ` for the fully i.i.d. model, when known.
    pub lagrange_multipliers: Option<Vec<f64>>,
    /// Offline optimal expected objective `f*`, when supplied by an oracle.
    pub optimal_value: Option<f64>,
}

impl ProblemConstants {
    pub fn new(
        diameter: f64,
        value_bound: f64,
        subgradient_bound: f64,
        num_constraints: usize,
    ) -> Result<Self> {
        if !(diameter >= 0.0) || !(value_bound >= 0.0) || !(subgradient_bound >= 0.0) {
            return Err(Error::InvalidInput(
                "constants D, F, G must be nonnegative".into(),
            ));
        }
        Ok(ProblemConstants {
            diameter,
            value_bound,
            subgradient_bound,
            num_constraints,
            slater_margin: None,
            lagrange_multipliers: None,
            optimal_value: None,
        })
    }

    pub fn with_slater_margin(mut self, eta: f64) -> Result<Self> {
        if !(eta > 0.0) {
            return Err(Error::InvalidInput("Slater margin must be positive".into()));
        }
        self.slater_margin = Some(eta);
        Ok(self)
    }

    pub fn with_lagrange_multipliers(mut self, mu: Vec<f64>) -> Result<Self> {
        if mu.iter().any(|m| !(*m >= 0.0)) {
            return Err(Error::InvalidInput(
                "Lagrange multipliers must be nonnegative".into(),
            ));
        }
        self.lagrange_multipliers = Some(mu);
        Ok(self)
    }

    pub fn with_optimal_value(mut self, f_star: f64) -> Self {
        self.optimal_value = Some(f_star);
        self
    }

    fn eta(&self) -> Result<f64> {
        self.slater_margin
            .ok_or(Error::MissingConstant("slater_margin"))
    }
}

/// Per-slot drift constant `B = k(F + GD)²/2`.
pub fn drift_constant(c: &ProblemConstants) -> f64 {
    let s = c.value_bound + c.subgradient_bound * c.diameter;
    c.num_constraints as f64 * s * s / 2.0
}

/// Slater drift constant `R = VG²/(2α) + 2F`.
pub fn slater_drift_constant(c: &ProblemConstants, v: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidInput("alpha must be positive".into()));
    }
    let g = c.subgradient_bound;
    Ok(v * g * g / (2.0 * alpha) + 2.0 * c.value_bound)
}

/// Per-slot queue-norm step bound `δ = √k (F + DG)`.
pub fn queue_step_bound(c: &ProblemConstants) -> f64 {
    fp::sqrt(c.num_constraints as f64) * (c.value_bound + c.diameter * c.subgradient_bound)
}

/// Queue bound factor `θ`, so `‖Q(t)‖ ≤ θV`:
/// `θ = max[δ, (B + RV)/(ηV) + αD²/(ηV(V+1)) + δ(V+2)/(2V)]`.
///
/// `V` must be a positive integer and a Slater margin must be declared.
pub fn queue_bound_factor(c: &ProblemConstants, v: u64, alpha: f64) -> Result<f64> {
    if v == 0 {
        return Err(Error::InvalidInput("V must be a positive integer".into()));
    }
    let eta = c.eta()?;
    let vf = v as f64;
    let b = drift_constant(c);
    let r = slater_drift_constant(c, vf, alpha)?;
    let delta = queue_step_bound(c);
    let d = c.diameter;
    let second = (b + r * vf) / (eta * vf)
        + alpha * d * d / (eta * vf * (vf + 1.0))
        + delta * (vf + 2.0) / (2.0 * vf);
    Ok(delta.max(second))
}

/// Drift constant for the i.i.d. analysis, `C = B + kG(F + DG)`.
pub fn iid_drift_constant(c: &ProblemConstants) -> f64 {
    drift_constant(c)
        + c.num_constraints as f64
            * c.subgradient_bound
            * (c.value_bound + c.diameter * c.subgradient_bound)
}

/// Objective-gap envelope `B/V + VG²/(2α) + αD²/(VT)`, valid for every
/// `T ≥ 1` against any fixed point of the common feasible subset.
pub fn objective_gap_envelope(c: &ProblemConstants, v: f64, alpha: f64, t: u64) -> f64 {
    let g = c.subgradient_bound;
    let d = c.diameter;
    drift_constant(c) / v + v * g * g / (2.0 * alpha) + alpha * d * d / (v * t as f64)
}

/// Uniform queue-norm envelope `θV` (needs integer `V` and Slater data).
pub fn queue_norm_envelope(c: &ProblemConstants, v: u64, alpha: f64) -> Result<f64> {
    Ok(queue_bound_factor(c, v, alpha)? * v as f64)
}

/// Time-average constraint envelope
/// `θV/T + G²/(4V) + G²(1 + θ√k)²/(4V)`, valid when `α = V²`.
pub fn constraint_avg_envelope(c: &ProblemConstants, v: u64, t: u64) -> Result<f64> {
    let vf = v as f64;
    let theta = queue_bound_factor(c, v, vf * vf)?;
    let g = c.subgradient_bound;
    let root_k = fp::sqrt(c.num_constraints as f64);
    let lip = 1.0 + theta * root_k;
    Ok(theta * vf / t as f64 + g * g / (4.0 * vf) + g * g * lip * lip / (4.0 * vf))
}

/// Expected objective-gap envelope under i.i.d. constraints,
/// `C/V + G²/(2V) + VD²/T` (stated with `α = V²`).
pub fn iid_objective_gap_envelope(c: &ProblemConstants, v: f64, t: u64) -> f64 {
    let g = c.subgradient_bound;
    let d = c.diameter;
    iid_drift_constant(c) / v + g * g / (2.0 * v) + v * d * d / t as f64
}

/// Expected queue-norm envelope for the fully i.i.d. model:
/// `E‖Q(T+1)‖ ≤ 2V‖μ‖ + √(2CT + TV²G²/α + 2αD² + 2TV²G²(Σμᵢ)²/α)`.
pub fn iid_queue_envelope(c: &ProblemConstants, v: f64, alpha: f64, t: u64) -> Result<f64> {
    let mu = c
        .lagrange_multipliers
        .as_ref()
        .ok_or(Error::MissingConstant("lagrange_multipliers"))?;
    if !(alpha > 0.0) {
        return Err(Error::InvalidInput("alpha must be positive".into()));
    }
    let mu_norm = fp::sqrt(mu.iter().map(|m| m * m).sum::<f64>());
    let mu_sum: f64 = mu.iter().sum();
    let g = c.subgradient_bound;
    let d = c.diameter;
    let tf = t as f64;
    let inner = 2.0 * iid_drift_constant(c) * tf
        + tf * v * v * g * g / alpha
        + 2.0 * alpha * d * d
        + 2.0 * tf * v * v * g * g * mu_sum * mu_sum / alpha;
    Ok(2.0 * v * mu_norm + fp::sqrt(inner))
}

/// Per-frame convergence coefficients `(c, d)` such that the solver run
/// with `V = ⌈1/ε⌉, α = V²` guarantees a time-average objective gap of at
/// most `cε + d/(εT)` for every prefix `T` and every `ε ≤ 1`:
/// `c = B + G²/2` and `d = 2D²` (the factor 2 absorbs the ceiling on `1/ε`).
pub fn frame_gap_coefficients(c: &ProblemConstants) -> (f64, f64) {
    let g = c.subgradient_bound;
    let d = c.diameter;
    (drift_constant(c) + g * g / 2.0, 2.0 * d * d)
}

/// Regret coefficient `β = (c + d)[1 + √2/(√2 − 1)]` for the doubling
/// wrapper: cumulative objective regret stays below `β√T` for all `T`.
pub fn doubling_regret_coefficient(c: &ProblemConstants) -> f64 {
    let (cc, dd) = frame_gap_coefficients(c);
    let sqrt2 = fp::sqrt(2.0);
    (cc + dd) * (1.0 + sqrt2 / (sqrt2 - 1.0))
}

/// Gap coefficient for the fixed-step projected subgradient baseline:
/// the time-average gap is at most `D²/(2εT) + εG²/2 ≤ cε` for all
/// `T ≥ 1/ε²` with `c = (D² + G²)/2`.
pub fn fixed_step_gap_coefficient(c: &ProblemConstants) -> f64 {
    let d = c.diameter;
    let g = c.subgradient_bound;
    (d * d + g * g) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn consts(k: usize, f: f64, g: f64, d: f64) -> ProblemConstants {
        ProblemConstants::new(d, f, g, k).unwrap()
    }

    #[test]
    fn drift_constant_cases() {
        assert_eq!(drift_constant(&consts(2, 1.0, 1.0, 1.0)), 4.0);
        assert_eq!(drift_constant(&consts(3, 0.0, 0.0, 2.0)), 0.0);
        assert_eq!(drift_constant(&consts(1, 2.0, 1.0, 3.0)), 12.5);
    }

    #[test]
    fn slater_drift_constant_cases() {
        let c = consts(1, 1.0, 1.0, 1.0);
        assert_eq!(slater_drift_constant(&c, 2.0, 2.0).unwrap(), 2.5);
        let c0 = consts(1, 1.0, 0.0, 1.0);
        assert_eq!(slater_drift_constant(&c0, 5.0, 1.0).unwrap(), 2.0);
        let c2 = consts(1, 1.0, 2.0, 1.0);
        assert_eq!(slater_drift_constant(&c2, 10.0, 100.0).unwrap(), 2.2);
        assert!(slater_drift_constant(&c2, 1.0, 0.0).is_err());
    }

    #[test]
    fn queue_step_bound_cases() {
        assert_eq!(queue_step_bound(&consts(4, 1.0, 1.0, 1.0)), 4.0);
        assert_eq!(queue_step_bound(&consts(1, 0.0, 1.0, 0.0)), 0.0);
        assert_eq!(queue_step_bound(&consts(9, 1.0, 0.5, 2.0)), 6.0);
    }

    #[test]
    fn queue_bound_factor_hand_case() {
        // k=1, F=G=D=1, η=0.5, V=1, α=1: δ=2, B=2, R=2.5,
        // second branch = 9 + 1 + 3 = 13.
        let c = consts(1, 1.0, 1.0, 1.0).with_slater_margin(0.5).unwrap();
        assert_eq!(queue_bound_factor(&c, 1, 1.0).unwrap(), 13.0);
        assert_eq!(queue_norm_envelope(&c, 1, 1.0).unwrap(), 13.0);
        // With a huge margin the second branch shrinks below δ and the max
        // pins at δ.
        let generous = consts(1, 1.0, 1.0, 1.0).with_slater_margin(1e9).unwrap();
        assert_eq!(
            queue_bound_factor(&generous, 4, 16.0).unwrap(),
            queue_step_bound(&generous)
        );
    }

    #[test]
    fn queue_bound_requires_eta_and_integer_v() {
        let c = consts(1, 1.0, 1.0, 1.0);
        assert!(matches!(
            queue_bound_factor(&c, 1, 1.0),
            Err(Error::MissingConstant(_))
        ));
        let with_eta = c.with_slater_margin(0.5).unwrap();
        assert!(queue_bound_factor(&with_eta, 0, 1.0).is_err());
    }

    #[test]
    fn iid_drift_constant_cases() {
        assert_eq!(iid_drift_constant(&consts(2, 1.0, 1.0, 1.0)), 8.0);
        assert_eq!(
            iid_drift_constant(&consts(2, 1.0, 0.0, 1.0)),
            drift_constant(&consts(2, 1.0, 0.0, 1.0))
        );
        assert_eq!(iid_drift_constant(&consts(1, 1.0, 2.0, 1.0)), 10.5);
    }

    #[test]
    fn objective_gap_envelope_cases() {
        // B=4 via k=2,F=G=D=1: 0.4 + 0.05 + 0.1.
        let c = consts(2, 1.0, 1.0, 1.0);
        assert!((objective_gap_envelope(&c, 10.0, 100.0, 100) - 0.55).abs() < 1e-15);
        let c1 = consts(1, 1.0, 1.0, 1.0);
        // B = 2 here, so V=α=T=1 gives 2 + 0.5 + 1.
        assert!((objective_gap_envelope(&c1, 1.0, 1.0, 1) - 3.5).abs() < 1e-15);
        // The T term vanishes in the long-horizon limit.
        let tail = objective_gap_envelope(&c, 10.0, 100.0, 1_000_000_000);
        assert!((tail - (0.4 + 0.05)).abs() < 1e-6);
    }

    #[test]
    fn constraint_avg_envelope_hand_case() {
        let c = consts(1, 1.0, 1.0, 1.0).with_slater_margin(0.5).unwrap();
        // θ = 13 at V = 1, α = 1 = V²: 13 + 0.25 + (1+13)²/4 = 62.25.
        assert_eq!(constraint_avg_envelope(&c, 1, 1).unwrap(), 62.25);
        // G = 0 leaves only the queue term.
        let c0 = consts(1, 1.0, 0.0, 1.0).with_slater_margin(0.5).unwrap();
        let theta = queue_bound_factor(&c0, 1, 1.0).unwrap();
        assert_eq!(constraint_avg_envelope(&c0, 1, 4).unwrap(), theta / 4.0);
        // The queue term vanishes in the long-horizon limit, leaving the
        // two subgradient terms.
        let v = 4u64;
        let theta4 = queue_bound_factor(&c, v, 16.0).unwrap();
        let tail = constraint_avg_envelope(&c, v, 1_000_000_000_000).unwrap();
        let expect = 1.0 / 16.0 + (1.0 + theta4) * (1.0 + theta4) / 16.0;
        assert!((tail - expect).abs() <= 1e-9 * expect);
    }

    #[test]
    fn queue_norm_envelope_is_not_linear_in_v() {
        // Doubling V recomputes θ rather than scaling the envelope.
        let c = consts(2, 1.0, 1.0, 1.0).with_slater_margin(0.5).unwrap();
        let e1 = queue_norm_envelope(&c, 5, 25.0).unwrap();
        let e2 = queue_norm_envelope(&c, 10, 100.0).unwrap();
        assert!(
            (e2 - 2.0 * e1).abs() > 1e-6,
            "envelope scaled linearly: {e1} vs {e2}"
        );
    }

    #[test]
    fn iid_objective_gap_envelope_cases() {
        // C=8 via k=2,F=G=D=1: 0.8 + 0.05 + 0.1.
        let c = consts(2, 1.0, 1.0, 1.0);
        assert!((iid_objective_gap_envelope(&c, 10.0, 100) - 0.95).abs() < 1e-15);
        assert_eq!(iid_objective_gap_envelope(&c, 1.0, 1), 8.0 + 0.5 + 1.0);
        let d0 = consts(2, 1.0, 1.0, 0.0);
        assert_eq!(
            iid_objective_gap_envelope(&d0, 4.0, 7),
            iid_drift_constant(&d0) / 4.0 + 1.0 / 8.0
        );
    }

    #[test]
    fn iid_queue_envelope_cases() {
        let base = consts(1, 1.0, 1.0, 1.0);
        assert!(matches!(
            iid_queue_envelope(&base, 1.0, 1.0, 1),
            Err(Error::MissingConstant(_))
        ));
        let c = base
            .clone()
            .with_lagrange_multipliers(alloc::vec![0.0])
            .unwrap();
        let cc = iid_drift_constant(&c);
        let expect = (2.0 * cc * 10.0 + 10.0 * 4.0 / 2.0 + 2.0 * 2.0).sqrt();
        assert!((iid_queue_envelope(&c, 2.0, 2.0, 10).unwrap() - expect).abs() < 1e-12);
        // All-zero problem data collapses the bound to zero.
        let z = consts(1, 0.0, 0.0, 0.0)
            .with_lagrange_multipliers(alloc::vec![0.0])
            .unwrap();
        assert_eq!(iid_queue_envelope(&z, 1.0, 1.0, 5).unwrap(), 0.0);
    }

    #[test]
    fn iid_queue_envelope_epsilon_scaling() {
        // With V = 1/ε, α = 1/ε², T = 1/ε² the bound divided by T collapses
        // to a precomputable multiple of ε.
        let c = consts(1, 1.0, 1.0, 1.0)
            .with_lagrange_multipliers(alloc::vec![0.0])
            .unwrap();
        let cc = iid_drift_constant(&c);
        let coeff = (2.0 * cc + 1.0 + 2.0).sqrt(); // √(2C + G² + 2D²)
        for eps in [0.1f64, 0.05, 0.02] {
            let v = 1.0 / eps;
            let alpha = v * v;
            let t = (1.0 / (eps * eps)).round() as u64;
            let bound = iid_queue_envelope(&c, v, alpha, t).unwrap();
            assert!(bound / t as f64 <= coeff * eps * (1.0 + 1e-12));
        }
    }

    #[test]
    fn monotonicity_spot_checks() {
        let c = consts(2, 1.0, 1.0, 1.0).with_slater_margin(0.5).unwrap();
        assert!(
            objective_gap_envelope(&c, 5.0, 25.0, 10) > objective_gap_envelope(&c, 5.0, 25.0, 100)
        );
        assert!(
            constraint_avg_envelope(&c, 5, 10).unwrap()
                > constraint_avg_envelope(&c, 5, 100).unwrap()
        );
        // B grows in each of k, F, G, D.
        let b0 = drift_constant(&consts(1, 1.0, 1.0, 1.0));
        assert!(drift_constant(&consts(2, 1.0, 1.0, 1.0)) > b0);
        assert!(drift_constant(&consts(1, 2.0, 1.0, 1.0)) > b0);
        assert!(drift_constant(&consts(1, 1.0, 2.0, 1.0)) > b0);
        assert!(drift_constant(&consts(1, 1.0, 1.0, 2.0)) > b0);
    }

    // Second, independently arranged transcription of each closed form,
    // kept deliberately un-factored.
    mod second_transcription {
        use super::*;

        fn b2(k: f64, f: f64, g: f64, d: f64) -> f64 {
            0.5 * k * (f + g * d) * (f + g * d)
        }

        #[test]
        fn formulas_agree_on_a_grid() {
            for k in [1usize, 2, 5] {
                for f in [0.0, 0.5, 2.0] {
                    for g in [0.0, 1.0, 3.0] {
                        for d in [0.0, 1.0, 2.5] {
                            let c = consts(k, f, g, d);
                            let kf = k as f64;
                            assert_eq!(drift_constant(&c), b2(kf, f, g, d));
                            assert_eq!(
                                iid_drift_constant(&c),
                                b2(kf, f, g, d) + kf * g * f + kf * g * g * d
                            );
                            assert_eq!(queue_step_bound(&c), (f + d * g) * kf.sqrt());
                            for v in [1u64, 3, 10] {
                                let vf = v as f64;
                                for alpha in [0.5, 4.0, 100.0] {
                                    assert_eq!(
                                        slater_drift_constant(&c, vf, alpha).unwrap(),
                                        2.0 * f + g * g * vf / (2.0 * alpha)
                                    );
                                    for t in [1u64, 7, 1000] {
                                        let tf = t as f64;
                                        let lhs = objective_gap_envelope(&c, vf, alpha, t);
                                        let rhs = b2(kf, f, g, d) / vf
                                            + (vf / alpha) * g * g * 0.5
                                            + (alpha / tf) * d * d / vf;
                                        assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
                                    }
                                }
                                if f + g + d > 0.0 {
                                    let c_eta = c.clone().with_slater_margin(0.25).unwrap();
                                    let alpha = vf * vf;
                                    let theta = queue_bound_factor(&c_eta, v, alpha).unwrap();
                                    let delta = (f + d * g) * kf.sqrt();
                                    let r = 2.0 * f + g * g / (2.0 * vf);
                                    let alt = f64::max(
                                        delta,
                                        (b2(kf, f, g, d) + r * vf) / (0.25 * vf)
                                            + vf * d * d / (0.25 * (vf + 1.0))
                                            + 0.5 * delta * (vf + 2.0) / vf,
                                    );
                                    assert!((theta - alt).abs() <= 1e-12 * (1.0 + alt.abs()));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}
