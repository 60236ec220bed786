//! Frozen hand simulation of the 1D scenario
//!     X = [0,1], f_t(x) = x, g_t(x) = 0.5 − x, V = 1, α = 1, x0 = 0.
//!
//! Every quantity below was computed independently with exact rational
//! arithmetic; all values are dyadic, so the run must reproduce them
//! bit-for-bit on any platform.

use ocoq_core::geometry::DecisionSet;
use ocoq_core::solver::{run_dpp, AlgorithmParams};
use ocoq_core::streams::{FunctionSpec, ScenarioFamily, ScenarioSpec, SlaterData};

pub fn golden_scenario(horizon: u64) -> (ScenarioSpec, DecisionSet, AlgorithmParams) {
    let spec = ScenarioSpec::new(
        ScenarioFamily::TimeInvariant {
            objective: FunctionSpec::Affine {
                coeffs: vec![1.0],
                offset: 0.0,
            },
            constraints: vec![FunctionSpec::Affine {
                coeffs: vec![-1.0],
                offset: -0.5,
            }],
        },
        1,
        1.5,
        1.0,
        Some(SlaterData {
            witness: vec![1.0],
            margin: 0.5,
        }),
        horizon,
        0,
    )
    .unwrap();
    let set = DecisionSet::hyperbox(vec![0.0], vec![1.0]).unwrap();
    let params = AlgorithmParams::new(1.0, 1.0).unwrap();
    (spec, set, params)
}

// (t, X_t, f_t(X_t), g_t(X_t), Q(t), Q(t+1), drift, ‖X_t − X_{t-1}‖²)
type GoldenRow = (u64, f64, f64, f64, f64, f64, f64, f64);
pub const GOLDEN: [GoldenRow; 8] = [
    (0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0),
    (1, 0.0, 0.0, 0.5, 0.0, 0.5, 0.125, 0.0),
    (2, 0.0, 0.0, 0.5, 0.5, 1.0, 0.375, 0.0),
    (3, 0.0, 0.0, 0.5, 1.0, 1.5, 0.625, 0.0),
    (4, 0.25, 0.25, 0.25, 1.5, 1.75, 0.40625, 0.0625),
    (5, 0.625, 0.625, -0.125, 1.75, 1.625, -0.2109375, 0.140625),
    (
        6,
        0.9375,
        0.9375,
        -0.4375,
        1.625,
        1.1875,
        -0.615234375,
        0.09765625,
    ),
    (7, 1.0, 1.0, -0.5, 1.1875, 0.6875, -0.46875, 0.00390625),
];

#[test]
fn golden_trace_is_bit_exact() {
    let (spec, set, params) = golden_scenario(8);
    let records = run_dpp(&spec, &set, &params, &[0.0]).unwrap();
    assert_eq!(records.len(), 8);
    for (record, expect) in records.iter().zip(GOLDEN) {
        let (t, x, f, g, q, q_next, drift, step_sq) = expect;
        assert_eq!(record.slot, t);
        assert_eq!(record.decision, vec![x], "slot {t}");
        assert_eq!(record.objective_value, f, "slot {t}");
        assert_eq!(record.constraint_values, vec![g], "slot {t}");
        assert_eq!(record.queues, vec![q], "slot {t}");
        assert_eq!(record.queues_next, vec![q_next], "slot {t}");
        assert_eq!(record.drift, drift, "slot {t}");
        assert_eq!(record.step_sq, step_sq, "slot {t}");
    }
}

#[test]
fn golden_trace_replays_identically() {
    let (spec, set, params) = golden_scenario(8);
    let a = run_dpp(&spec, &set, &params, &[0.0]).unwrap();
    let b = run_dpp(&spec, &set, &params, &[0.0]).unwrap();
    assert_eq!(a, b);
}
