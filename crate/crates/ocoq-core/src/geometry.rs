//! Compact convex decision sets with exact Euclidean projection.
//!
//! The solver only ever touches the feasible region through three
//! operations: project a point onto it, test membership, and sample a
//! member. Boxes and balls have closed-form projections; a box intersected
//! with finitely many halfspaces is handled with Dykstra's alternating
//! projection scheme, which converges to the exact Euclidean projection for
//! intersections of convex sets (plain alternating projection does not).

use alloc::format;
use alloc::vec::Vec;

use crate::linalg::{dist, dot, norm, norm_sq, sub};
use crate::rng::SlotRng;
use crate::{Error, Result};

/// Iteration cap for the alternating projection scheme.
const DYKSTRA_MAX_CYCLES: u32 = 10_000;
/// Residual tolerance at which the scheme is declared converged.
const DYKSTRA_TOL: f64 = 1e-10;

/// A closed halfspace `{ x : normal · x ≤ offset }`.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Halfspace {
    pub fn new(normal: Vec<f64>, offset: f64) -> Result<Self> {
        if norm_sq(&normal) == 0.0 {
            return Err(Error::InvalidInput(
                "halfspace normal must be nonzero".into(),
            ));
        }
        Ok(Halfspace { normal, offset })
    }

    /// Signed violation `normal · x − offset` (≤ 0 means satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) - self.offset
    }

    fn project(&self, x: &mut [f64]) {
        let v = self.violation(x);
        if v > 0.0 {
            let scale = v / norm_sq(&self.normal);
            for (xi, ni) in x.iter_mut().zip(&self.normal) {
                *xi -= scale * ni;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum SetKind {
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    /// A bounding box intersected with finitely many halfspaces.
    Polytope {
        lower: Vec<f64>,
        upper: Vec<f64>,
        halfspaces: Vec<Halfspace>,
    },
}

/// A compact convex feasible region with a declared diameter and an
/// interior witness point. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionSet {
    kind: SetKind,
    dimension: usize,
    diameter: f64,
    witness: Vec<f64>,
}

impl DecisionSet {
    /// Axis-aligned box `[lower_i, upper_i]` per coordinate.
    pub fn hyperbox(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::InvalidInput(
                "box bounds must be nonempty and equal length".into(),
            ));
        }
        for (l, u) in lower.iter().zip(&upper) {
            if !(l <= u) {
                return Err(Error::InvalidInput(format!("box bound {l} > {u}")));
            }
        }
        let dimension = lower.len();
        let diameter = dist(&upper, &lower);
        let witness = lower
            .iter()
            .zip(&upper)
            .map(|(l, u)| 0.5 * (l + u))
            .collect();
        Ok(DecisionSet {
            kind: SetKind::Box { lower, upper },
            dimension,
            diameter,
            witness,
        })
    }

    /// Euclidean ball of the given center and radius.
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::InvalidInput("ball center must be nonempty".into()));
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidInput(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        let dimension = center.len();
        let witness = center.clone();
        Ok(DecisionSet {
            kind: SetKind::Ball { center, radius },
            dimension,
            diameter: 2.0 * radius,
            witness,
        })
    }

    /// A box intersected with halfspaces. The witness must be a member; the
    /// declared diameter is the bounding box's diagonal, which is always an
    /// upper bound on pairwise distances within the set.
    pub fn polytope(
        lower: Vec<f64>,
        upper: Vec<f64>,
        halfspaces: Vec<Halfspace>,
        witness: Vec<f64>,
    ) -> Result<Self> {
        let boxed = Self::hyperbox(lower, upper)?;
        let (lower, upper) = match boxed.kind {
            SetKind::Box { lower, upper } => (lower, upper),
            _ => unreachable!(),
        };
        let dimension = lower.len();
        for h in &halfspaces {
            if h.normal.len() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    found: h.normal.len(),
                });
            }
        }
        if witness.len() != dimension {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                found: witness.len(),
            });
        }
        let set = DecisionSet {
            diameter: boxed.diameter,
            kind: SetKind::Polytope {
                lower,
                upper,
                halfspaces,
            },
            dimension,
            witness: witness.clone(),
        };
        if !set.contains(&witness, 0.0)? {
            return Err(Error::InvalidInput(
                "polytope witness point is not a member".into(),
            ));
        }
        Ok(set)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Declared diameter `D`: `‖x − y‖ ≤ D` for all members `x, y`.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// A declared member point (center or midpoint for box/ball).
    pub fn witness(&self) -> &[f64] {
        &self.witness
    }

    /// Per-coordinate bounding box of the set.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match &self.kind {
            SetKind::Box { lower, upper } | SetKind::Polytope { lower, upper, .. } => {
                (lower.clone(), upper.clone())
            }
            SetKind::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Exact Euclidean projection: the unique member minimizing `‖x − y‖²`.
    pub fn project(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(y)?;
        match &self.kind {
            SetKind::Box { lower, upper } => Ok(clamp_box(y, lower, upper)),
            SetKind::Ball { center, radius } => {
                let offset = sub(y, center);
                let d = norm(&offset);
                if d <= *radius {
                    Ok(y.to_vec())
                } else {
                    let scale = radius / d;
                    Ok(center
                        .iter()
                        .zip(&offset)
                        .map(|(c, o)| c + scale * o)
                        .collect())
                }
            }
            SetKind::Polytope {
                lower,
                upper,
                halfspaces,
            } => self.project_dykstra(y, lower, upper, halfspaces),
        }
    }

    /// Dykstra's scheme over the box and each halfspace. The per-set
    /// correction terms are what make the limit the exact projection onto
    /// the intersection rather than just some feasible point.
    fn project_dykstra(
        &self,
        y: &[f64],
        lower: &[f64],
        upper: &[f64],
        halfspaces: &[Halfspace],
    ) -> Result<Vec<f64>> {
        let pieces = 1 + halfspaces.len();
        let mut x = y.to_vec();
        let mut corrections = alloc::vec![alloc::vec![0.0; self.dimension]; pieces];
        let mut residual = f64::INFINITY;
        for _cycle in 0..DYKSTRA_MAX_CYCLES {
            // Convergence is measured on the correction vectors: the iterate
            // alone can repeat across cycles long before the scheme settles.
            let mut correction_shift_sq = 0.0;
            for (idx, corr) in corrections.iter_mut().enumerate() {
                for (xi, ci) in x.iter_mut().zip(corr.iter()) {
                    *xi += ci;
                }
                let z = x.clone();
                if idx == 0 {
                    x = clamp_box(&x, lower, upper);
                } else {
                    halfspaces[idx - 1].project(&mut x);
                }
                for ((ci, zi), xi) in corr.iter_mut().zip(&z).zip(&x) {
                    let next = zi - xi;
                    let d = next - *ci;
                    correction_shift_sq += d * d;
                    *ci = next;
                }
            }
            let feas = self.max_violation(&x);
            residual = crate::fp::sqrt(correction_shift_sq).max(feas);
            if residual <= DYKSTRA_TOL {
                return Ok(x);
            }
        }
        Err(Error::ProjectionStalled {
            residual,
            iterations: DYKSTRA_MAX_CYCLES,
        })
    }

    /// Largest violation of any defining inequality at `x` (≤ 0 inside).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        match &self.kind {
            SetKind::Box { lower, upper } => box_violation(x, lower, upper),
            SetKind::Ball { center, radius } => dist(x, center) - radius,
            SetKind::Polytope {
                lower,
                upper,
                halfspaces,
            } => {
                let mut worst = box_violation(x, lower, upper);
                for h in halfspaces {
                    worst = worst.max(h.violation(x));
                }
                worst
            }
        }
    }

    /// Membership with per-inequality absolute slack `tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool> {
        self.check_dim(x)?;
        Ok(self.max_violation(x) <= tol)
    }

    /// Deterministic member sample: a uniform draw from the bounding box,
    /// projected onto the set. Coverage is what the randomized invariant
    /// checks need, not uniformity.
    pub fn sample(&self, seed: u64) -> Vec<f64> {
        let mut rng = SlotRng::at(seed, 0, 0x5e7);
        let (lower, upper) = self.bounding_box();
        let raw: Vec<f64> = lower
            .iter()
            .zip(&upper)
            .map(|(l, u)| rng.next_range(*l, *u))
            .collect();
        match self.project(&raw) {
            Ok(p) => p,
            // Projection onto a valid set cannot fail for box/ball; for a
            // stalled polytope projection the witness is always a member.
            Err(_) => self.witness.clone(),
        }
    }
}

fn clamp_box(y: &[f64], lower: &[f64], upper: &[f64]) -> Vec<f64> {
    y.iter()
        .zip(lower.iter().zip(upper))
        .map(|(v, (l, u))| v.max(*l).min(*u))
        .collect()
}

fn box_violation(x: &[f64], lower: &[f64], upper: &[f64]) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for (v, (l, u)) in x.iter().zip(lower.iter().zip(upper)) {
        worst = worst.max(l - v).max(v - u);
    }
    worst
}
