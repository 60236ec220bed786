//! Verification reports: one entry per checked inequality.

use serde::Serialize;

/// Outcome of one checked inequality. `max_violation` is the worst
/// `lhs − rhs − slack` margin over everything checked (negative when the
/// inequality holds with room); `tolerance` is the base slack the check
/// applied (per-item slack may additionally scale with the magnitude of
/// the right-hand side).
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub id: String,
    pub pass: bool,
    pub slots_checked: u64,
    pub max_violation: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub envelope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckResult {
    /// A pathwise check accumulated through `Margin`.
    pub fn from_margin(id: &str, margin: Margin, tolerance: f64) -> Self {
        CheckResult {
            id: id.to_string(),
            pass: margin.worst <= 0.0,
            slots_checked: margin.checked,
            max_violation: margin.worst,
            tolerance,
            trials: None,
            mean: None,
            envelope: None,
            std_error: None,
            note: None,
        }
    }
}

/// Accumulator for the worst inequality margin across many checks.
#[derive(Debug, Clone, Copy)]
pub struct Margin {
    pub worst: f64,
    pub checked: u64,
}

impl Margin {
    pub fn new() -> Self {
        Margin {
            worst: f64::NEG_INFINITY,
            checked: 0,
        }
    }

    /// Records `lhs ≤ rhs + slack`.
    pub fn check(&mut self, lhs: f64, rhs: f64, slack: f64) {
        self.worst = self.worst.max(lhs - rhs - slack);
        self.checked += 1;
    }

    pub fn finish(mut self) -> Self {
        if self.checked == 0 {
            self.worst = 0.0;
        }
        self
    }
}

impl Default for Margin {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub results: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    /// One line per check for terminal output.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for r in &self.results {
            let status = if r.pass { "PASS" } else { "FAIL" };
            out.push_str(&format!(
                "{status} {} (checked {}, worst margin {:+.3e})",
                r.id, r.slots_checked, r.max_violation
            ));
            if let (Some(mean), Some(env)) = (r.mean, r.envelope) {
                out.push_str(&format!(" mean {mean:.6} vs envelope {env:.6}"));
            }
            if let Some(se) = r.std_error {
                out.push_str(&format!(" (se {se:.3e})"));
            }
            out.push('\n');
        }
        out
    }
}
