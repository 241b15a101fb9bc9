//! Verdicts, witnesses, and residual bookkeeping for criterion checks.
//!
//! Every check in the toolkit produces a [`TestReport`]. Sampled verdicts on
//! continuous games are falsifiable evidence, never certificates; exhaustive
//! verdicts on finite games are certificates and say so via the `exhaustive`
//! flag. Equality of two floating-point quantities `u`, `v` is decided
//! toolkit-wide by the scale-aware rule `|u - v| <= tol * (1 + max(|u|,|v|))`.

use serde::Serialize;

use crate::game::JointStrategy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inapplicable,
}

/// Inputs achieving the reported maximal residual, shaped per check.
/// Player indices in witnesses are 1-based, matching the `x[i][k]` syntax.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// A simple closed 4-cycle and its path quantity.
    FourCycle {
        players: [usize; 2],
        profiles: Vec<JointStrategy>,
        integral: f64,
    },
    /// A pairwise-increment identity instance: both sides of the equation.
    PairIdentity {
        players: [usize; 2],
        base: JointStrategy,
        target_i: Vec<f64>,
        target_j: Vec<f64>,
        lhs: f64,
        rhs: f64,
    },
    /// A path-decomposition identity instance.
    PathIdentity {
        base: JointStrategy,
        target: JointStrategy,
        lhs: f64,
        rhs: f64,
    },
    /// A pointwise comparison (gradients, Hessians, convexity estimates).
    PointValue {
        point: JointStrategy,
        detail: String,
        lhs: f64,
        rhs: f64,
    },
    /// A unilateral deviation and the two quantities compared at it.
    Deviation {
        player: usize,
        profile: JointStrategy,
        action: Vec<f64>,
        lhs: f64,
        rhs: f64,
        detail: String,
    },
    /// One defining equation of a finite-game potential system.
    Equation {
        player: usize,
        profile_a: JointStrategy,
        profile_b: JointStrategy,
        cost_delta: f64,
        potential_delta: f64,
    },
    Player {
        player: usize,
        detail: String,
    },
    /// Per-player own-action cost variation evidence.
    Variations {
        entries: Vec<VariationEntry>,
    },
    Note {
        detail: String,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct VariationEntry {
    pub player: usize,
    pub context: JointStrategy,
    pub action_a: Vec<f64>,
    pub action_b: Vec<f64>,
    pub spread: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TestReport {
    pub method: String,
    pub verdict: Verdict,
    /// Human-readable verdict, e.g. `pass (sampled)` or `abnormal`.
    pub label: String,
    pub residual_max: f64,
    pub witness: Option<Witness>,
    pub samples_used: usize,
    pub exhaustive: bool,
    /// Strict-inequality comparisons skipped because a compared quantity fell
    /// inside the dead-band around zero.
    pub abstentions: usize,
    pub notes: Vec<String>,
}

impl TestReport {
    pub fn new(method: impl Into<String>) -> Self {
        TestReport {
            method: method.into(),
            verdict: Verdict::Pass,
            label: String::new(),
            residual_max: 0.0,
            witness: None,
            samples_used: 0,
            exhaustive: false,
            abstentions: 0,
            notes: Vec::new(),
        }
    }

    pub fn inapplicable(method: impl Into<String>, reason: impl Into<String>) -> Self {
        let mut r = TestReport::new(method);
        r.verdict = Verdict::Inapplicable;
        r.label = format!("inapplicable: {}", reason.into());
        r
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Fills the standard `pass (sampled)` / `pass (exhaustive)` / `fail`
    /// labels unless a custom one was set.
    pub fn finish(mut self, verdict: Verdict) -> Self {
        self.verdict = verdict;
        if self.label.is_empty() {
            self.label = match (verdict, self.exhaustive) {
                (Verdict::Pass, true) => "pass (exhaustive)".into(),
                (Verdict::Pass, false) => "pass (sampled)".into(),
                (Verdict::Fail, _) => "fail".into(),
                (Verdict::Inapplicable, _) => "inapplicable".into(),
            };
        }
        self
    }
}

/// Scale-aware equality band around `tol`.
pub fn tol_band(tol: f64, scale: f64) -> f64 {
    tol * (1.0 + scale.abs())
}

/// `|u - v| <= tol * (1 + max(|u|, |v|))`.
pub fn approx_eq(u: f64, v: f64, tol: f64) -> bool {
    (u - v).abs() <= tol_band(tol, u.abs().max(v.abs()))
}

/// Streaming max-residual tracker. The witness kept is the first one (in
/// enumeration order) achieving the maximal residual, which makes reports
/// reproducible for a fixed seed.
pub struct ResidualTracker {
    pub residual_max: f64,
    pub violations: usize,
    pub checked: usize,
    pub abstentions: usize,
    witness: Option<Witness>,
}

impl ResidualTracker {
    pub fn new() -> Self {
        ResidualTracker {
            residual_max: 0.0,
            violations: 0,
            checked: 0,
            abstentions: 0,
            witness: None,
        }
    }

    /// Records an equality comparison `lhs == rhs` under the scaled band.
    pub fn record_eq(&mut self, lhs: f64, rhs: f64, tol: f64, witness: impl FnOnce() -> Witness) {
        self.checked += 1;
        let residual = (lhs - rhs).abs();
        if residual > tol_band(tol, lhs.abs().max(rhs.abs())) {
            self.violations += 1;
        }
        if residual > self.residual_max || self.witness.is_none() {
            self.residual_max = self.residual_max.max(residual);
            if residual >= self.residual_max {
                self.witness = Some(witness());
            }
        }
    }

    /// Records a quantity that must vanish; `scale` is the magnitude of the
    /// terms it was computed from (so cancellation noise is tolerated).
    pub fn record_zero(
        &mut self,
        value: f64,
        scale: f64,
        tol: f64,
        witness: impl FnOnce() -> Witness,
    ) {
        self.checked += 1;
        let residual = value.abs();
        if residual > tol_band(tol, scale) {
            self.violations += 1;
        }
        if residual > self.residual_max || self.witness.is_none() {
            self.residual_max = self.residual_max.max(residual);
            if residual >= self.residual_max {
                self.witness = Some(witness());
            }
        }
    }

    /// Records a strict-inequality violation outright (the caller has already
    /// applied the dead-band); `margin` is the violation magnitude.
    pub fn record_violation(&mut self, margin: f64, witness: impl FnOnce() -> Witness) {
        self.checked += 1;
        self.violations += 1;
        if margin > self.residual_max || self.witness.is_none() {
            self.residual_max = self.residual_max.max(margin);
            self.witness = Some(witness());
        }
    }

    pub fn record_ok(&mut self) {
        self.checked += 1;
    }

    pub fn abstain(&mut self) {
        self.checked += 1;
        self.abstentions += 1;
    }

    /// Folds the tracker into a report.
    pub fn into_report(self, mut report: TestReport, exhaustive: bool) -> TestReport {
        report.residual_max = self.residual_max;
        report.samples_used = self.checked;
        report.exhaustive = exhaustive;
        report.abstentions = self.abstentions;
        report.witness = self.witness;
        let verdict = if self.violations == 0 {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        report.finish(verdict)
    }
}

impl Default for ResidualTracker {
    fn default() -> Self {
        Self::new()
    }
}
