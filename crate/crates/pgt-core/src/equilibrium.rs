//! Equilibrium computation on top of constructed potentials.
//!
//! In a potential game every minimizer of the potential is a pure Nash
//! equilibrium, and in a generalized ordinal potential game every strict
//! improvement step strictly decreases the potential, so better-response
//! dynamics cannot cycle. The converse makes [`better_response_dynamics`]
//! a refutation tool: a detected improvement cycle certifies that no
//! generalized ordinal potential exists.

use std::collections::HashMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::construct::PotentialFn;
use crate::error::{CoreError, Result};
use crate::game::sample::{sample_actions, sample_strategies, subseed};
use crate::game::{ActionSpace, GameSpec, JointStrategy};
use crate::report::{tol_band, ResidualTracker, TestReport, Witness};
use crate::CheckConfig;

/// Global minimizer of the potential over the joint grid.
///
/// Finite games are enumerated exhaustively (ties break to the
/// lexicographically first profile). Box games are minimized over the
/// deterministic sample grid instead and flagged approximate.
pub fn minimize_potential(
    g: &GameSpec,
    phi: &PotentialFn,
    cfg: &CheckConfig,
) -> Result<(JointStrategy, f64, bool)> {
    let (grid, exhaustive) = if g.is_finite() {
        (g.enumerate_profiles()?, true)
    } else {
        let (samples, _) = sample_strategies(g, cfg.budget.max(1), cfg.seed, cfg.radius);
        (samples, false)
    };
    if grid.is_empty() {
        return Err(CoreError::InvalidInput("empty strategy grid".into()));
    }
    let mut best: Option<(JointStrategy, f64)> = None;
    for x in grid {
        let v = phi.evaluate(g, &x)?;
        match &best {
            Some((_, b)) if v >= *b => {}
            _ => best = Some((x, v)),
        }
    }
    let (x, v) = best.expect("nonempty grid");
    Ok((x, v, exhaustive))
}

/// Checks that no sampled (exhaustive, for finite games within budget)
/// unilateral deviation lowers any player's cost by more than the band.
pub fn verify_nash(g: &GameSpec, x: &JointStrategy, cfg: &CheckConfig) -> Result<TestReport> {
    g.membership_check(x)?;
    let report = TestReport::new("nash");
    let mut tracker = ResidualTracker::new();

    let run = |i: usize, alt: &[f64], tracker: &mut ResidualTracker| -> Result<()> {
        let current = g.evaluate_cost_unchecked(i, x)?;
        let deviated = g.evaluate_cost_unchecked(i, &x.with_action(i, alt))?;
        let band = tol_band(cfg.tol, current.abs().max(deviated.abs()));
        if deviated < current - band {
            tracker.record_violation(current - deviated, || Witness::Deviation {
                player: i + 1,
                profile: x.clone(),
                action: alt.to_vec(),
                lhs: deviated,
                rhs: current,
                detail: "profitable unilateral deviation".into(),
            });
        } else {
            tracker.record_ok();
        }
        Ok(())
    };

    if g.is_finite() {
        let total: usize = g
            .spaces()
            .iter()
            .map(|s| s.point_count().expect("finite"))
            .sum();
        if total <= cfg.budget {
            for i in 0..g.players() {
                if let ActionSpace::Finite { points } = g.space(i) {
                    for alt in points {
                        run(i, alt, &mut tracker)?;
                    }
                }
            }
            return Ok(tracker.into_report(report, true));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(subseed(cfg.seed, 0x4A5));
    let pool_size = ((cfg.budget as f64).sqrt().ceil() as usize).clamp(4, 64);
    let pools: Vec<Vec<Vec<f64>>> = (0..g.players())
        .map(|i| {
            sample_actions(
                g,
                i,
                pool_size,
                subseed(cfg.seed, 0x61 + i as u64),
                cfg.radius,
            )
        })
        .collect();
    for _ in 0..cfg.budget {
        let i = rng.gen_range(0..g.players());
        let alt = pools[i][rng.gen_range(0..pools[i].len())].clone();
        run(i, &alt, &mut tracker)?;
    }
    Ok(tracker.into_report(report, false))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DynamicsOutcome {
    /// No strictly improving unilateral deviation remains: a pure Nash
    /// equilibrium.
    Converged,
    /// A profile repeated: the trajectory tail from its first occurrence is
    /// an improvement cycle, refuting every generalized ordinal potential.
    CycleDetected {
        cycle_start: usize,
    },
    BudgetExhausted,
}

#[derive(Debug, Clone)]
pub struct TrajectoryStep {
    pub profile: JointStrategy,
    /// Deviating player that produced this profile (none for the start).
    pub deviator: Option<usize>,
    pub cost_delta: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub steps: Vec<TrajectoryStep>,
    pub outcome: DynamicsOutcome,
}

impl Trajectory {
    /// JSON export with per-step deviator, cost delta, and (when a potential
    /// is supplied) potential delta.
    pub fn export_json(
        &self,
        g: &GameSpec,
        phi: Option<&PotentialFn>,
    ) -> Result<serde_json::Value> {
        let mut steps = Vec::with_capacity(self.steps.len());
        let mut prev: Option<&JointStrategy> = None;
        for s in &self.steps {
            let phi_delta = match (phi, prev) {
                (Some(phi), Some(prev)) => {
                    Some(phi.evaluate(g, &s.profile)? - phi.evaluate(g, prev)?)
                }
                _ => None,
            };
            steps.push(serde_json::json!({
                "profile": s.profile,
                "deviator": s.deviator.map(|d| d + 1),
                "cost_delta": s.cost_delta,
                "phi_delta": phi_delta,
            }));
            prev = Some(&s.profile);
        }
        let outcome = match &self.outcome {
            DynamicsOutcome::Converged => serde_json::json!({"kind": "converged"}),
            DynamicsOutcome::CycleDetected { cycle_start } => serde_json::json!({
                "kind": "cycle_detected",
                "cycle_start": cycle_start,
            }),
            DynamicsOutcome::BudgetExhausted => serde_json::json!({"kind": "budget_exhausted"}),
        };
        Ok(serde_json::json!({"steps": steps, "outcome": outcome}))
    }
}

/// Better-response dynamics on a finite game: repeatedly applies the
/// lexicographically first strictly improving unilateral deviation
/// (first by player, then by action index), so trajectories are
/// deterministic and reported cycles reproducible.
pub fn better_response_dynamics(
    g: &GameSpec,
    start: &JointStrategy,
    max_steps: usize,
) -> Result<Trajectory> {
    if !g.is_finite() {
        return Err(CoreError::InvalidInput(
            "better-response dynamics needs a finite game".into(),
        ));
    }
    g.membership_check(start)?;

    let mut current_idx = g.indices_of(start)?;
    let mut visited: HashMap<Vec<usize>, usize> = HashMap::new();
    visited.insert(current_idx.clone(), 0);
    let mut steps = vec![TrajectoryStep {
        profile: start.clone(),
        deviator: None,
        cost_delta: None,
    }];

    for _ in 0..max_steps {
        let current = g.profile_from_indices(&current_idx)?;
        let mut improvement: Option<(usize, usize, f64)> = None;
        'search: for i in 0..g.players() {
            let cost_now = g.evaluate_cost_unchecked(i, &current)?;
            let count = g.space(i).point_count().expect("finite");
            for a in 0..count {
                if a == current_idx[i] {
                    continue;
                }
                let mut idx = current_idx.clone();
                idx[i] = a;
                let cost_alt = g.evaluate_cost_unchecked(i, &g.profile_from_indices(&idx)?)?;
                if cost_alt < cost_now {
                    improvement = Some((i, a, cost_alt - cost_now));
                    break 'search;
                }
            }
        }
        let Some((i, a, delta)) = improvement else {
            return Ok(Trajectory {
                steps,
                outcome: DynamicsOutcome::Converged,
            });
        };
        current_idx[i] = a;
        steps.push(TrajectoryStep {
            profile: g.profile_from_indices(&current_idx)?,
            deviator: Some(i),
            cost_delta: Some(delta),
        });
        if let Some(&first) = visited.get(&current_idx) {
            return Ok(Trajectory {
                steps,
                outcome: DynamicsOutcome::CycleDetected { cycle_start: first },
            });
        }
        visited.insert(current_idx.clone(), steps.len() - 1);
    }
    Ok(Trajectory {
        steps,
        outcome: DynamicsOutcome::BudgetExhausted,
    })
}
