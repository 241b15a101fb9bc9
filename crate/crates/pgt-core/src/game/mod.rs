//! Declarative game representation and cost evaluation.
//!
//! A game is a player count, per-player action spaces in `R^{n_i}`, and one
//! cost function per player given as expressions, finite cost tables, or a
//! common origin-destination congestion network. Strategies are always
//! carried as per-player real vectors; finite spaces dereference a vector
//! back to its point index on evaluation.
//!
//! Games are immutable after construction and all operations here are pure.

pub mod congestion;
pub mod sample;
mod schema;

pub use congestion::{expand_congestion_game, CongestionNetwork, EdgeCost};
pub use sample::{sample_actions, sample_strategies};
pub use schema::{load_game_spec, load_game_spec_from_str};

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use crate::error::{CoreError, Result};
use crate::expr::{Expr, ParamEnv};
use crate::report::{tol_band, TestReport, VariationEntry, Verdict, Witness};

/// Relative slack used when matching a real vector against a finite point or
/// a box face; absorbs round-off from strategy arithmetic like `z + (t - z)`.
const MEMBERSHIP_SLACK: f64 = 1e-9;

/// One point in the joint action set: one coordinate vector per player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JointStrategy(pub Vec<Vec<f64>>);

impl JointStrategy {
    pub fn players(&self) -> usize {
        self.0.len()
    }

    pub fn action(&self, player: usize) -> &[f64] {
        &self.0[player]
    }

    /// Copy with `player`'s action replaced.
    pub fn with_action(&self, player: usize, action: &[f64]) -> JointStrategy {
        let mut next = self.clone();
        next.0[player] = action.to_vec();
        next
    }

    pub fn zeros(dims: &[usize]) -> JointStrategy {
        JointStrategy(dims.iter().map(|&n| vec![0.0; n]).collect())
    }

    /// Componentwise sum with per-player increment vectors.
    pub fn offset(&self, increments: &[Vec<f64>]) -> JointStrategy {
        JointStrategy(
            self.0
                .iter()
                .zip(increments)
                .map(|(a, y)| a.iter().zip(y).map(|(u, v)| u + v).collect())
                .collect(),
        )
    }
}

fn coords_close(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(u, v)| (u - v).abs() <= MEMBERSHIP_SLACK * (1.0 + u.abs().max(v.abs())))
}

/// A player's strategy set.
#[derive(Debug, Clone)]
pub enum ActionSpace {
    /// An explicit finite list of distinct points.
    Finite { points: Vec<Vec<f64>> },
    /// An axis-aligned box `[lo, hi]`; `open_lo` marks every lower face as
    /// excluded, which is how half-open sets like `(0, 1]` are declared.
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
        open_lo: bool,
    },
    /// The whole of `R^dim`.
    All { dim: usize },
}

impl ActionSpace {
    pub fn dim(&self) -> usize {
        match self {
            ActionSpace::Finite { points } => points.first().map(|p| p.len()).unwrap_or(0),
            ActionSpace::Box { lo, .. } => lo.len(),
            ActionSpace::All { dim } => *dim,
        }
    }

    /// Index of a matching finite point, if any.
    pub fn locate(&self, action: &[f64]) -> Option<usize> {
        match self {
            ActionSpace::Finite { points } => points.iter().position(|p| coords_close(p, action)),
            _ => None,
        }
    }

    pub fn contains(&self, action: &[f64]) -> bool {
        if action.len() != self.dim() {
            return false;
        }
        match self {
            ActionSpace::Finite { .. } => self.locate(action).is_some(),
            ActionSpace::Box { lo, hi, open_lo } => action.iter().enumerate().all(|(c, &v)| {
                let lo_ok = if *open_lo {
                    v > lo[c]
                } else {
                    v >= lo[c] - MEMBERSHIP_SLACK * (1.0 + lo[c].abs())
                };
                lo_ok && v <= hi[c] + MEMBERSHIP_SLACK * (1.0 + hi[c].abs())
            }),
            ActionSpace::All { .. } => true,
        }
    }

    /// Computed, never user-asserted: is the zero vector a member?
    pub fn contains_zero(&self) -> bool {
        self.contains(&vec![0.0; self.dim()])
    }

    /// Computed, never user-asserted: is the set closed under negation?
    pub fn symmetric(&self) -> bool {
        match self {
            ActionSpace::Finite { points } => points.iter().all(|p| {
                let negated: Vec<f64> = p.iter().map(|v| -v).collect();
                self.locate(&negated).is_some()
            }),
            ActionSpace::Box { lo, hi, open_lo } => {
                // a half-open box excludes its lower face while keeping the
                // mirrored upper one, so it cannot be symmetric
                !*open_lo && lo.iter().zip(hi).all(|(l, h)| *l == -*h)
            }
            ActionSpace::All { .. } => true,
        }
    }

    pub fn point_count(&self) -> Option<usize> {
        match self {
            ActionSpace::Finite { points } => Some(points.len()),
            _ => None,
        }
    }
}

/// Row-major N-dimensional cost table over finite action indices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl Table {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Table> {
        let expected: usize = shape.iter().product();
        if data.len() != expected {
            return Err(CoreError::DimensionMismatch(format!(
                "table holds {} entries but the shape {:?} needs {expected}",
                data.len(),
                shape
            )));
        }
        Ok(Table { shape, data })
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let mut flat = 0;
        for (k, &i) in idx.iter().enumerate() {
            flat = flat * self.shape[k] + i;
        }
        flat
    }

    pub fn value(&self, idx: &[usize]) -> f64 {
        self.data[self.flat_index(idx)]
    }
}

/// Per-player cost definitions.
#[derive(Debug, Clone)]
pub enum Costs {
    Expr { exprs: Vec<Expr>, params: ParamEnv },
    Table { tables: Vec<Table> },
    Congestion(CongestionNetwork),
}

/// A complete game: players, action spaces, costs.
#[derive(Debug, Clone)]
pub struct GameSpec {
    players: usize,
    dims: Vec<usize>,
    spaces: Vec<ActionSpace>,
    costs: Costs,
    aggregative: bool,
}

impl GameSpec {
    pub fn new(dims: Vec<usize>, spaces: Vec<ActionSpace>, costs: Costs) -> Result<GameSpec> {
        let players = dims.len();
        if players == 0 {
            return Err(CoreError::Schema {
                path: "players".into(),
                message: "a game needs at least one player".into(),
            });
        }
        if spaces.len() != players {
            return Err(CoreError::DimensionMismatch(format!(
                "{} spaces declared for {players} players",
                spaces.len()
            )));
        }
        for (i, (space, &n)) in spaces.iter().zip(&dims).enumerate() {
            if n == 0 {
                return Err(CoreError::DimensionMismatch(format!(
                    "player {} has zero-dimensional actions",
                    i + 1
                )));
            }
            if space.dim() != n {
                return Err(CoreError::DimensionMismatch(format!(
                    "player {}: action space dimension {} does not match declared dimension {n}",
                    i + 1,
                    space.dim()
                )));
            }
            match space {
                ActionSpace::Finite { points } => {
                    if points.is_empty() {
                        return Err(CoreError::Schema {
                            path: format!("spaces[{i}].points"),
                            message: "finite action space has no points".into(),
                        });
                    }
                    for (a, p) in points.iter().enumerate() {
                        if p.len() != n {
                            return Err(CoreError::DimensionMismatch(format!(
                                "spaces[{i}].points[{a}] has {} coordinates, expected {n}",
                                p.len()
                            )));
                        }
                        if points[..a].iter().any(|q| coords_close(q, p)) {
                            return Err(CoreError::Schema {
                                path: format!("spaces[{i}].points[{a}]"),
                                message: "finite action points must be distinct".into(),
                            });
                        }
                    }
                }
                ActionSpace::Box { lo, hi, .. } => {
                    if lo.len() != n || hi.len() != n {
                        return Err(CoreError::DimensionMismatch(format!(
                            "spaces[{i}]: box bounds must have {n} coordinates"
                        )));
                    }
                    if lo.iter().zip(hi).any(|(l, h)| l > h) {
                        return Err(CoreError::Schema {
                            path: format!("spaces[{i}]"),
                            message: "box lower bound exceeds upper bound".into(),
                        });
                    }
                }
                ActionSpace::All { .. } => {}
            }
        }

        let aggregative = match &costs {
            Costs::Expr { exprs, params } => {
                if exprs.len() != players {
                    return Err(CoreError::DimensionMismatch(format!(
                        "{} cost expressions for {players} players",
                        exprs.len()
                    )));
                }
                let mut free = BTreeSet::new();
                for (i, e) in exprs.iter().enumerate() {
                    e.validate_dims(&dims)?;
                    e.free_params(&mut free);
                    let _ = i;
                }
                if let Some(missing) = free.iter().find(|name| !params.contains_key(*name)) {
                    return Err(CoreError::Schema {
                        path: "params".into(),
                        message: format!("parameter `{missing}` is used but not bound"),
                    });
                }
                let shared = dims.iter().all(|&d| d == dims[0]);
                shared
                    && exprs
                        .iter()
                        .enumerate()
                        .all(|(i, e)| e.uses_only_own_and_aggregate(i))
            }
            Costs::Table { tables } => {
                if tables.len() != players {
                    return Err(CoreError::DimensionMismatch(format!(
                        "{} cost tables for {players} players",
                        tables.len()
                    )));
                }
                let shape: Vec<usize> = spaces
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        s.point_count().ok_or_else(|| CoreError::Schema {
                            path: format!("spaces[{i}]"),
                            message: "table costs require finite action spaces".into(),
                        })
                    })
                    .collect::<Result<_>>()?;
                for (i, t) in tables.iter().enumerate() {
                    if t.shape != shape {
                        return Err(CoreError::DimensionMismatch(format!(
                            "cost table {} has shape {:?}, expected {:?}",
                            i + 1,
                            t.shape,
                            shape
                        )));
                    }
                    if let Some(bad) = t.data.iter().find(|v| !v.is_finite()) {
                        return Err(CoreError::Schema {
                            path: format!("costs.tables[{i}]"),
                            message: format!("non-finite table value {bad}"),
                        });
                    }
                }
                false
            }
            Costs::Congestion(network) => {
                network.validate(players)?;
                if dims.iter().any(|&n| n != 1) {
                    return Err(CoreError::DimensionMismatch(
                        "congestion games use one-dimensional route actions".into(),
                    ));
                }
                for (i, space) in spaces.iter().enumerate() {
                    let expected = congestion::route_points(network.routes.len());
                    match space {
                        ActionSpace::Finite { points } if *points == expected => {}
                        _ => {
                            return Err(CoreError::Schema {
                                path: format!("spaces[{i}]"),
                                message: format!(
                                    "congestion games use the finite route set {{1..{}}}",
                                    network.routes.len()
                                ),
                            })
                        }
                    }
                }
                false
            }
        };

        Ok(GameSpec {
            players,
            dims,
            spaces,
            costs,
            aggregative,
        })
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn space(&self, player: usize) -> &ActionSpace {
        &self.spaces[player]
    }

    pub fn spaces(&self) -> &[ActionSpace] {
        &self.spaces
    }

    pub fn costs(&self) -> &Costs {
        &self.costs
    }

    /// True iff every cost references only the owner's variables and the
    /// aggregate; computed from cost syntax at construction.
    pub fn aggregative(&self) -> bool {
        self.aggregative
    }

    pub fn params(&self) -> Option<&ParamEnv> {
        match &self.costs {
            Costs::Expr { params, .. } => Some(params),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.spaces
            .iter()
            .all(|s| matches!(s, ActionSpace::Finite { .. }))
    }

    /// Number of joint profiles of a finite game.
    pub fn profile_count(&self) -> Option<u128> {
        self.spaces
            .iter()
            .map(|s| s.point_count().map(|c| c as u128))
            .try_fold(1u128, |acc, c| c.and_then(|c| acc.checked_mul(c)))
    }

    pub fn membership_check(&self, x: &JointStrategy) -> Result<()> {
        if x.players() != self.players {
            return Err(CoreError::DimensionMismatch(format!(
                "strategy has {} actions for {} players",
                x.players(),
                self.players
            )));
        }
        for (i, a) in x.0.iter().enumerate() {
            if !self.spaces[i].contains(a) {
                return Err(CoreError::OutOfSpace(format!(
                    "player {}: action {:?} is not in its action space",
                    i + 1,
                    a
                )));
            }
        }
        Ok(())
    }

    /// Builds the joint strategy for per-player finite action indices.
    pub fn profile_from_indices(&self, idx: &[usize]) -> Result<JointStrategy> {
        if idx.len() != self.players {
            return Err(CoreError::DimensionMismatch(format!(
                "{} indices for {} players",
                idx.len(),
                self.players
            )));
        }
        let mut actions = Vec::with_capacity(self.players);
        for (i, &a) in idx.iter().enumerate() {
            match &self.spaces[i] {
                ActionSpace::Finite { points } => {
                    let p = points.get(a).ok_or_else(|| {
                        CoreError::InvalidInput(format!(
                            "player {}: action index {a} out of range",
                            i + 1
                        ))
                    })?;
                    actions.push(p.clone());
                }
                _ => {
                    return Err(CoreError::InvalidInput(
                        "indexed profiles need finite action spaces".into(),
                    ))
                }
            }
        }
        Ok(JointStrategy(actions))
    }

    /// Finite-game action indices of a joint strategy.
    pub fn indices_of(&self, x: &JointStrategy) -> Result<Vec<usize>> {
        x.0.iter()
            .enumerate()
            .map(|(i, a)| {
                self.spaces[i].locate(a).ok_or_else(|| {
                    CoreError::OutOfSpace(format!(
                        "player {}: action {:?} is not a declared point",
                        i + 1,
                        a
                    ))
                })
            })
            .collect()
    }

    /// The all-zero strategy when every space contains it.
    pub fn zero_strategy(&self) -> Result<JointStrategy> {
        let z = JointStrategy::zeros(&self.dims);
        self.membership_check(&z)?;
        Ok(z)
    }

    /// `f_i(x)`.
    pub fn evaluate_cost(&self, player: usize, x: &JointStrategy) -> Result<f64> {
        self.membership_check(x)?;
        self.evaluate_cost_unchecked(player, x)
    }

    /// Cost evaluation without the membership check; used by inner loops
    /// that construct provably in-space profiles.
    pub fn evaluate_cost_unchecked(&self, player: usize, x: &JointStrategy) -> Result<f64> {
        if player >= self.players {
            return Err(CoreError::InvalidInput(format!(
                "player index {player} in a {}-player game",
                self.players
            )));
        }
        match &self.costs {
            Costs::Expr { exprs, params } => exprs[player].evaluate(&x.0, params),
            Costs::Table { tables } => {
                let idx = self.indices_of(x)?;
                Ok(tables[player].value(&idx))
            }
            Costs::Congestion(network) => {
                let routes = self.indices_of(x)?;
                Ok(network.player_cost(player, &routes))
            }
        }
    }

    /// All joint profiles of a finite game in lexicographic index order.
    pub fn enumerate_profiles(&self) -> Result<Vec<JointStrategy>> {
        let counts: Vec<usize> = self
            .spaces
            .iter()
            .map(|s| {
                s.point_count()
                    .ok_or_else(|| CoreError::InvalidInput("game is not finite".into()))
            })
            .collect::<Result<_>>()?;
        let total: usize = counts.iter().product();
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; self.players];
        for _ in 0..total {
            out.push(self.profile_from_indices(&idx)?);
            for k in (0..self.players).rev() {
                idx[k] += 1;
                if idx[k] < counts[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        Ok(out)
    }
}

/// Looks for a player whose cost never responds to its own action: verdict
/// `abnormal` (with the witness player) when, at every sampled opponent
/// context, the spread of `f_i` over sampled own actions stays within the
/// tolerance band.
pub fn detect_abnormal(
    g: &GameSpec,
    samples: usize,
    seed: u64,
    tol: f64,
    radius: f64,
) -> Result<TestReport> {
    let (pool, exhaustive) = sample::sample_strategies(g, samples.max(2), seed, radius);
    let mut report = TestReport::new("abnormal");
    let mut variation_entries = Vec::new();

    for i in 0..g.players() {
        // own-action candidates inherited from the pool (specials included)
        let mut own: Vec<Vec<f64>> = Vec::new();
        for s in &pool {
            if !own.iter().any(|a| coords_close(a, s.action(i))) {
                own.push(s.action(i).to_vec());
            }
        }
        let mut max_spread = 0.0f64;
        let mut witness: Option<VariationEntry> = None;
        let mut scale = 0.0f64;
        for ctx in &pool {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            let mut lo_a = 0usize;
            let mut hi_a = 0usize;
            for (k, a) in own.iter().enumerate() {
                let v = g.evaluate_cost_unchecked(i, &ctx.with_action(i, a))?;
                scale = scale.max(v.abs());
                if v < lo {
                    lo = v;
                    lo_a = k;
                }
                if v > hi {
                    hi = v;
                    hi_a = k;
                }
            }
            let spread = hi - lo;
            if spread > max_spread {
                max_spread = spread;
                witness = Some(VariationEntry {
                    player: i + 1,
                    context: ctx.clone(),
                    action_a: own[lo_a].clone(),
                    action_b: own[hi_a].clone(),
                    spread,
                });
            }
        }
        report.samples_used += pool.len() * own.len();
        if max_spread <= tol_band(tol, scale) {
            report.residual_max = max_spread;
            report.witness = Some(Witness::Player {
                player: i + 1,
                detail: format!(
                    "cost varies by at most {max_spread:.3e} in its own action across {} contexts",
                    pool.len()
                ),
            });
            report.exhaustive = exhaustive;
            report.label = format!("abnormal (player {})", i + 1);
            report.verdict = Verdict::Pass;
            return Ok(report);
        }
        if let Some(w) = witness {
            variation_entries.push(w);
        }
    }

    report.residual_max = variation_entries
        .iter()
        .map(|e| e.spread)
        .fold(0.0, f64::max);
    report.witness = Some(Witness::Variations {
        entries: variation_entries,
    });
    report.exhaustive = exhaustive;
    report.label = if exhaustive {
        "not abnormal".into()
    } else {
        "not abnormal (sampled)".into()
    };
    report.verdict = Verdict::Fail;
    Ok(report)
}
