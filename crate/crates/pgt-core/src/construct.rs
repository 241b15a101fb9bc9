//! Closed-form potential constructors and verifiers.
//!
//! Three constructions, all exposed through the CLI method names:
//!
//! * `theorem5` ([`construct_theorem5`]): the reflection form
//!   `phi(z) = -h_P(z, -z)` with the constant chosen so `phi(0) = 0`.
//!   Needs symmetric action sets containing the origin (or costs on all of
//!   `R^n`).
//! * `theorem8` ([`construct_theorem8`]): the pairwise-sum form: the cost
//!   increments of the first two (three, for an odd player count) players
//!   along the canonical path from the origin, plus one two-player increment
//!   term per remaining player pair. Same gate.
//! * `rosenthal` ([`construct_rosenthal`]): the congestion-game potential
//!   `sum_e sum_{k<=v_e(x)} C_e(k)`, with the self-loop constant subtracted
//!   in the augmented variant.
//!
//! The constructors evaluate their defining formula on any input game; on a
//! game that is not a potential game the result simply fails
//! [`verify_exact_potential`], which is the intended detection route.

use serde::Deserialize;

use crate::criteria::PotentialTable;
use crate::error::{CoreError, Result};
use crate::expr::{parse_expression, Expr, ParamEnv};
use crate::game::sample::{sample_actions, sample_strategies, subseed};
use crate::game::{CongestionNetwork, Costs, GameSpec, JointStrategy};
use crate::path::{h_path_targets, mixed_radix};
use crate::report::{ResidualTracker, TestReport, Witness};
use crate::CheckConfig;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// How a [`PotentialFn`] computes its values.
#[derive(Debug, Clone)]
pub enum PotentialSource {
    /// `phi(z) = -h_P(z, -z)`.
    Reflection,
    /// The pairwise-sum construction (prefix increments plus pair terms).
    PairwiseSum,
    /// The congestion potential; self-contained so it can be evaluated on
    /// both the route-profile game and its normal-form expansion.
    Rosenthal {
        network: CongestionNetwork,
        players: usize,
        augmented: bool,
    },
    /// A tabulated potential over the profiles of a finite game.
    Table(PotentialTable),
    /// A user- or export-supplied expression.
    Expression(Expr),
}

/// An evaluable scalar function on the joint action set, with provenance.
#[derive(Debug, Clone)]
pub struct PotentialFn {
    /// Construction method: `theorem5`, `theorem8`, `rosenthal`, `oracle`,
    /// or `user`.
    pub method: String,
    /// `phi(0)=0` or `phi(lex-first)=0`.
    pub normalization: String,
    pub source: PotentialSource,
}

impl PotentialFn {
    pub fn from_oracle_table(table: PotentialTable) -> PotentialFn {
        PotentialFn {
            method: "oracle".into(),
            normalization: "phi(lex-first)=0".into(),
            source: PotentialSource::Table(table),
        }
    }

    pub fn from_expression(expr: Expr) -> PotentialFn {
        PotentialFn {
            method: "user".into(),
            normalization: "as given".into(),
            source: PotentialSource::Expression(expr),
        }
    }

    pub fn evaluate(&self, g: &GameSpec, x: &JointStrategy) -> Result<f64> {
        match &self.source {
            PotentialSource::Reflection => {
                let zero = g.zero_strategy()?;
                Ok(-h_path_targets(g, x, &zero)?)
            }
            PotentialSource::PairwiseSum => pairwise_sum_value(g, x),
            PotentialSource::Rosenthal {
                network,
                players,
                augmented,
            } => Ok(rosenthal_value(network, *players, *augmented, x)),
            PotentialSource::Table(table) => {
                let idx = g.indices_of(x)?;
                Ok(table.value(&idx))
            }
            PotentialSource::Expression(expr) => {
                let empty = ParamEnv::new();
                let params = g.params().unwrap_or(&empty);
                expr.evaluate(&x.0, params)
            }
        }
    }

    /// Symbolic form for expression-backed games, where the constructor
    /// formulas compose into a closed-form expression by zero-substitution.
    pub fn to_expression(&self, g: &GameSpec) -> Option<Expr> {
        match &self.source {
            PotentialSource::Expression(e) => Some(e.clone()),
            PotentialSource::Reflection => {
                let exprs = expanded_costs(g)?;
                let n = g.players();
                let mut total = Expr::Const(0.0);
                for i in 0..n {
                    // f_i with players 1..=i zeroed, minus players 1..i zeroed
                    let first = exprs[i].substitute(&|p, _| (p <= i).then_some(Expr::Const(0.0)));
                    let second = exprs[i].substitute(&|p, _| (p < i).then_some(Expr::Const(0.0)));
                    total = Expr::add(total, Expr::sub(first, second));
                }
                Some(Expr::neg(total))
            }
            PotentialSource::PairwiseSum => {
                let exprs = expanded_costs(g)?;
                let n = g.players();
                if n == 1 {
                    let at_zero = exprs[0].substitute(&|_, _| Some(Expr::Const(0.0)));
                    return Some(Expr::sub(exprs[0].clone(), at_zero));
                }
                let prefix_len = prefix_len(n);
                let mut total = Expr::Const(0.0);
                for i in 0..prefix_len {
                    let after = exprs[i].substitute(&|p, _| (p > i).then_some(Expr::Const(0.0)));
                    let before = exprs[i].substitute(&|p, _| (p >= i).then_some(Expr::Const(0.0)));
                    total = Expr::add(total, Expr::sub(after, before));
                }
                let mut a = prefix_len;
                while a + 1 < n {
                    let b = a + 1;
                    let zero_from = |cut: usize| {
                        move |p: usize, _c: usize| (p >= cut).then_some(Expr::Const(0.0))
                    };
                    let p1_i = exprs[a].substitute(&zero_from(b));
                    let p0_i = exprs[a].substitute(&zero_from(a));
                    let p3_j = exprs[b].substitute(&zero_from(b + 1));
                    let p1_j = exprs[b].substitute(&zero_from(b));
                    total = Expr::add(
                        total,
                        Expr::add(Expr::sub(p1_i, p0_i), Expr::sub(p3_j, p1_j)),
                    );
                    a += 2;
                }
                Some(total)
            }
            _ => None,
        }
    }

    /// JSON export: expression text when a closed form exists, otherwise a
    /// table over the profiles of a finite game.
    pub fn export_json(&self, g: &GameSpec) -> Result<serde_json::Value> {
        if let Some(expr) = self.to_expression(g) {
            return Ok(serde_json::json!({
                "kind": "expr",
                "expr": expr.to_string(),
                "method": self.method,
                "normalization": self.normalization,
            }));
        }
        if g.is_finite() {
            let profiles = g.enumerate_profiles()?;
            let mut data = Vec::with_capacity(profiles.len());
            for x in &profiles {
                data.push(self.evaluate(g, x)?);
            }
            let shape: Vec<usize> = g
                .spaces()
                .iter()
                .map(|s| s.point_count().expect("finite"))
                .collect();
            return Ok(serde_json::json!({
                "kind": "table",
                "shape": shape,
                "data": data,
                "method": self.method,
                "normalization": self.normalization,
            }));
        }
        Err(CoreError::InvalidInput(
            "this potential has no closed form and the game is not finite; nothing to export"
                .into(),
        ))
    }
}

fn expanded_costs(g: &GameSpec) -> Option<Vec<Expr>> {
    match g.costs() {
        Costs::Expr { exprs, .. } => Some(
            exprs
                .iter()
                .map(|e| e.expand_aggregates(g.players()))
                .collect(),
        ),
        _ => None,
    }
}

fn prefix_len(n: usize) -> usize {
    if n % 2 == 1 {
        3.min(n)
    } else {
        2
    }
}

fn gate(g: &GameSpec, method: &str) -> Result<()> {
    crate::criteria::symmetric_zero_gate(g).map_err(|reason| {
        CoreError::Inapplicable(format!(
            "{method} needs symmetric action sets containing 0 or costs on all of R^n: {reason}"
        ))
    })
}

/// The reflection construction `phi(z) = -h_P(z, -z)`, normalized so that
/// `phi(0) = 0`.
pub fn construct_theorem5(g: &GameSpec) -> Result<PotentialFn> {
    gate(g, "theorem5")?;
    Ok(PotentialFn {
        method: "theorem5".into(),
        normalization: "phi(0)=0".into(),
        source: PotentialSource::Reflection,
    })
}

/// The pairwise-sum construction, normalized so that `phi(0) = 0`.
/// A single-player game degenerates to `phi = f_1 - f_1(0)`.
pub fn construct_theorem8(g: &GameSpec) -> Result<PotentialFn> {
    gate(g, "theorem8")?;
    Ok(PotentialFn {
        method: "theorem8".into(),
        normalization: "phi(0)=0".into(),
        source: PotentialSource::PairwiseSum,
    })
}

fn pairwise_sum_value(g: &GameSpec, z: &JointStrategy) -> Result<f64> {
    g.membership_check(z)?;
    let n = g.players();
    let zero = g.zero_strategy()?;
    if n == 1 {
        return Ok(g.evaluate_cost_unchecked(0, z)? - g.evaluate_cost_unchecked(0, &zero)?);
    }
    let prefix_len = prefix_len(n);

    // increments of the first players along the canonical path from 0
    let mut total = 0.0;
    let mut current = zero.clone();
    for i in 0..prefix_len {
        let before = g.evaluate_cost_unchecked(i, &current)?;
        current = current.with_action(i, z.action(i));
        let after = g.evaluate_cost_unchecked(i, &current)?;
        total += after - before;
    }

    // one pair term per remaining (a, a+1): the context keeps players
    // before the pair at z and players after it at 0
    let mut a = prefix_len;
    while a + 1 < n {
        let b = a + 1;
        let mut ctx = zero.clone();
        for p in 0..a {
            ctx = ctx.with_action(p, z.action(p));
        }
        let p0 = ctx.clone();
        let p1 = p0.with_action(a, z.action(a));
        let p3 = p1.with_action(b, z.action(b));
        total += g.evaluate_cost_unchecked(a, &p1)? - g.evaluate_cost_unchecked(a, &p0)?
            + g.evaluate_cost_unchecked(b, &p3)?
            - g.evaluate_cost_unchecked(b, &p1)?;
        a += 2;
    }
    Ok(total)
}

/// The congestion potential `sum_e sum_{k=1}^{v_e(x)} C_e(k)`; the augmented
/// variant subtracts the constant `sum_{k=1}^N C_0(k)` of the origin
/// self-loop table, which shifts the potential without affecting any
/// difference.
pub fn construct_rosenthal(g: &GameSpec, augmented: bool) -> Result<PotentialFn> {
    let network = match g.costs() {
        Costs::Congestion(n) => n.clone(),
        _ => {
            return Err(CoreError::InvalidInput(
                "the rosenthal construction needs a congestion game".into(),
            ))
        }
    };
    Ok(PotentialFn {
        method: "rosenthal".into(),
        normalization: if augmented {
            "phi(empty loading) = -sum_k C_0(k)".into()
        } else {
            "phi(empty loading) = 0".into()
        },
        source: PotentialSource::Rosenthal {
            network,
            players: g.players(),
            augmented,
        },
    })
}

fn rosenthal_value(
    network: &CongestionNetwork,
    players: usize,
    augmented: bool,
    x: &JointStrategy,
) -> f64 {
    // loads over real routes; self-loop (0) and artificial (< 0) actions of
    // the augmented game carry no real edges
    let mut loads = vec![0usize; network.edges.len()];
    for i in 0..x.players() {
        let v = x.action(i)[0].round() as i64;
        if v >= 1 {
            for &e in &network.routes[v as usize - 1] {
                loads[e] += 1;
            }
        }
    }
    let mut total = 0.0;
    for (e, edge) in network.edges.iter().enumerate() {
        for k in 0..loads[e] {
            total += edge.cost[k];
        }
    }
    if augmented {
        total -= network.origin_loop_cost[..players].iter().sum::<f64>();
    }
    total
}

/// Checks the defining identity of an exact potential,
/// `f_i(b, x_{ -i}) - f_i(a, x_{-i}) = phi(b, x_{-i}) - phi(a, x_{-i})`,
/// over all (finite, within budget) or sampled unilateral deviations.
pub fn verify_exact_potential(
    g: &GameSpec,
    phi: &PotentialFn,
    cfg: &CheckConfig,
) -> Result<TestReport> {
    let report = TestReport::new("verify-exact");
    let mut tracker = ResidualTracker::new();
    let mut exhaustive = false;

    if let Some(total) = deviation_instance_count(g) {
        if total <= cfg.budget as u128 {
            exhaustive = true;
            let counts: Vec<usize> = g
                .spaces()
                .iter()
                .map(|s| s.point_count().expect("finite"))
                .collect();
            for i in 0..g.players() {
                let others: Vec<usize> = (0..g.players()).filter(|&l| l != i).collect();
                let other_counts: Vec<usize> = others.iter().map(|&l| counts[l]).collect();
                for ctx in mixed_radix(&other_counts) {
                    for a in 0..counts[i] {
                        for b in a + 1..counts[i] {
                            let mut idx = vec![0usize; g.players()];
                            for (k, &l) in others.iter().enumerate() {
                                idx[l] = ctx[k];
                            }
                            idx[i] = a;
                            let low = g.profile_from_indices(&idx)?;
                            idx[i] = b;
                            let high = g.profile_from_indices(&idx)?;
                            check_deviation(g, phi, i, &low, &high, cfg.tol, &mut tracker)?;
                        }
                    }
                }
            }
        }
    }

    if !exhaustive {
        let mut rng = ChaCha8Rng::seed_from_u64(subseed(cfg.seed, 0x7E21));
        let pool_size = ((cfg.budget as f64).sqrt().ceil() as usize).clamp(4, 64);
        let (bases, _) =
            sample_strategies(g, pool_size.max(8), subseed(cfg.seed, 0x31), cfg.radius);
        let pools: Vec<Vec<Vec<f64>>> = (0..g.players())
            .map(|i| {
                sample_actions(
                    g,
                    i,
                    pool_size,
                    subseed(cfg.seed, 0x41 + i as u64),
                    cfg.radius,
                )
            })
            .collect();
        for _ in 0..cfg.budget {
            let i = rng.gen_range(0..g.players());
            let base = &bases[rng.gen_range(0..bases.len())];
            let alt = &pools[i][rng.gen_range(0..pools[i].len())];
            let high = base.with_action(i, alt);
            check_deviation(g, phi, i, base, &high, cfg.tol, &mut tracker)?;
        }
    }

    Ok(tracker.into_report(report, exhaustive))
}

fn deviation_instance_count(g: &GameSpec) -> Option<u128> {
    if !g.is_finite() {
        return None;
    }
    let counts: Vec<u128> = g
        .spaces()
        .iter()
        .map(|s| s.point_count().unwrap() as u128)
        .collect();
    let mut total: u128 = 0;
    for i in 0..counts.len() {
        let pairs = counts[i] * counts[i].saturating_sub(1) / 2;
        let ctx: u128 = counts
            .iter()
            .enumerate()
            .filter(|(l, _)| *l != i)
            .map(|(_, &c)| c)
            .product();
        total = total.saturating_add(pairs.saturating_mul(ctx));
    }
    Some(total)
}

fn check_deviation(
    g: &GameSpec,
    phi: &PotentialFn,
    i: usize,
    low: &JointStrategy,
    high: &JointStrategy,
    tol: f64,
    tracker: &mut ResidualTracker,
) -> Result<()> {
    let cost_delta = g.evaluate_cost_unchecked(i, high)? - g.evaluate_cost_unchecked(i, low)?;
    let phi_delta = phi.evaluate(g, high)? - phi.evaluate(g, low)?;
    tracker.record_eq(cost_delta, phi_delta, tol, || Witness::Equation {
        player: i + 1,
        profile_a: low.clone(),
        profile_b: high.clone(),
        cost_delta,
        potential_delta: phi_delta,
    });
    Ok(())
}

/// Gradient-matching check for expression games and expression candidates:
/// the own-block partials of `phi` must equal those of every `f_i` at the
/// sampled points.
pub fn verify_gradient_match(g: &GameSpec, phi: &Expr, cfg: &CheckConfig) -> Result<TestReport> {
    let (exprs, params) = match g.costs() {
        Costs::Expr { exprs, params } => (exprs, params),
        _ => {
            return Ok(TestReport::inapplicable(
                "verify-gradient",
                "the gradient check needs expression costs",
            ))
        }
    };
    phi.validate_dims(g.dims())?;
    let report = TestReport::new("verify-gradient");

    let mut partials = Vec::new();
    for i in 0..g.players() {
        for k in 0..g.dims()[i] {
            partials.push((i, k, exprs[i].differentiate(i, k), phi.differentiate(i, k)));
        }
    }
    let points_wanted = (cfg.budget / partials.len().max(1)).max(8);
    let (points, _) = sample_strategies(g, points_wanted, subseed(cfg.seed, 0x6A), cfg.radius);

    let mut tracker = ResidualTracker::new();
    for x in &points {
        for (i, k, df, dphi) in &partials {
            let lhs = df.evaluate(&x.0, params)?;
            let rhs = dphi.evaluate(&x.0, params)?;
            tracker.record_eq(lhs, rhs, cfg.tol, || Witness::PointValue {
                point: x.clone(),
                detail: format!(
                    "df{}/dx[{}][{}] vs dphi/dx[{}][{}]",
                    i + 1,
                    i + 1,
                    k + 1,
                    i + 1,
                    k + 1
                ),
                lhs,
                rhs,
            });
        }
    }
    Ok(tracker.into_report(report, false))
}

/// The two sides of the path-increment consistency identity:
/// `(phi(z+y) - phi(z), h_P(z, y))`. Equal within tolerance when `phi` is a
/// potential of the game.
pub fn potential_difference_along_path(
    g: &GameSpec,
    phi: &PotentialFn,
    z: &JointStrategy,
    y: &crate::path::Increments,
) -> Result<(f64, f64)> {
    let target = z.offset(y);
    let phi_delta = phi.evaluate(g, &target)? - phi.evaluate(g, z)?;
    let h = h_path_targets(g, z, &target)?;
    Ok((phi_delta, h))
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum RawPotential {
    Expr {
        expr: String,
        #[serde(default)]
        method: Option<String>,
        #[serde(default)]
        normalization: Option<String>,
    },
    Table {
        shape: Vec<usize>,
        data: Vec<f64>,
        #[serde(default)]
        method: Option<String>,
        #[serde(default)]
        normalization: Option<String>,
    },
}

/// Loads a potential exported by [`PotentialFn::export_json`] (or written by
/// hand) and validates it against the game.
pub fn load_potential_json(text: &str, g: &GameSpec) -> Result<PotentialFn> {
    let raw: RawPotential = serde_json::from_str(text).map_err(|e| CoreError::Schema {
        path: "potential".into(),
        message: e.to_string(),
    })?;
    match raw {
        RawPotential::Expr {
            expr,
            method,
            normalization,
        } => {
            let parsed = parse_expression(&expr, g.dims())?;
            Ok(PotentialFn {
                method: method.unwrap_or_else(|| "user".into()),
                normalization: normalization.unwrap_or_else(|| "as given".into()),
                source: PotentialSource::Expression(parsed),
            })
        }
        RawPotential::Table {
            shape,
            data,
            method,
            normalization,
        } => {
            let game_shape: Vec<usize> = g
                .spaces()
                .iter()
                .map(|s| {
                    s.point_count().ok_or_else(|| {
                        CoreError::InvalidInput("table potentials need a finite game".into())
                    })
                })
                .collect::<Result<_>>()?;
            if shape != game_shape {
                return Err(CoreError::DimensionMismatch(format!(
                    "potential table shape {shape:?} does not match the game shape {game_shape:?}"
                )));
            }
            let expected: usize = shape.iter().product();
            if data.len() != expected {
                return Err(CoreError::DimensionMismatch(format!(
                    "potential table holds {} values, expected {expected}",
                    data.len()
                )));
            }
            Ok(PotentialFn {
                method: method.unwrap_or_else(|| "user".into()),
                normalization: normalization.unwrap_or_else(|| "as given".into()),
                source: PotentialSource::Table(PotentialTable { shape, data }),
            })
        }
    }
}
