//! Paths in the joint strategy space and their cost increments.
//!
//! Three quantities drive every potentiality criterion in this crate:
//!
//! * [`path_integral`]: the sum of the deviating player's cost change over
//!   the steps of a deviation path. A game is an exact potential game iff
//!   this vanishes on every simple closed path of length 4.
//! * [`h_path`]: the telescoping N-term sum of cost increments along the
//!   canonical path `z -> (z_1+y_1, z_{-1}) -> ... -> z+y` that deviates
//!   players one at a time in index order. In a potential game it equals
//!   `phi(z+y) - phi(z)` for every potential `phi`.
//! * [`h_pair`]: the four-term two-player increment; the pairwise criterion
//!   compares it against its own decomposition through the origin.
//!
//! Players with a zero increment still occupy a (degenerate) step of the
//! canonical path so the sum matches the definition index for index; those
//! steps contribute zero.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};
use crate::game::sample::{sample_actions, sample_strategies, subseed};
use crate::game::{GameSpec, JointStrategy};

/// A finite path where consecutive strategies differ in at most one
/// player's action, namely the recorded deviator of that step.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationPath {
    pub steps: Vec<JointStrategy>,
    pub deviators: Vec<usize>,
}

impl DeviationPath {
    pub fn new(steps: Vec<JointStrategy>, deviators: Vec<usize>) -> Result<DeviationPath> {
        if steps.len() != deviators.len() + 1 || steps.is_empty() {
            return Err(CoreError::InvalidInput(format!(
                "a path with {} steps needs {} deviators, found {}",
                steps.len(),
                steps.len().saturating_sub(1),
                deviators.len()
            )));
        }
        Ok(DeviationPath { steps, deviators })
    }

    /// Checks the single-deviator structure and membership of every step.
    pub fn validate(&self, g: &GameSpec) -> Result<()> {
        for (e, step) in self.steps.iter().enumerate() {
            g.membership_check(step)
                .map_err(|err| CoreError::PathLeavesSpace {
                    step: e,
                    message: err.to_string(),
                })?;
        }
        for e in 0..self.deviators.len() {
            let d = self.deviators[e];
            if d >= self.steps[e].players() {
                return Err(CoreError::InvalidInput(format!(
                    "deviator {d} out of range at step {e}"
                )));
            }
            for p in 0..self.steps[e].players() {
                if p != d && self.steps[e].action(p) != self.steps[e + 1].action(p) {
                    return Err(CoreError::InvalidInput(format!(
                        "step {e} changes player {} but its deviator is {}",
                        p + 1,
                        d + 1
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn is_closed(&self) -> bool {
        self.steps.first() == self.steps.last()
    }

    /// Distinctness of the strategies after the starting point.
    pub fn is_simple(&self) -> bool {
        let tail = &self.steps[1..];
        tail.iter().enumerate().all(|(k, s)| !tail[..k].contains(s))
    }

    pub fn reversed(&self) -> DeviationPath {
        DeviationPath {
            steps: self.steps.iter().rev().cloned().collect(),
            deviators: self.deviators.iter().rev().copied().collect(),
        }
    }

    /// Joins two paths sharing an endpoint.
    pub fn concat(mut self, other: &DeviationPath) -> Result<DeviationPath> {
        if self.steps.last() != other.steps.first() {
            return Err(CoreError::InvalidInput(
                "paths can only be concatenated at a shared endpoint".into(),
            ));
        }
        self.steps.extend(other.steps[1..].iter().cloned());
        self.deviators.extend(other.deviators.iter().copied());
        Ok(self)
    }
}

/// Per-player increments; one vector per player, zero vectors allowed.
pub type Increments = Vec<Vec<f64>>;

/// All index tuples below the given radices, lexicographic. One empty tuple
/// when `radices` is empty.
pub(crate) fn mixed_radix(radices: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = radices.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; radices.len()];
    for _ in 0..total {
        out.push(idx.clone());
        for k in (0..radices.len()).rev() {
            idx[k] += 1;
            if idx[k] < radices[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    out
}

fn check_increments(g: &GameSpec, y: &Increments) -> Result<()> {
    if y.len() != g.players() || y.iter().zip(g.dims()).any(|(v, &n)| v.len() != n) {
        return Err(CoreError::DimensionMismatch(
            "increment vector does not match the game dimensions".into(),
        ));
    }
    Ok(())
}

/// The canonical path `z -> (z_1+y_1, z_{-1}) -> ... -> z+y` deviating
/// players in index order; every intermediate profile is checked against
/// the joint action set. Joint sets here are always products of per-player
/// sets, so intermediates (whose coordinates come from `z` or `z+y`
/// playerwise) stay feasible whenever the endpoints are; the check still
/// runs and reports the offending step if a caller ever feeds
/// inconsistent data.
pub fn canonical_path(g: &GameSpec, z: &JointStrategy, y: &Increments) -> Result<DeviationPath> {
    check_increments(g, y)?;
    let target = z.offset(y);
    let mut steps = Vec::with_capacity(g.players() + 1);
    let mut current = z.clone();
    steps.push(current.clone());
    for i in 0..g.players() {
        current = current.with_action(i, target.action(i));
        steps.push(current.clone());
    }
    let path = DeviationPath::new(steps, (0..g.players()).collect())?;
    path.validate(g)?;
    Ok(path)
}

/// `I(Q, f) = sum_e f_{i_e}(q^{e+1}) - f_{i_e}(q^e)` with `i_e` the unique
/// deviator of step `e`.
pub fn path_integral(g: &GameSpec, q: &DeviationPath) -> Result<f64> {
    q.validate(g)?;
    let mut sum = 0.0;
    for e in 0..q.deviators.len() {
        let i = q.deviators[e];
        sum += g.evaluate_cost_unchecked(i, &q.steps[e + 1])?
            - g.evaluate_cost_unchecked(i, &q.steps[e])?;
    }
    Ok(sum)
}

/// `I(Q, f)` together with the magnitude of the summed cost values, which
/// callers use to scale the zero-tolerance.
pub fn path_integral_scaled(g: &GameSpec, q: &DeviationPath) -> Result<(f64, f64)> {
    q.validate(g)?;
    let mut sum = 0.0;
    let mut scale = 0.0f64;
    for e in 0..q.deviators.len() {
        let i = q.deviators[e];
        let after = g.evaluate_cost_unchecked(i, &q.steps[e + 1])?;
        let before = g.evaluate_cost_unchecked(i, &q.steps[e])?;
        scale = scale.max(after.abs()).max(before.abs());
        sum += after - before;
    }
    Ok((sum, scale))
}

/// The telescoping sum between two joint profiles: deviating players in
/// index order from `base` to `target`,
/// `sum_i f_i(t_1..t_i, z_{i+1}..) - f_i(t_1..t_{i-1}, z_i..)`.
///
/// Working with explicit targets (rather than `base + increments`) keeps the
/// arithmetic exact when the caller picked both endpoints from an action set.
pub fn h_path_targets(g: &GameSpec, base: &JointStrategy, target: &JointStrategy) -> Result<f64> {
    g.membership_check(base)?;
    g.membership_check(target)?;
    let mut sum = 0.0;
    let mut current = base.clone();
    for i in 0..g.players() {
        let before = g.evaluate_cost_unchecked(i, &current)?;
        current = current.with_action(i, target.action(i));
        let after = g.evaluate_cost_unchecked(i, &current)?;
        sum += after - before;
    }
    Ok(sum)
}

/// `h_P(z, y)`: the canonical-path increment sum from `z` to `z + y`.
pub fn h_path(g: &GameSpec, z: &JointStrategy, y: &Increments) -> Result<f64> {
    check_increments(g, y)?;
    h_path_targets(g, z, &z.offset(y))
}

/// Arguments of the two-player increment `h_ij`.
#[derive(Debug, Clone)]
pub struct PairDeviation {
    /// First player, `i < j`.
    pub i: usize,
    pub j: usize,
    /// Supplies the base actions `z_i`, `z_j` and the context `z_{-ij}`.
    pub base: JointStrategy,
    pub y_i: Vec<f64>,
    pub y_j: Vec<f64>,
}

impl PairDeviation {
    fn target_i(&self) -> Vec<f64> {
        self.base
            .action(self.i)
            .iter()
            .zip(&self.y_i)
            .map(|(a, y)| a + y)
            .collect()
    }

    fn target_j(&self) -> Vec<f64> {
        self.base
            .action(self.j)
            .iter()
            .zip(&self.y_j)
            .map(|(a, y)| a + y)
            .collect()
    }
}

/// The four-term pairwise increment, directly from its definition:
/// `f_i` before/after player `i` moves (with `j` at its base action) plus
/// `f_j` before/after player `j` moves (with `i` already moved).
pub fn h_pair_targets(
    g: &GameSpec,
    i: usize,
    j: usize,
    base: &JointStrategy,
    target_i: &[f64],
    target_j: &[f64],
) -> Result<f64> {
    if i >= j || j >= g.players() {
        return Err(CoreError::InvalidInput(format!(
            "pairwise increments need ordered distinct players, got ({}, {})",
            i + 1,
            j + 1
        )));
    }
    g.membership_check(base)?;
    let moved_i = base.with_action(i, target_i);
    g.membership_check(&moved_i)?;
    let moved_ij = moved_i.with_action(j, target_j);
    g.membership_check(&moved_ij)?;
    Ok(
        g.evaluate_cost_unchecked(i, &moved_i)? - g.evaluate_cost_unchecked(i, base)?
            + g.evaluate_cost_unchecked(j, &moved_ij)?
            - g.evaluate_cost_unchecked(j, &moved_i)?,
    )
}

/// `h_ij(z_i, z_j, y_i, y_j; z_rest)`.
pub fn h_pair(g: &GameSpec, d: &PairDeviation) -> Result<f64> {
    h_pair_targets(g, d.i, d.j, &d.base, &d.target_i(), &d.target_j())
}

/// One simple closed 4-cycle: the pair `(i, j)` deviates to the alternate
/// actions and back, with everyone else pinned at `base`.
#[derive(Debug, Clone)]
pub struct FourCycle {
    pub i: usize,
    pub j: usize,
    pub base: JointStrategy,
    pub alt_i: Vec<f64>,
    pub alt_j: Vec<f64>,
}

impl FourCycle {
    /// `z -> (z_i', z) -> (z_i', z_j', z) -> (z_i, z_j', z) -> z`.
    pub fn path(&self) -> DeviationPath {
        let s0 = self.base.clone();
        let s1 = s0.with_action(self.i, &self.alt_i);
        let s2 = s1.with_action(self.j, &self.alt_j);
        let s3 = s2.with_action(self.i, self.base.action(self.i));
        let s4 = s3.with_action(self.j, self.base.action(self.j));
        DeviationPath {
            steps: vec![s0, s1, s2, s3, s4],
            deviators: vec![self.i, self.j, self.i, self.j],
        }
    }
}

/// Enumerates simple closed 4-cycles over all player pairs.
///
/// Finite games are enumerated exhaustively (lexicographically in
/// `(i, j, action pair of i, action pair of j, context)`) whenever the
/// total count fits the budget; otherwise, and always for continuous games,
/// `budget` cycles are drawn from seeded pools. The second component of the
/// return value tells which of the two happened.
pub fn enumerate_four_cycles(
    g: &GameSpec,
    budget: usize,
    seed: u64,
    radius: f64,
) -> Result<(Vec<FourCycle>, bool)> {
    if g.players() < 2 || budget == 0 {
        return Ok((Vec::new(), budget > 0));
    }

    if g.is_finite() {
        let counts: Vec<usize> = (0..g.players())
            .map(|i| g.space(i).point_count().expect("finite game"))
            .collect();
        let pair_of = |k: usize| (k * (k.saturating_sub(1))) / 2;
        let mut total: u128 = 0;
        for i in 0..g.players() {
            for j in i + 1..g.players() {
                let mut ctx: u128 = 1;
                for (l, &c) in counts.iter().enumerate() {
                    if l != i && l != j {
                        ctx = ctx.saturating_mul(c as u128);
                    }
                }
                total += (pair_of(counts[i]) as u128)
                    .saturating_mul(pair_of(counts[j]) as u128)
                    .saturating_mul(ctx);
            }
        }
        if total <= budget as u128 {
            let mut out = Vec::with_capacity(total as usize);
            let points: Vec<Vec<Vec<f64>>> = (0..g.players())
                .map(|i| match g.space(i) {
                    crate::game::ActionSpace::Finite { points } => points.clone(),
                    _ => unreachable!(),
                })
                .collect();
            for i in 0..g.players() {
                for j in i + 1..g.players() {
                    let others: Vec<usize> =
                        (0..g.players()).filter(|&l| l != i && l != j).collect();
                    let other_counts: Vec<usize> = others.iter().map(|&l| counts[l]).collect();
                    let contexts = mixed_radix(&other_counts);
                    for ai in 0..counts[i] {
                        for ai2 in ai + 1..counts[i] {
                            for aj in 0..counts[j] {
                                for aj2 in aj + 1..counts[j] {
                                    for ctx in &contexts {
                                        let mut idx = vec![0usize; g.players()];
                                        idx[i] = ai;
                                        idx[j] = aj;
                                        for (k, &l) in others.iter().enumerate() {
                                            idx[l] = ctx[k];
                                        }
                                        out.push(FourCycle {
                                            i,
                                            j,
                                            base: g.profile_from_indices(&idx)?,
                                            alt_i: points[i][ai2].clone(),
                                            alt_j: points[j][aj2].clone(),
                                        });
                                    }
                                }
                            }
                        }
                    }
                }
            }
            return Ok((out, true));
        }
    }

    // sampled cycles from seeded pools
    let mut rng = ChaCha8Rng::seed_from_u64(subseed(seed, 0xC7C1E5));
    let pool_size = ((budget as f64).sqrt().ceil() as usize).clamp(4, 64);
    let action_pools: Vec<Vec<Vec<f64>>> = (0..g.players())
        .map(|i| sample_actions(g, i, pool_size, subseed(seed, 0xA0 + i as u64), radius))
        .collect();
    let (contexts, _) = sample_strategies(g, pool_size.max(8), subseed(seed, 0xB0), radius);

    let pairs: Vec<(usize, usize)> = (0..g.players())
        .flat_map(|i| (i + 1..g.players()).map(move |j| (i, j)))
        .collect();
    let mut out = Vec::with_capacity(budget);
    let mut attempts = 0usize;
    while out.len() < budget && attempts < budget * 8 {
        attempts += 1;
        let (i, j) = pairs[rng.gen_range(0..pairs.len())];
        if action_pools[i].len() < 2 || action_pools[j].len() < 2 {
            continue;
        }
        let ai = rng.gen_range(0..action_pools[i].len());
        let ai2 = rng.gen_range(0..action_pools[i].len());
        let aj = rng.gen_range(0..action_pools[j].len());
        let aj2 = rng.gen_range(0..action_pools[j].len());
        if ai == ai2 || aj == aj2 {
            continue;
        }
        let ctx = &contexts[rng.gen_range(0..contexts.len())];
        let base = ctx
            .with_action(i, &action_pools[i][ai])
            .with_action(j, &action_pools[j][aj]);
        out.push(FourCycle {
            i,
            j,
            base,
            alt_i: action_pools[i][ai2].clone(),
            alt_j: action_pools[j][aj2].clone(),
        });
    }
    Ok((out, false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::tests::{cournot3, matching_pennies};
    use crate::game::ActionSpace;

    fn js(vals: &[f64]) -> JointStrategy {
        JointStrategy(vals.iter().map(|&v| vec![v]).collect())
    }

    fn incr(vals: &[f64]) -> Increments {
        vals.iter().map(|&v| vec![v]).collect()
    }

    fn box_game2() -> GameSpec {
        crate::game::tests::expr_game(
            vec![1, 1],
            vec![
                ActionSpace::Box {
                    lo: vec![-5.0],
                    hi: vec![5.0],
                    open_lo: false,
                },
                ActionSpace::Box {
                    lo: vec![-5.0],
                    hi: vec![5.0],
                    open_lo: false,
                },
            ],
            &["x[1][1]*x[2][1]", "x[1][1] + x[2][1]"],
            &[],
        )
    }

    #[test]
    fn canonical_path_unrolls_definition() {
        let g = box_game2();
        let p = canonical_path(&g, &js(&[1.0, 2.0]), &incr(&[1.0, -1.0])).unwrap();
        assert_eq!(
            p.steps,
            vec![js(&[1.0, 2.0]), js(&[2.0, 2.0]), js(&[2.0, 1.0])]
        );
        assert_eq!(p.deviators, vec![0, 1]);
    }

    #[test]
    fn zero_increment_gives_constant_path() {
        let g = cournot3();
        let z = js(&[1.0, 2.0, 3.0]);
        let p = canonical_path(&g, &z, &incr(&[0.0, 0.0, 0.0])).unwrap();
        assert_eq!(p.steps.len(), 4);
        assert!(p.steps.iter().all(|s| *s == z));
        assert_eq!(path_integral(&g, &p).unwrap(), 0.0);
    }

    #[test]
    fn three_player_canonical_path() {
        let g = cournot3();
        let p = canonical_path(&g, &js(&[0.0, 0.0, 0.0]), &incr(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(
            p.steps,
            vec![
                js(&[0.0, 0.0, 0.0]),
                js(&[1.0, 0.0, 0.0]),
                js(&[1.0, 2.0, 0.0]),
                js(&[1.0, 2.0, 3.0]),
            ]
        );
    }

    #[test]
    fn out_of_space_target_is_reported() {
        let g = cournot3();
        let err = canonical_path(&g, &js(&[9.0, 0.0, 0.0]), &incr(&[5.0, 0.0, 0.0])).unwrap_err();
        assert!(matches!(err, CoreError::PathLeavesSpace { .. }), "{err}");
    }

    #[test]
    fn pennies_four_cycle_integral() {
        let g = matching_pennies();
        let cycle = FourCycle {
            i: 0,
            j: 1,
            base: js(&[0.0, 0.0]),
            alt_i: vec![1.0],
            alt_j: vec![1.0],
        };
        let path = cycle.path();
        assert!(path.is_closed() && path.is_simple());
        assert_eq!(path_integral(&g, &path).unwrap(), -8.0);
    }

    #[test]
    fn quantity_game_cycles_vanish() {
        let g = cournot3();
        let (cycles, exhaustive) = enumerate_four_cycles(&g, 64, 5, 10.0).unwrap();
        assert!(!exhaustive);
        assert_eq!(cycles.len(), 64);
        for c in cycles {
            let v = path_integral(&g, &c.path()).unwrap();
            assert!(v.abs() < 1e-9, "cycle residual {v}");
        }
    }

    #[test]
    fn h_path_examples() {
        let g = cournot3();
        // hand-computed term by term: 7 + 10 + 6
        let v = h_path(&g, &js(&[0.0, 0.0, 0.0]), &incr(&[1.0, 2.0, 3.0])).unwrap();
        assert!((v - 23.0).abs() < 1e-12);
        // h_P(z, 0) = 0
        let v = h_path(&g, &js(&[2.0, -1.0, 4.0]), &incr(&[0.0, 0.0, 0.0])).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn h_path_single_deviator_collapses() {
        let g = box_game2();
        let z = js(&[1.0, 2.0]);
        let y = incr(&[1.5, 0.0]);
        let lhs = h_path(&g, &z, &y).unwrap();
        let rhs = g.evaluate_cost(0, &js(&[2.5, 2.0])).unwrap() - g.evaluate_cost(0, &z).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn h_path_equals_path_integral_over_canonical_path() {
        let g = cournot3();
        let z = js(&[1.0, -2.0, 3.5]);
        let y = incr(&[2.0, 4.0, -1.5]);
        let direct = h_path(&g, &z, &y).unwrap();
        let via_path = path_integral(&g, &canonical_path(&g, &z, &y).unwrap()).unwrap();
        assert_eq!(direct, via_path);
    }

    #[test]
    fn h_pair_zero_increment() {
        let g = box_game2();
        let d = PairDeviation {
            i: 0,
            j: 1,
            base: js(&[1.0, 2.0]),
            y_i: vec![0.0],
            y_j: vec![0.0],
        };
        assert_eq!(h_pair(&g, &d).unwrap(), 0.0);
    }

    #[test]
    fn h_pair_matches_written_out_expansion() {
        // the 3-player quantity game at z=(1,1,1), y=(1,1): the four-term
        // sum must equal the fully expanded algebraic form
        let g = cournot3();
        let (a, b, c) = (10.0, 1.0, 2.0);
        let (z1, z2, z3, y1, y2) = (1.0f64, 1.0f64, 1.0f64, 1.0f64, 1.0f64);
        let zbar = z1 + z2 + z3;
        let expansion =
            (a - b * (zbar + y1)) * (z1 + y1) - c * (z1 + y1) - ((a - b * zbar) * z1 - c * z1)
                + (a - b * (zbar + y1 + y2)) * (z2 + y2)
                - c * (z2 + y2)
                - ((a - b * (zbar + y1)) * z2 - c * z2);
        let d = PairDeviation {
            i: 0,
            j: 1,
            base: js(&[z1, z2, z3]),
            y_i: vec![y1],
            y_j: vec![y2],
        };
        let four_term = h_pair(&g, &d).unwrap();
        assert!((four_term - expansion).abs() < 1e-12);
    }

    #[test]
    fn two_player_h_pair_equals_h_path() {
        let g = box_game2();
        let z = js(&[1.0, -2.0]);
        let d = PairDeviation {
            i: 0,
            j: 1,
            base: z.clone(),
            y_i: vec![0.5],
            y_j: vec![1.5],
        };
        let lhs = h_pair(&g, &d).unwrap();
        let rhs = h_path(&g, &z, &incr(&[0.5, 1.5])).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn cycle_counts_on_finite_games() {
        // 2 players x 2 actions: one unordered cycle
        let g = matching_pennies();
        let (cycles, exhaustive) = enumerate_four_cycles(&g, 1000, 0, 10.0).unwrap();
        assert!(exhaustive);
        assert_eq!(cycles.len(), 1);

        // 2 players x 3 actions: C(3,2)^2 = 9
        let spaces = vec![
            ActionSpace::Finite {
                points: vec![vec![0.0], vec![1.0], vec![2.0]],
            },
            ActionSpace::Finite {
                points: vec![vec![0.0], vec![1.0], vec![2.0]],
            },
        ];
        let tables = vec![
            crate::game::Table::new(vec![3, 3], vec![0.0; 9]).unwrap(),
            crate::game::Table::new(vec![3, 3], vec![0.0; 9]).unwrap(),
        ];
        let g33 = GameSpec::new(vec![1, 1], spaces, crate::game::Costs::Table { tables }).unwrap();
        let (cycles, exhaustive) = enumerate_four_cycles(&g33, 1000, 0, 10.0).unwrap();
        assert!(exhaustive);
        assert_eq!(cycles.len(), 9);
    }

    #[test]
    fn zero_budget_gives_empty_stream() {
        let g = matching_pennies();
        let (cycles, _) = enumerate_four_cycles(&g, 0, 0, 10.0).unwrap();
        assert!(cycles.is_empty());
    }

    #[test]
    fn reversal_negates_the_integral() {
        let g = matching_pennies();
        let cycle = FourCycle {
            i: 0,
            j: 1,
            base: js(&[0.0, 0.0]),
            alt_i: vec![1.0],
            alt_j: vec![1.0],
        };
        let p = cycle.path();
        let forward = path_integral(&g, &p).unwrap();
        let backward = path_integral(&g, &p.reversed()).unwrap();
        assert_eq!(forward, -backward);
    }

    #[test]
    fn integral_is_additive_over_concatenation() {
        let g = cournot3();
        let p1 = canonical_path(&g, &js(&[0.0, 0.0, 0.0]), &incr(&[1.0, 2.0, 3.0])).unwrap();
        let p2 = canonical_path(&g, &js(&[1.0, 2.0, 3.0]), &incr(&[2.0, -1.0, 0.5])).unwrap();
        let both = p1.clone().concat(&p2).unwrap();
        let sum = path_integral(&g, &p1).unwrap() + path_integral(&g, &p2).unwrap();
        let joined = path_integral(&g, &both).unwrap();
        assert!((sum - joined).abs() < 1e-12);
    }
}
