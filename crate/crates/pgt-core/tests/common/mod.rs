//! Shared fixtures and random-game generators for the integration suites.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use pgt_core::expr::parse_expression;
use pgt_core::{ActionSpace, Costs, GameSpec, JointStrategy, ParamEnv, Table};

pub fn js(vals: &[f64]) -> JointStrategy {
    JointStrategy(vals.iter().map(|&v| vec![v]).collect())
}

pub fn sym_boxes(n: usize, r: f64) -> Vec<ActionSpace> {
    (0..n)
        .map(|_| ActionSpace::Box {
            lo: vec![-r],
            hi: vec![r],
            open_lo: false,
        })
        .collect()
}

pub fn expr_game(
    dims: Vec<usize>,
    spaces: Vec<ActionSpace>,
    sources: &[&str],
    params: &[(&str, f64)],
) -> GameSpec {
    let exprs = sources
        .iter()
        .map(|s| parse_expression(s, &dims).unwrap())
        .collect();
    let env: ParamEnv = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    GameSpec::new(dims, spaces, Costs::Expr { exprs, params: env }).unwrap()
}

/// The quantity-competition game with N players on [-10, 10], costs
/// `(a - b*xbar)*x_i - c*x_i`, a=10, b=1, c=2.
pub fn cournot(n: usize) -> GameSpec {
    let dims = vec![1; n];
    let sources: Vec<String> = (1..=n)
        .map(|i| format!("(a - b*xbar[1])*x[{i}][1] - c*x[{i}][1]"))
        .collect();
    let refs: Vec<&str> = sources.iter().map(|s| s.as_str()).collect();
    expr_game(
        dims,
        sym_boxes(n, 10.0),
        &refs,
        &[("a", 10.0), ("b", 1.0), ("c", 2.0)],
    )
}

pub fn matching_pennies() -> GameSpec {
    let spaces = vec![
        ActionSpace::Finite {
            points: vec![vec![0.0], vec![1.0]],
        },
        ActionSpace::Finite {
            points: vec![vec![0.0], vec![1.0]],
        },
    ];
    let f1 = Table::new(vec![2, 2], vec![1.0, -1.0, -1.0, 1.0]).unwrap();
    let f2 = Table::new(vec![2, 2], vec![-1.0, 1.0, 1.0, -1.0]).unwrap();
    GameSpec::new(
        vec![1, 1],
        spaces,
        Costs::Table {
            tables: vec![f1, f2],
        },
    )
    .unwrap()
}

fn finite_spaces(counts: &[usize], symmetric_zero: bool) -> Vec<ActionSpace> {
    counts
        .iter()
        .map(|&c| {
            let points = if symmetric_zero {
                // symmetric sets containing 0: {-1, 0, 1} style
                (0..c)
                    .map(|a| vec![a as f64 - (c as f64 - 1.0) / 2.0])
                    .collect()
            } else {
                (0..c).map(|a| vec![a as f64]).collect()
            };
            ActionSpace::Finite { points }
        })
        .collect()
}

/// A random finite table game: 2-3 players, 2-3 actions each, integer costs
/// uniform in [-5, 5].
pub fn random_finite_game(rng: &mut ChaCha8Rng, symmetric_zero: bool) -> GameSpec {
    let players = rng.gen_range(2..=3);
    let counts: Vec<usize> = (0..players)
        .map(|_| {
            if symmetric_zero {
                3
            } else {
                rng.gen_range(2..=3)
            }
        })
        .collect();
    let total: usize = counts.iter().product();
    let tables = (0..players)
        .map(|_| {
            let data = (0..total)
                .map(|_| rng.gen_range(-5i32..=5) as f64)
                .collect();
            Table::new(counts.clone(), data).unwrap()
        })
        .collect();
    GameSpec::new(
        vec![1; players],
        finite_spaces(&counts, symmetric_zero),
        Costs::Table { tables },
    )
    .unwrap()
}

/// A random exact-potential game by construction: `f_i = phi + d_i(x_{-i})`
/// with integer `phi` and per-player dummy terms that ignore the owner's
/// action.
pub fn random_potential_game(rng: &mut ChaCha8Rng) -> GameSpec {
    random_potential_game_with(rng, false)
}

/// As [`random_potential_game`], optionally over symmetric-with-zero action
/// values (three actions `{-1, 0, 1}` per player).
pub fn random_potential_game_with(rng: &mut ChaCha8Rng, symmetric_zero: bool) -> GameSpec {
    let players = rng.gen_range(2..=3);
    let counts: Vec<usize> = (0..players)
        .map(|_| {
            if symmetric_zero {
                3
            } else {
                rng.gen_range(2..=3)
            }
        })
        .collect();
    let total: usize = counts.iter().product();
    let phi: Vec<f64> = (0..total)
        .map(|_| rng.gen_range(-5i32..=5) as f64)
        .collect();

    // strides for decoding flat indices
    let mut strides = vec![1usize; players];
    for k in (0..players - 1).rev() {
        strides[k] = strides[k + 1] * counts[k + 1];
    }
    let tables = (0..players)
        .map(|i| {
            // dummy term indexed by the opponents' sub-profile
            let ctx_total: usize = counts
                .iter()
                .enumerate()
                .filter(|(l, _)| *l != i)
                .map(|(_, &c)| c)
                .product();
            let dummy: Vec<f64> = (0..ctx_total)
                .map(|_| rng.gen_range(-5i32..=5) as f64)
                .collect();
            let data = (0..total)
                .map(|flat| {
                    let mut ctx_index = 0usize;
                    for l in 0..players {
                        if l == i {
                            continue;
                        }
                        let idx = (flat / strides[l]) % counts[l];
                        ctx_index = ctx_index * counts[l] + idx;
                    }
                    phi[flat] + dummy[ctx_index]
                })
                .collect();
            Table::new(counts.clone(), data).unwrap()
        })
        .collect();
    GameSpec::new(
        vec![1; players],
        finite_spaces(&counts, symmetric_zero),
        Costs::Table { tables },
    )
    .unwrap()
}

/// Adds integer noise to one random table entry of one player.
pub fn perturb_one_entry(g: &GameSpec, rng: &mut ChaCha8Rng) -> GameSpec {
    let Costs::Table { tables } = g.costs() else {
        panic!("perturbation needs a table game");
    };
    let mut tables = tables.clone();
    let player = rng.gen_range(0..tables.len());
    let slot = rng.gen_range(0..tables[player].data.len());
    let bump = loop {
        let b = rng.gen_range(-3i32..=3);
        if b != 0 {
            break b as f64;
        }
    };
    tables[player].data[slot] += bump;
    GameSpec::new(
        g.dims().to_vec(),
        g.spaces().to_vec(),
        Costs::Table { tables },
    )
    .unwrap()
}
