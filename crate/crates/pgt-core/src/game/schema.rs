//! JSON game-spec loading.
//!
//! ```json
//! {
//!   "players": 3,
//!   "dims": [1, 1, 1],
//!   "spaces": [{"kind": "box", "lo": [-10], "hi": [10]}, ...],
//!   "params": {"a": 10, "b": 1, "c": 2},
//!   "costs": {"kind": "expr", "exprs": ["(a - b*xbar[1])*x[1][1] - c*x[1][1]", ...]}
//! }
//! ```
//!
//! Space kinds: `finite` (`points`), `box` (`lo`, `hi`, optional `open_lo`
//! for half-open sets like `(0,1]`), `all`. Cost kinds: `expr`, `table`
//! (nested arrays indexed by action indices in player order), `congestion`
//! (`edges`, `routes` as edge-id lists, `origin_loop_cost`). For congestion
//! costs `dims` and `spaces` may be omitted; they are synthesized as the
//! one-dimensional route-index sets.

use serde::Deserialize;
use std::collections::BTreeMap;
use std::io::Read;

use crate::error::{CoreError, Result};
use crate::expr::{parse_expression, ParamEnv};
use crate::game::congestion::{route_points, CongestionNetwork, EdgeCost};
use crate::game::{ActionSpace, Costs, GameSpec, Table};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGame {
    players: usize,
    #[serde(default)]
    dims: Option<Vec<usize>>,
    #[serde(default)]
    spaces: Option<Vec<RawSpace>>,
    #[serde(default)]
    params: BTreeMap<String, f64>,
    costs: RawCosts,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum RawSpace {
    Finite {
        points: Vec<Vec<f64>>,
    },
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
        #[serde(default)]
        open_lo: bool,
    },
    All {},
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum RawCosts {
    Expr {
        exprs: Vec<String>,
    },
    Table {
        tables: Vec<serde_json::Value>,
    },
    Congestion {
        edges: Vec<RawEdge>,
        routes: Vec<Vec<String>>,
        origin_loop_cost: Vec<f64>,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    id: String,
    cost: Vec<f64>,
}

/// Flattens a nested JSON array into a row-major table, validating the shape.
fn parse_table(value: &serde_json::Value, shape: &[usize], path: &str) -> Result<Vec<f64>> {
    match shape.split_first() {
        None => match value.as_f64() {
            Some(v) => Ok(vec![v]),
            None => Err(CoreError::Schema {
                path: path.into(),
                message: "expected a number at this table depth".into(),
            }),
        },
        Some((&head, rest)) => {
            let arr = value.as_array().ok_or_else(|| CoreError::Schema {
                path: path.into(),
                message: "expected a nested array".into(),
            })?;
            if arr.len() != head {
                return Err(CoreError::Schema {
                    path: path.into(),
                    message: format!("expected {head} entries, found {}", arr.len()),
                });
            }
            let mut out = Vec::new();
            for (i, v) in arr.iter().enumerate() {
                out.extend(parse_table(v, rest, &format!("{path}[{i}]"))?);
            }
            Ok(out)
        }
    }
}

fn convert_space(raw: &RawSpace) -> ActionSpace {
    match raw {
        RawSpace::Finite { points } => ActionSpace::Finite {
            points: points.clone(),
        },
        RawSpace::Box { lo, hi, open_lo } => ActionSpace::Box {
            lo: lo.clone(),
            hi: hi.clone(),
            open_lo: *open_lo,
        },
        RawSpace::All {} => ActionSpace::All { dim: 0 },
    }
}

/// Loads and fully validates a game-spec JSON document.
pub fn load_game_spec_from_str(text: &str) -> Result<GameSpec> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawGame = serde_path_to_error::deserialize(de).map_err(|e| CoreError::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;

    if raw.players == 0 {
        return Err(CoreError::Schema {
            path: "players".into(),
            message: "a game needs at least one player".into(),
        });
    }

    let is_congestion = matches!(raw.costs, RawCosts::Congestion { .. });

    let dims = match (&raw.dims, is_congestion) {
        (Some(d), _) => d.clone(),
        (None, true) => vec![1; raw.players],
        (None, false) => {
            return Err(CoreError::Schema {
                path: "dims".into(),
                message: "dims is required for expression and table games".into(),
            })
        }
    };
    if dims.len() != raw.players {
        return Err(CoreError::Schema {
            path: "dims".into(),
            message: format!("{} entries for {} players", dims.len(), raw.players),
        });
    }

    let costs = match &raw.costs {
        RawCosts::Expr { exprs } => {
            if exprs.len() != raw.players {
                return Err(CoreError::Schema {
                    path: "costs.exprs".into(),
                    message: format!("{} expressions for {} players", exprs.len(), raw.players),
                });
            }
            let parsed = exprs
                .iter()
                .enumerate()
                .map(|(i, src)| {
                    parse_expression(src, &dims).map_err(|e| CoreError::Schema {
                        path: format!("costs.exprs[{i}]"),
                        message: e.to_string(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Costs::Expr {
                exprs: parsed,
                params: raw.params.clone() as ParamEnv,
            }
        }
        RawCosts::Table { tables } => {
            let spaces = raw.spaces.as_ref().ok_or_else(|| CoreError::Schema {
                path: "spaces".into(),
                message: "table games must declare finite spaces".into(),
            })?;
            let shape: Vec<usize> = spaces
                .iter()
                .enumerate()
                .map(|(i, s)| match s {
                    RawSpace::Finite { points } => Ok(points.len()),
                    _ => Err(CoreError::Schema {
                        path: format!("spaces[{i}]"),
                        message: "table costs require finite action spaces".into(),
                    }),
                })
                .collect::<Result<_>>()?;
            let parsed = tables
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    let data = parse_table(t, &shape, &format!("costs.tables[{i}]"))?;
                    Table::new(shape.clone(), data)
                })
                .collect::<Result<Vec<_>>>()?;
            Costs::Table { tables: parsed }
        }
        RawCosts::Congestion {
            edges,
            routes,
            origin_loop_cost,
        } => {
            let edges = edges
                .iter()
                .map(|e| EdgeCost {
                    id: e.id.clone(),
                    cost: e.cost.clone(),
                })
                .collect();
            let network =
                CongestionNetwork::resolve(edges, routes, origin_loop_cost.clone(), raw.players)?;
            Costs::Congestion(network)
        }
    };

    let spaces: Vec<ActionSpace> = match (&raw.spaces, is_congestion) {
        (Some(raw_spaces), _) => {
            if raw_spaces.len() != raw.players {
                return Err(CoreError::Schema {
                    path: "spaces".into(),
                    message: format!("{} entries for {} players", raw_spaces.len(), raw.players),
                });
            }
            raw_spaces
                .iter()
                .zip(&dims)
                .map(|(s, &n)| match convert_space(s) {
                    ActionSpace::All { .. } => ActionSpace::All { dim: n },
                    other => other,
                })
                .collect()
        }
        (None, true) => {
            let m = match &costs {
                Costs::Congestion(n) => n.routes.len(),
                _ => unreachable!(),
            };
            (0..raw.players)
                .map(|_| ActionSpace::Finite {
                    points: route_points(m),
                })
                .collect()
        }
        (None, false) => {
            return Err(CoreError::Schema {
                path: "spaces".into(),
                message: "spaces is required for expression and table games".into(),
            })
        }
    };

    GameSpec::new(dims, spaces, costs)
}

pub fn load_game_spec(mut reader: impl Read) -> Result<GameSpec> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    load_game_spec_from_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const COURNOT3: &str = r#"{
        "players": 3,
        "dims": [1, 1, 1],
        "spaces": [
            {"kind": "box", "lo": [0], "hi": [10]},
            {"kind": "box", "lo": [0], "hi": [10]},
            {"kind": "box", "lo": [0], "hi": [10]}
        ],
        "params": {"a": 10, "b": 1, "c": 2},
        "costs": {"kind": "expr", "exprs": [
            "(a - b*xbar[1])*x[1][1] - c*x[1][1]",
            "(a - b*xbar[1])*x[2][1] - c*x[2][1]",
            "(a - b*xbar[1])*x[3][1] - c*x[3][1]"
        ]}
    }"#;

    #[test]
    fn loads_quantity_game() {
        let g = load_game_spec_from_str(COURNOT3).unwrap();
        assert_eq!(g.players(), 3);
        assert!(g.aggregative());
        let x = crate::game::JointStrategy(vec![vec![1.0], vec![2.0], vec![3.0]]);
        assert_eq!(g.evaluate_cost(0, &x).unwrap(), 2.0);
    }

    #[test]
    fn empty_player_list_is_a_schema_error() {
        let err = load_game_spec_from_str(
            r#"{"players": 0, "dims": [], "spaces": [], "costs": {"kind": "expr", "exprs": []}}"#,
        )
        .unwrap_err();
        assert!(matches!(err, CoreError::Schema { .. }), "{err}");
    }

    #[test]
    fn loads_congestion_game() {
        let src = r#"{
            "players": 2,
            "costs": {"kind": "congestion",
                "edges": [{"id": "e1", "cost": [1, 2]}, {"id": "e2", "cost": [1, 2]}],
                "routes": [["e1"], ["e2"]],
                "origin_loop_cost": [5, 5]}
        }"#;
        let g = load_game_spec_from_str(src).unwrap();
        assert!(matches!(g.costs(), Costs::Congestion(_)));
        assert_eq!(g.space(0).point_count(), Some(2));
    }

    #[test]
    fn schema_errors_carry_key_paths() {
        let err = load_game_spec_from_str(
            r#"{"players": 1, "dims": [1], "spaces": [{"kind": "box", "lo": [0], "hi": "x"}],
                "costs": {"kind": "expr", "exprs": ["x[1][1]"]}}"#,
        )
        .unwrap_err();
        match err {
            CoreError::Schema { path, .. } => assert!(path.contains("spaces"), "path: {path}"),
            other => panic!("expected schema error, got {other}"),
        }
    }

    #[test]
    fn bad_expression_points_at_player() {
        let err = load_game_spec_from_str(
            r#"{"players": 1, "dims": [1], "spaces": [{"kind": "all"}],
                "costs": {"kind": "expr", "exprs": ["x[2][1]"]}}"#,
        )
        .unwrap_err();
        match err {
            CoreError::Schema { path, message } => {
                assert_eq!(path, "costs.exprs[0]");
                assert!(message.contains("player index"), "{message}");
            }
            other => panic!("expected schema error, got {other}"),
        }
    }

    #[test]
    fn table_shape_mismatch_is_reported() {
        let err = load_game_spec_from_str(
            r#"{"players": 2, "dims": [1, 1],
                "spaces": [{"kind": "finite", "points": [[0], [1]]},
                            {"kind": "finite", "points": [[0], [1]]}],
                "costs": {"kind": "table", "tables": [[[1, -1], [-1, 1]], [[-1, 1], [1]]]}}"#,
        )
        .unwrap_err();
        match err {
            CoreError::Schema { path, .. } => assert!(path.starts_with("costs.tables[1]")),
            other => panic!("expected schema error, got {other}"),
        }
    }

    #[test]
    fn unbound_parameter_is_rejected() {
        let err = load_game_spec_from_str(
            r#"{"players": 1, "dims": [1], "spaces": [{"kind": "all"}], "params": {},
                "costs": {"kind": "expr", "exprs": ["q*x[1][1]"]}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("q"), "{err}");
    }
}
