//! Common origin-destination network congestion games.
//!
//! `N` players each pick one of `m` routes (edge subsets); the cost of edge
//! `e` is `C_e(v_e)` where `v_e` counts the players whose route uses `e`,
//! and a player pays the sum over the edges of its route.
//!
//! [`expand_congestion_game`] rewrites the game in normal form over route
//! indices. With `augment = true` it also adds the origin self-loop (action
//! `0`) and one artificial mirror route per real route (actions `-1..-m`),
//! priced at a deterministic constant `M = 1 + N * max C_e` so that no
//! player ever prefers them; this augmented action set contains zero and is
//! symmetric, which is what the pairwise potential criterion and the
//! closed-form constructions require.

use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::game::{ActionSpace, Costs, GameSpec, Table};

#[derive(Debug, Clone, Serialize)]
pub struct EdgeCost {
    pub id: String,
    /// `cost[k-1]` is the edge cost when `k` players use the edge.
    pub cost: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CongestionNetwork {
    pub edges: Vec<EdgeCost>,
    /// Routes as indices into `edges`.
    pub routes: Vec<Vec<usize>>,
    /// Cost table of the origin self-loop, `k = 1..N`.
    pub origin_loop_cost: Vec<f64>,
}

/// The 1-based route indices embedded as one-dimensional real points.
pub(crate) fn route_points(m: usize) -> Vec<Vec<f64>> {
    (1..=m).map(|r| vec![r as f64]).collect()
}

impl CongestionNetwork {
    /// Resolves textual edge ids into indices and validates table lengths.
    pub fn resolve(
        edges: Vec<EdgeCost>,
        route_ids: &[Vec<String>],
        origin_loop_cost: Vec<f64>,
        players: usize,
    ) -> Result<CongestionNetwork> {
        let mut routes = Vec::with_capacity(route_ids.len());
        for (r, ids) in route_ids.iter().enumerate() {
            let mut route = Vec::with_capacity(ids.len());
            for id in ids {
                let e =
                    edges
                        .iter()
                        .position(|e| &e.id == id)
                        .ok_or_else(|| CoreError::Schema {
                            path: format!("costs.routes[{r}]"),
                            message: format!("unknown edge id `{id}`"),
                        })?;
                route.push(e);
            }
            routes.push(route);
        }
        let network = CongestionNetwork {
            edges,
            routes,
            origin_loop_cost,
        };
        network.validate(players)?;
        Ok(network)
    }

    pub fn validate(&self, players: usize) -> Result<()> {
        if self.routes.is_empty() {
            return Err(CoreError::Schema {
                path: "costs.routes".into(),
                message: "a congestion game needs at least one route".into(),
            });
        }
        for (r, route) in self.routes.iter().enumerate() {
            if route.is_empty() {
                return Err(CoreError::Schema {
                    path: format!("costs.routes[{r}]"),
                    message: "routes must traverse at least one edge".into(),
                });
            }
            if route.iter().any(|&e| e >= self.edges.len()) {
                return Err(CoreError::Schema {
                    path: format!("costs.routes[{r}]"),
                    message: "route references an unknown edge".into(),
                });
            }
        }
        for (i, e) in self.edges.iter().enumerate() {
            if self.edges[..i].iter().any(|other| other.id == e.id) {
                return Err(CoreError::Schema {
                    path: format!("costs.edges[{i}].id"),
                    message: format!("duplicate edge id `{}`", e.id),
                });
            }
            if e.cost.len() != players {
                return Err(CoreError::Schema {
                    path: format!("costs.edges[{i}].cost"),
                    message: format!(
                        "edge cost table has {} entries, expected one per player count 1..{players}",
                        e.cost.len()
                    ),
                });
            }
            if let Some(bad) = e.cost.iter().find(|v| !v.is_finite()) {
                return Err(CoreError::Schema {
                    path: format!("costs.edges[{i}].cost"),
                    message: format!("non-finite edge cost {bad}"),
                });
            }
        }
        if self.origin_loop_cost.len() != players {
            return Err(CoreError::Schema {
                path: "costs.origin_loop_cost".into(),
                message: format!(
                    "origin loop cost table has {} entries, expected {players}",
                    self.origin_loop_cost.len()
                ),
            });
        }
        Ok(())
    }

    /// Edge loads for a route assignment (0-based route index per player).
    pub fn edge_loads(&self, routes_chosen: &[usize]) -> Vec<usize> {
        let mut loads = vec![0usize; self.edges.len()];
        for &r in routes_chosen {
            for &e in &self.routes[r] {
                loads[e] += 1;
            }
        }
        loads
    }

    /// `f_i = sum_{e in route_i} C_e(v_e)`.
    pub fn player_cost(&self, player: usize, routes_chosen: &[usize]) -> f64 {
        let loads = self.edge_loads(routes_chosen);
        self.routes[routes_chosen[player]]
            .iter()
            .map(|&e| self.edges[e].cost[loads[e] - 1])
            .sum()
    }

    /// The deterministic deterrent price for artificial actions.
    pub fn deterrent_cost(&self, players: usize) -> f64 {
        let max_cost = self
            .edges
            .iter()
            .flat_map(|e| e.cost.iter())
            .fold(f64::NEG_INFINITY, |acc, &v| acc.max(v));
        1.0 + players as f64 * max_cost
    }
}

/// Rewrites a congestion game in normal form over route indices.
///
/// With `augment = false` the action values are `1..m`. With `augment = true`
/// they are `-m..m`: `0` is the origin self-loop and negative values are the
/// artificial mirror routes, all priced at the deterrent constant `M`.
pub fn expand_congestion_game(g: &GameSpec, augment: bool) -> Result<GameSpec> {
    let network = match g.costs() {
        Costs::Congestion(n) => n,
        _ => {
            return Err(CoreError::InvalidInput(
                "only congestion games can be expanded".into(),
            ))
        }
    };
    let players = g.players();
    let m = network.routes.len();
    if m == 0 {
        return Err(CoreError::InvalidInput("no routes to expand".into()));
    }
    let deterrent = network.deterrent_cost(players);

    let values: Vec<f64> = if augment {
        (-(m as i64)..=m as i64).map(|v| v as f64).collect()
    } else {
        (1..=m as i64).map(|v| v as f64).collect()
    };
    let actions = values.len();
    let profile_total = (actions as u128).checked_pow(players as u32);
    match profile_total {
        Some(total) if total <= crate::criteria::ORACLE_SIZE_GUARD => {}
        _ => {
            return Err(CoreError::SizeGuard {
                size: profile_total.unwrap_or(u128::MAX),
                limit: crate::criteria::ORACLE_SIZE_GUARD,
            })
        }
    }
    let spaces: Vec<ActionSpace> = (0..players)
        .map(|_| ActionSpace::Finite {
            points: values.iter().map(|&v| vec![v]).collect(),
        })
        .collect();

    let shape = vec![actions; players];
    let total: usize = shape.iter().product();
    let mut tables = vec![
        Table {
            shape: shape.clone(),
            data: vec![0.0; total],
        };
        players
    ];

    let mut idx = vec![0usize; players];
    for flat in 0..total {
        // real-route loads ignore players parked on the self-loop or on
        // artificial mirror routes
        let mut loads = vec![0usize; network.edges.len()];
        for &a in &idx {
            let v = values[a];
            if v > 0.0 {
                for &e in &network.routes[v as usize - 1] {
                    loads[e] += 1;
                }
            }
        }
        for i in 0..players {
            let v = values[idx[i]];
            tables[i].data[flat] = if v > 0.0 {
                network.routes[v as usize - 1]
                    .iter()
                    .map(|&e| network.edges[e].cost[loads[e] - 1])
                    .sum()
            } else {
                deterrent
            };
        }
        for k in (0..players).rev() {
            idx[k] += 1;
            if idx[k] < actions {
                break;
            }
            idx[k] = 0;
        }
        let _ = flat;
    }

    GameSpec::new(vec![1; players], spaces, Costs::Table { tables })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::game::JointStrategy;

    pub(crate) fn two_route_two_player() -> GameSpec {
        let network = CongestionNetwork::resolve(
            vec![
                EdgeCost {
                    id: "e1".into(),
                    cost: vec![1.0, 2.0],
                },
                EdgeCost {
                    id: "e2".into(),
                    cost: vec![1.0, 2.0],
                },
            ],
            &[vec!["e1".into()], vec!["e2".into()]],
            vec![5.0, 5.0],
            2,
        )
        .unwrap();
        let spaces = vec![
            ActionSpace::Finite {
                points: route_points(2),
            },
            ActionSpace::Finite {
                points: route_points(2),
            },
        ];
        GameSpec::new(vec![1, 1], spaces, Costs::Congestion(network)).unwrap()
    }

    #[test]
    fn shared_edge_cost() {
        let g = two_route_two_player();
        let both_on_e1 = JointStrategy(vec![vec![1.0], vec![1.0]]);
        assert_eq!(g.evaluate_cost(0, &both_on_e1).unwrap(), 2.0);
        assert_eq!(g.evaluate_cost(1, &both_on_e1).unwrap(), 2.0);
        let split = JointStrategy(vec![vec![1.0], vec![2.0]]);
        assert_eq!(g.evaluate_cost(0, &split).unwrap(), 1.0);
        assert_eq!(g.evaluate_cost(1, &split).unwrap(), 1.0);
    }

    #[test]
    fn expansion_matches_direct_evaluation() {
        let g = two_route_two_player();
        let table_game = expand_congestion_game(&g, false).unwrap();
        for profile in table_game.enumerate_profiles().unwrap() {
            for i in 0..2 {
                assert_eq!(
                    table_game.evaluate_cost(i, &profile).unwrap(),
                    g.evaluate_cost(i, &profile).unwrap(),
                    "profile {profile:?} player {i}"
                );
            }
        }
    }

    #[test]
    fn augmented_expansion_prices_artificial_actions() {
        let g = two_route_two_player();
        let aug = expand_congestion_game(&g, true).unwrap();
        assert_eq!(aug.space(0).point_count(), Some(5));
        let deterrent = 1.0 + 2.0 * 2.0;
        for profile in aug.enumerate_profiles().unwrap() {
            for i in 0..2 {
                if profile.action(i)[0] <= 0.0 {
                    assert!(aug.evaluate_cost(i, &profile).unwrap() >= deterrent);
                }
            }
        }
        // augmented action set is symmetric and contains zero
        assert!(aug.space(0).symmetric());
        assert!(aug.space(0).contains_zero());
    }

    #[test]
    fn duplicate_edge_ids_are_rejected() {
        let err = CongestionNetwork::resolve(
            vec![
                EdgeCost {
                    id: "e".into(),
                    cost: vec![1.0],
                },
                EdgeCost {
                    id: "e".into(),
                    cost: vec![2.0],
                },
            ],
            &[vec!["e".into()]],
            vec![0.0],
            1,
        )
        .unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn overlapping_routes_share_edge_loads() {
        // r1 and r2 share edge b: a player on each loads b twice
        let network = CongestionNetwork::resolve(
            vec![
                EdgeCost {
                    id: "a".into(),
                    cost: vec![1.0, 3.0],
                },
                EdgeCost {
                    id: "b".into(),
                    cost: vec![2.0, 5.0],
                },
                EdgeCost {
                    id: "c".into(),
                    cost: vec![1.0, 2.0],
                },
            ],
            &[vec!["a".into(), "b".into()], vec!["b".into(), "c".into()]],
            vec![9.0, 9.0],
            2,
        )
        .unwrap();
        let spaces = vec![
            ActionSpace::Finite {
                points: route_points(2),
            },
            ActionSpace::Finite {
                points: route_points(2),
            },
        ];
        let g = GameSpec::new(vec![1, 1], spaces, Costs::Congestion(network)).unwrap();
        let split = JointStrategy(vec![vec![1.0], vec![2.0]]);
        // player 1 pays a(1) + b(2) = 1 + 5; player 2 pays b(2) + c(1) = 5 + 1
        assert_eq!(g.evaluate_cost(0, &split).unwrap(), 6.0);
        assert_eq!(g.evaluate_cost(1, &split).unwrap(), 6.0);

        let expanded = expand_congestion_game(&g, false).unwrap();
        for profile in expanded.enumerate_profiles().unwrap() {
            for i in 0..2 {
                assert_eq!(
                    expanded.evaluate_cost(i, &profile).unwrap(),
                    g.evaluate_cost(i, &profile).unwrap()
                );
            }
        }
        let (report, table) = crate::criteria::oracle_finite_potential(&expanded, 1e-9).unwrap();
        assert!(report.passed());
        let table = table.unwrap();
        let phi = crate::construct::construct_rosenthal(&g, false).unwrap();
        let profiles = expanded.enumerate_profiles().unwrap();
        let offset = phi.evaluate(&expanded, &profiles[0]).unwrap() - table.data[0];
        for (flat, x) in profiles.iter().enumerate() {
            let gap = (phi.evaluate(&expanded, x).unwrap() - table.data[flat] - offset).abs();
            assert!(gap <= 1e-12);
        }
    }

    #[test]
    fn single_player_single_route() {
        let network = CongestionNetwork::resolve(
            vec![
                EdgeCost {
                    id: "a".into(),
                    cost: vec![3.0],
                },
                EdgeCost {
                    id: "b".into(),
                    cost: vec![4.0],
                },
            ],
            &[vec!["a".into(), "b".into()]],
            vec![9.0],
            1,
        )
        .unwrap();
        let spaces = vec![ActionSpace::Finite {
            points: route_points(1),
        }];
        let g = GameSpec::new(vec![1], spaces, Costs::Congestion(network)).unwrap();
        let expanded = expand_congestion_game(&g, false).unwrap();
        let only = JointStrategy(vec![vec![1.0]]);
        assert_eq!(expanded.evaluate_cost(0, &only).unwrap(), 7.0);
    }
}
