//! Decides whether a game admits an exact, ordinal, or generalized ordinal
//! potential using difference-based criteria, constructs potential functions
//! in closed form, and exploits them for equilibrium computation.
//!
//! The criteria work on cost *differences* along deviation paths, so they
//! apply uniformly to finite table games, congestion games, and smooth
//! expression games; no integration and, except for the optional
//! gradient/Hessian checks, no differentiation.
//!
//! Module map:
//! * [`expr`]: the cost-expression language: parse, evaluate, differentiate.
//! * [`game`]: game specs, action spaces, loading, sampling, abnormality.
//! * [`path`]: deviation paths and the increment sums `I(Q,f)`, `h_P`, `h_ij`.
//! * [`criteria`]: exact-potentiality tests plus the finite brute-force oracle.
//! * [`construct`]: closed-form potential constructors and verifiers.
//! * [`ordinal`]: ordinal and generalized-ordinal sufficient conditions.
//! * [`equilibrium`]: potential minimization, Nash checks, dynamics.
//!
//! # Example
//!
//! Decide potentiality of a two-player quantity game and construct a
//! verified potential:
//!
//! ```
//! use pgt_core::construct::{construct_theorem8, verify_exact_potential};
//! use pgt_core::criteria::test_pairwise;
//! use pgt_core::{load_game_spec_from_str, CheckConfig, Verdict};
//!
//! let game = load_game_spec_from_str(
//!     r#"{
//!         "players": 2,
//!         "dims": [1, 1],
//!         "spaces": [{"kind": "box", "lo": [-5], "hi": [5]},
//!                    {"kind": "box", "lo": [-5], "hi": [5]}],
//!         "params": {"a": 10, "b": 1, "c": 2},
//!         "costs": {"kind": "expr", "exprs": [
//!             "(a - b*xbar[1])*x[1][1] - c*x[1][1]",
//!             "(a - b*xbar[1])*x[2][1] - c*x[2][1]"
//!         ]}
//!     }"#,
//! )
//! .unwrap();
//!
//! let cfg = CheckConfig::default();
//! assert_eq!(test_pairwise(&game, &cfg).unwrap().verdict, Verdict::Pass);
//!
//! let phi = construct_theorem8(&game).unwrap();
//! assert!(verify_exact_potential(&game, &phi, &cfg).unwrap().passed());
//! ```

// index-driven loops over per-player arrays keep the player index visible,
// which this domain leans on heavily
#![allow(clippy::needless_range_loop)]

pub mod construct;
pub mod criteria;
pub mod equilibrium;
pub mod error;
pub mod expr;
pub mod game;
pub mod ordinal;
pub mod path;
pub mod report;

pub use error::{CoreError, Result};
pub use expr::{parse_expression, Expr, ParamEnv};
pub use game::{
    detect_abnormal, expand_congestion_game, load_game_spec, load_game_spec_from_str,
    sample_strategies, ActionSpace, CongestionNetwork, Costs, GameSpec, JointStrategy, Table,
};
pub use report::{approx_eq, TestReport, Verdict, Witness};

/// Shared knobs for every sampled or exhaustive criterion check.
#[derive(Debug, Clone, Copy)]
pub struct CheckConfig {
    /// Maximum number of checked instances; finite index spaces that fit
    /// are enumerated exhaustively instead.
    pub budget: usize,
    pub seed: u64,
    /// Scale-aware equality tolerance; see [`report::approx_eq`].
    pub tol: f64,
    /// Sampling radius for unbounded action spaces.
    pub radius: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            budget: 500,
            seed: 0,
            tol: 1e-9,
            radius: 10.0,
        }
    }
}

impl CheckConfig {
    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}
