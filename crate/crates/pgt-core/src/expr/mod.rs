//! Small expression language for cost functions and candidate potentials.
//!
//! Expressions are built from real literals, named scalar parameters,
//! per-player variables `x[i][k]` (player `i`, coordinate `k`, 1-based in
//! source text), aggregate variables `xbar[k]` (the k-th coordinate of the
//! sum of all players' actions), the arithmetic operators `+ - * /`, unary
//! minus, `sqrt`, and `pow(base, exponent)` with a literal real exponent.
//!
//! The grammar is closed under structural differentiation, which is what the
//! gradient- and Hessian-based potential criteria consume. There is no
//! algebraic simplifier beyond constant folding; equality of expressions is
//! always decided numerically by the callers, never structurally.
//!
//! `Expr` and [`ParamEnv`] are immutable after construction and evaluation is
//! pure, so values can be shared freely across threads.

mod parser;

pub use parser::parse_expression;

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{CoreError, Result};

/// Binds parameter names (the `a`, `b`, `c` of a quantity-competition game)
/// to real values. `BTreeMap` keeps iteration and serialization order stable.
pub type ParamEnv = std::collections::BTreeMap<String, f64>;

/// Abstract syntax tree of a real-valued expression.
///
/// Player and coordinate indices are 0-based internally; the text syntax is
/// 1-based and conversion happens in the parser and printer.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Param(String),
    /// `x[player+1][coord+1]` in source text.
    Var {
        player: usize,
        coord: usize,
    },
    /// `xbar[coord+1]`: the coordinate of the aggregate of all actions.
    Aggregate {
        coord: usize,
    },
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    /// Power with a literal exponent; keeps differentiation closed-form.
    Pow(Box<Expr>, f64),
    Sqrt(Box<Expr>),
}

#[allow(clippy::should_implement_trait, clippy::redundant_guards)]
impl Expr {
    /// Sum with constant folding (`0 + e` folds to `e`).
    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
            (Expr::Const(x), e) if x == 0.0 => e,
            (e, Expr::Const(x)) if x == 0.0 => e,
            (a, b) => Expr::Add(Box::new(a), Box::new(b)),
        }
    }

    /// Difference with constant folding; `0 - e` folds to `-e`.
    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x - y),
            (e, Expr::Const(x)) if x == 0.0 => e,
            (Expr::Const(x), e) if x == 0.0 => Expr::neg(e),
            (a, b) => Expr::Sub(Box::new(a), Box::new(b)),
        }
    }

    /// Product with constant folding; multiplication by 0 or 1 folds away.
    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
            (Expr::Const(x), _) | (_, Expr::Const(x)) if x == 0.0 => Expr::Const(0.0),
            (Expr::Const(x), e) if x == 1.0 => e,
            (e, Expr::Const(x)) if x == 1.0 => e,
            (a, b) => Expr::Mul(Box::new(a), Box::new(b)),
        }
    }

    /// Quotient; folds constant numerators of 0 and constant denominators.
    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) if y != 0.0 => Expr::Const(x / y),
            (Expr::Const(x), _) if x == 0.0 => Expr::Const(0.0),
            (e, Expr::Const(y)) if y == 1.0 => e,
            (a, b) => Expr::Div(Box::new(a), Box::new(b)),
        }
    }

    /// Unary minus; a literal operand folds into a signed literal, so the
    /// printer can emit `-3.5` and reparse it to the same AST.
    pub fn neg(e: Expr) -> Expr {
        match e {
            Expr::Const(x) => Expr::Const(-x),
            e => Expr::Neg(Box::new(e)),
        }
    }

    /// Power with literal exponent; exponents 0 and 1 fold away and constant
    /// bases fold when the result is finite.
    pub fn pow(base: Expr, exponent: f64) -> Expr {
        if exponent == 1.0 {
            return base;
        }
        if exponent == 0.0 {
            return Expr::Const(1.0);
        }
        if let Expr::Const(c) = base {
            let v = c.powf(exponent);
            if v.is_finite() {
                return Expr::Const(v);
            }
        }
        Expr::Pow(Box::new(base), exponent)
    }

    pub fn sqrt(e: Expr) -> Expr {
        if let Expr::Const(c) = e {
            if c >= 0.0 {
                return Expr::Const(c.sqrt());
            }
        }
        Expr::Sqrt(Box::new(e))
    }

    pub fn var(player: usize, coord: usize) -> Expr {
        Expr::Var { player, coord }
    }

    /// Evaluates the expression at a joint point, one coordinate vector per
    /// player. IEEE double precision throughout.
    pub fn evaluate(&self, point: &[Vec<f64>], params: &ParamEnv) -> Result<f64> {
        match self {
            Expr::Const(c) => Ok(*c),
            Expr::Param(name) => params
                .get(name)
                .copied()
                .ok_or_else(|| CoreError::InvalidInput(format!("unbound parameter `{name}`"))),
            Expr::Var { player, coord } => point
                .get(*player)
                .and_then(|v| v.get(*coord))
                .copied()
                .ok_or_else(|| {
                    CoreError::DimensionMismatch(format!(
                        "variable x[{}][{}] outside the evaluated point",
                        player + 1,
                        coord + 1
                    ))
                }),
            Expr::Aggregate { coord } => {
                let mut sum = 0.0;
                for (j, v) in point.iter().enumerate() {
                    sum += v.get(*coord).copied().ok_or_else(|| {
                        CoreError::DimensionMismatch(format!(
                            "xbar[{}] needs coordinate {} of player {}",
                            coord + 1,
                            coord + 1,
                            j + 1
                        ))
                    })?;
                }
                Ok(sum)
            }
            Expr::Add(a, b) => Ok(a.evaluate(point, params)? + b.evaluate(point, params)?),
            Expr::Sub(a, b) => Ok(a.evaluate(point, params)? - b.evaluate(point, params)?),
            Expr::Mul(a, b) => Ok(a.evaluate(point, params)? * b.evaluate(point, params)?),
            Expr::Div(a, b) => {
                let num = a.evaluate(point, params)?;
                let den = b.evaluate(point, params)?;
                if den == 0.0 {
                    return Err(CoreError::DivisionByZero(self.to_string()));
                }
                Ok(num / den)
            }
            Expr::Neg(e) => Ok(-e.evaluate(point, params)?),
            Expr::Pow(base, exponent) => {
                let b = base.evaluate(point, params)?;
                if b < 0.0 && exponent.fract() != 0.0 {
                    return Err(CoreError::Domain(format!(
                        "pow of negative base {b} with fractional exponent {exponent}"
                    )));
                }
                if b == 0.0 && *exponent < 0.0 {
                    return Err(CoreError::DivisionByZero(self.to_string()));
                }
                Ok(b.powf(*exponent))
            }
            Expr::Sqrt(e) => {
                let v = e.evaluate(point, params)?;
                if v < 0.0 {
                    return Err(CoreError::Domain(format!("sqrt of negative value {v}")));
                }
                Ok(v.sqrt())
            }
        }
    }

    /// Structural partial derivative with respect to `x[player][coord]`
    /// (0-based). `xbar[coord]` differentiates to 1 for every player's
    /// matching coordinate. The grammar is closed under this operation.
    pub fn differentiate(&self, player: usize, coord: usize) -> Expr {
        match self {
            Expr::Const(_) | Expr::Param(_) => Expr::Const(0.0),
            Expr::Var {
                player: p,
                coord: c,
            } => Expr::Const(if *p == player && *c == coord {
                1.0
            } else {
                0.0
            }),
            Expr::Aggregate { coord: c } => Expr::Const(if *c == coord { 1.0 } else { 0.0 }),
            Expr::Add(a, b) => Expr::add(
                a.differentiate(player, coord),
                b.differentiate(player, coord),
            ),
            Expr::Sub(a, b) => Expr::sub(
                a.differentiate(player, coord),
                b.differentiate(player, coord),
            ),
            Expr::Mul(a, b) => Expr::add(
                Expr::mul(a.differentiate(player, coord), (**b).clone()),
                Expr::mul((**a).clone(), b.differentiate(player, coord)),
            ),
            // (a/b)' = a'/b - a b' / b^2
            Expr::Div(a, b) => Expr::sub(
                Expr::div(a.differentiate(player, coord), (**b).clone()),
                Expr::div(
                    Expr::mul((**a).clone(), b.differentiate(player, coord)),
                    Expr::mul((**b).clone(), (**b).clone()),
                ),
            ),
            Expr::Neg(e) => Expr::neg(e.differentiate(player, coord)),
            // (u^p)' = p u^(p-1) u'
            Expr::Pow(base, exponent) => Expr::mul(
                Expr::mul(
                    Expr::Const(*exponent),
                    Expr::pow((**base).clone(), exponent - 1.0),
                ),
                base.differentiate(player, coord),
            ),
            // sqrt(u)' = u' / (2 sqrt(u))
            Expr::Sqrt(e) => Expr::div(
                e.differentiate(player, coord),
                Expr::mul(Expr::Const(2.0), Expr::sqrt((**e).clone())),
            ),
        }
    }

    /// Collects the free parameter names.
    pub fn free_params(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Param(name) => {
                out.insert(name.clone());
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.free_params(out);
                b.free_params(out);
            }
            Expr::Neg(e) | Expr::Sqrt(e) => e.free_params(out),
            Expr::Pow(base, _) => base.free_params(out),
            _ => {}
        }
    }

    /// True when the expression references only `owner`'s variables and
    /// aggregate variables, i.e. the syntactic aggregative-cost shape.
    pub fn uses_only_own_and_aggregate(&self, owner: usize) -> bool {
        match self {
            Expr::Var { player, .. } => *player == owner,
            Expr::Const(_) | Expr::Param(_) | Expr::Aggregate { .. } => true,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.uses_only_own_and_aggregate(owner) && b.uses_only_own_and_aggregate(owner)
            }
            Expr::Neg(e) | Expr::Sqrt(e) => e.uses_only_own_and_aggregate(owner),
            Expr::Pow(base, _) => base.uses_only_own_and_aggregate(owner),
        }
    }

    /// Checks every variable reference against the declared per-player
    /// dimensions; `xbar` additionally requires a shared dimension.
    pub fn validate_dims(&self, dims: &[usize]) -> Result<()> {
        match self {
            Expr::Var { player, coord } => {
                if *player >= dims.len() || *coord >= dims[*player] {
                    return Err(CoreError::DimensionMismatch(format!(
                        "variable x[{}][{}] exceeds the declared dimensions",
                        player + 1,
                        coord + 1
                    )));
                }
                Ok(())
            }
            Expr::Aggregate { coord } => {
                let shared = dims.first().copied().unwrap_or(0);
                if !dims.iter().all(|&d| d == shared) {
                    return Err(CoreError::DimensionMismatch(
                        "xbar requires all players to share one dimension".into(),
                    ));
                }
                if *coord >= shared {
                    return Err(CoreError::DimensionMismatch(format!(
                        "xbar[{}] exceeds the shared dimension {shared}",
                        coord + 1
                    )));
                }
                Ok(())
            }
            Expr::Const(_) | Expr::Param(_) => Ok(()),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.validate_dims(dims)?;
                b.validate_dims(dims)
            }
            Expr::Neg(e) | Expr::Sqrt(e) => e.validate_dims(dims),
            Expr::Pow(base, _) => base.validate_dims(dims),
        }
    }

    /// Rewrites every `xbar[k]` into the explicit sum of all players' k-th
    /// coordinates. Required before [`Expr::substitute`] when substitutions
    /// are per-player.
    pub fn expand_aggregates(&self, players: usize) -> Expr {
        match self {
            Expr::Aggregate { coord } => {
                let mut sum = Expr::var(0, *coord);
                for j in 1..players {
                    sum = Expr::add(sum, Expr::var(j, *coord));
                }
                sum
            }
            Expr::Const(_) | Expr::Param(_) | Expr::Var { .. } => self.clone(),
            Expr::Add(a, b) => {
                Expr::add(a.expand_aggregates(players), b.expand_aggregates(players))
            }
            Expr::Sub(a, b) => {
                Expr::sub(a.expand_aggregates(players), b.expand_aggregates(players))
            }
            Expr::Mul(a, b) => {
                Expr::mul(a.expand_aggregates(players), b.expand_aggregates(players))
            }
            Expr::Div(a, b) => {
                Expr::div(a.expand_aggregates(players), b.expand_aggregates(players))
            }
            Expr::Neg(e) => Expr::neg(e.expand_aggregates(players)),
            Expr::Pow(base, exponent) => Expr::pow(base.expand_aggregates(players), *exponent),
            Expr::Sqrt(e) => Expr::sqrt(e.expand_aggregates(players)),
        }
    }

    /// Replaces variables for which `map` returns a replacement expression.
    /// Aggregate variables are left untouched; expand them first.
    pub fn substitute(&self, map: &impl Fn(usize, usize) -> Option<Expr>) -> Expr {
        match self {
            Expr::Var { player, coord } => match map(*player, *coord) {
                Some(e) => e,
                None => self.clone(),
            },
            Expr::Const(_) | Expr::Param(_) | Expr::Aggregate { .. } => self.clone(),
            Expr::Add(a, b) => Expr::add(a.substitute(map), b.substitute(map)),
            Expr::Sub(a, b) => Expr::sub(a.substitute(map), b.substitute(map)),
            Expr::Mul(a, b) => Expr::mul(a.substitute(map), b.substitute(map)),
            Expr::Div(a, b) => Expr::div(a.substitute(map), b.substitute(map)),
            Expr::Neg(e) => Expr::neg(e.substitute(map)),
            Expr::Pow(base, exponent) => Expr::pow(base.substitute(map), *exponent),
            Expr::Sqrt(e) => Expr::sqrt(e.substitute(map)),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Const(c) if *c < 0.0 => 3,
            _ => 4,
        }
    }

    fn fmt_with_parens(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            write!(f, "(")?;
            self.fmt_inner(f)?;
            write!(f, ")")
        } else {
            self.fmt_inner(f)
        }
    }

    fn fmt_inner(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Param(name) => write!(f, "{name}"),
            Expr::Var { player, coord } => write!(f, "x[{}][{}]", player + 1, coord + 1),
            Expr::Aggregate { coord } => write!(f, "xbar[{}]", coord + 1),
            Expr::Add(a, b) => {
                a.fmt_with_parens(f, 1)?;
                write!(f, " + ")?;
                // the right operand needs parens when it is itself a sum or
                // difference, so the reparse keeps the association
                b.fmt_with_parens(f, 2)
            }
            Expr::Sub(a, b) => {
                a.fmt_with_parens(f, 1)?;
                write!(f, " - ")?;
                b.fmt_with_parens(f, 2)
            }
            Expr::Mul(a, b) => {
                a.fmt_with_parens(f, 2)?;
                write!(f, "*")?;
                b.fmt_with_parens(f, 3)
            }
            Expr::Div(a, b) => {
                a.fmt_with_parens(f, 2)?;
                write!(f, "/")?;
                b.fmt_with_parens(f, 3)
            }
            Expr::Neg(e) => {
                write!(f, "-")?;
                e.fmt_with_parens(f, 4)
            }
            Expr::Pow(base, exponent) => {
                write!(f, "pow(")?;
                base.fmt_inner(f)?;
                write!(f, ", {exponent})")
            }
            Expr::Sqrt(e) => {
                write!(f, "sqrt(")?;
                e.fmt_inner(f)?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_inner(f)
    }
}
