//! Symbolic expressions: construction, normalization, differentiation,
//! substitution and evaluation.

mod diff;
mod display;
mod eval;
mod expr;
mod matrix;
mod parse;
mod subst;

pub use diff::{diff, directional, gradient};
pub use eval::{eval_exact, eval_float, Domain, DoubleDouble, Evaluator, Exact, ModP};
pub use expr::{Expr, Node, Symbol};
pub use matrix::{jacobian, ExprMatrix};
pub use parse::{is_identifier, parse_expr, parse_expr_with, ExprParseError};
pub use subst::{substitute, substitute_memo};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SymError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("logarithm of zero")]
    LogOfZero,
    #[error("expression contains exp, ln or a non-integer power")]
    NonRationalNode,
    #[error("no value bound for symbol `{0}`")]
    Unbound(String),
    #[error("exponent too large")]
    ExponentTooLarge,
}
