//! Symbolic expression kernel: construction, canonical normal form,
//! differentiation, substitution, parsing, printing, evaluation and zero tests.

mod canon;
mod diff;
mod eval;
mod expr;
mod linear;
mod normal;
mod parse;
mod print;
pub mod sampling;
mod subst;
mod symbols;
mod zero;

use thiserror::Error;

pub use canon::{canonical_equation, canonical_hash, strip_content};
pub use diff::{differentiate, partial, partial_symbol};
pub use eval::{evaluate, Env, NumFn};
pub use expr::{Expr, Node, Rational, Symbol};
pub use linear::{solve_linear, LinearSolution};
pub use normal::{collect_by_symbols, equivalent, normalize, rational_content, term_factors, term_parts};
pub use parse::{parse, parse_rational, parse_raw, ParseMode};
pub use subst::{substitute, Bindings, Lambda};
pub use symbols::{SymbolKind, SymbolTable, BASE_VARIABLES, BUILTINS, COORDINATES};
pub use zero::{is_zero, is_zero_with, ZeroConfig, ZeroVerdict};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("undeclared symbol '{name}' at byte {offset}")]
    UndeclaredSymbol { name: String, offset: usize },
    #[error("unknown symbol '{0}'")]
    UnknownSymbol(String),
    #[error("function '{name}' has arity {expected}, got {found}")]
    ArityMismatch { name: String, expected: usize, found: usize },
    #[error("symbol '{name}' is already registered as a {existing}")]
    KindConflict { name: String, existing: &'static str },
    #[error("cannot differentiate with respect to '{0}'; only r and t are base variables")]
    UnsupportedVariable(String),
    #[error("no value bound for '{0}'")]
    Unbound(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("non-integral power {exponent} of negative base {base}")]
    NegativeBase { base: f64, exponent: f64 },
    #[error("evaluation produced a non-finite value")]
    NonFinite,
    #[error("equation {0} is not linear in the unknowns")]
    Nonlinear(String),
}
