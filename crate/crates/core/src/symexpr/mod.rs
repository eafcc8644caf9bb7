//! Expression language for coefficient functions.
//!
//! Every coefficient in the engine (connection coefficients, solved-form
//! right-hand sides, epsilon data) is an [`Expr`]: an immutable tree over
//! named coordinates with rational/float constants, the four arithmetic
//! operations, negation, integer powers, and the elementary functions
//! `sin`, `cos`, `exp`, `log`, `sqrt`.
//!
//! Expressions are pure values: evaluation, differentiation, simplification
//! and printing never mutate their input, so sharing across threads is safe.

mod ast;
mod diff;
mod eval;
mod parse;
mod print;
mod simplify;
mod zero;

pub use ast::{Expr, Number, UnaryFn};
pub use eval::{Binding, Compiled, EvalError};
pub use parse::{parse, ParseError};
pub use simplify::{expr_cmp, simplify};
pub use zero::{exprs_equal, is_zero, ZeroConfig, ZeroTestError, ZeroVerdict};
