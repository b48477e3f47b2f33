//! Exact generation and verification of order conditions for exponential
//! operator-splitting schemes
//!
//! ```text
//! e^{a1 A t} e^{b1 B t} ... e^{as A t} e^{bs B t} = e^{(A+B) t} + O(t^{p+1})
//! ```
//!
//! Module map:
//!
//! * [`exact_arith`]: rationals and polynomials in the stage symbols
//! * [`nc_series`]: truncated non-commutative power series with `exp`/`log`
//! * [`lyndon`]: Lyndon words, bracketings and Lie-basis decomposition
//! * [`order_conditions`]: the Taylor and BCH generators, scheme verification
//!   and leading error terms
//! * [`numeric_validation`]: matrix exponentials and empirical local-error slopes
//! * [`cli`]: command-line frontend, scheme registry and scheme files

pub mod cli;
pub mod exact_arith;
pub mod lyndon;
pub mod nc_series;
pub mod numeric_validation;
pub mod order_conditions;

pub use exact_arith::{CoeffPoly, Monomial, Rational, SymbolId};
pub use lyndon::{
    bracketing, generate_lyndon, lie_decompose, BracketTree, LieDecomposition, LyndonWord,
};
pub use nc_series::{Letter, NCSeries, Word};
pub use order_conditions::{
    conditions_bch, conditions_taylor, leading_error_term, verify_scheme, ConcreteScheme,
    ConditionSystem, Route, SchemeShape, SymbolicScheme,
};
