//! Linear integer arithmetic: terms, formulas, Cooper elimination and models.

mod cooper;
mod cube;
mod formula;
mod parse;
mod term;

pub use cooper::{entails, equivalent, is_sat, is_valid, model, partial_eval, qe_cooper};
pub use formula::Formula;
pub use parse::{parse_formula, parse_term, Lexer, Parser, Tok, Token};
pub use term::{LinTerm, Valuation, Var};
