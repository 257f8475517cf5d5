//! The featherweight Cypher fragment: AST, parser, printer, static checks and
//! interpreter.

pub mod ast;
pub mod check;
pub mod eval;
pub mod parse;
mod print;

pub use ast::*;
pub use eval::eval_query;
pub use parse::{parse_pred, parse_query};
