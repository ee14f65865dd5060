//! Expression language and command-line front end for `henselk-core`.

pub mod ast;
pub mod commands;
pub mod convert;
pub mod parse;
pub mod render;

pub use commands::run;
pub use parse::{parse_any, parse_cond, parse_expr, ParseError, Parsed};
