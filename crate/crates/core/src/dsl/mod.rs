//! The MiniStan language: syntax tree, parser and canonical printer.

mod ast;
mod parser;
mod printer;

use thiserror::Error;

pub use ast::{free_check, BinOp, Dist, Expr, Program, Stmt};
pub use parser::{parse_program, parse_program_with_params};
pub use printer::{format_number, print_program};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DslError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("variable `{name}` is used before it is defined")]
    Scope { name: String },
    #[error("variable `{name}` is defined more than once")]
    Redefinition { name: String },
    #[error("program has no statements")]
    EmptyProgram,
}
