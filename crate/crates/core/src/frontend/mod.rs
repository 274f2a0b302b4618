//! Text interface: expression syntax, evaluation and the command line.

mod ast;
mod cli;
mod eval;
mod lexer;
mod parser;

use std::fmt;

pub use ast::{print, Basis, ExponentSyntax, Expr, ExprKind, Func, Span};
pub use cli::{run_cli, EXIT_DOMAIN, EXIT_OK, EXIT_USAGE};
pub use eval::{evaluate, exponent_value, EvalContext, EvalError};
pub use parser::parse;

/// A syntax error with its 1-based position and the tokens that would
/// have been accepted there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub expected: Vec<String>,
}

/// 1-based line and column of a byte offset.
pub fn line_column(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

impl ParseError {
    pub(crate) fn at(src: &str, span: Span, message: String, expected: Vec<String>) -> Self {
        let (line, column) = line_column(src, span.start);
        ParseError {
            offset: span.start,
            line,
            column,
            message,
            expected,
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}, column {}: {}",
            self.line, self.column, self.message
        )?;
        if !self.expected.is_empty() {
            write!(f, "; expected one of: {}", self.expected.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}
