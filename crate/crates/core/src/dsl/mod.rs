//! The motion-programming language.
//!
//! A program is a named task holding parameter declarations, `let`
//! bindings and weighted constraints over frame selections:
//!
//! ```text
//! task "hand on head" {
//!     param touch: float = 0.10;
//!     constraint all frames: dist(joint(left_hand).pos, joint(head).pos) == touch;
//! }
//! ```
//!
//! [`parse`] produces an AST, [`typecheck`] resolves joints and names and
//! unrolls `for` loops against a skeleton, and [`compile`] lowers
//! predicates to differentiable error terms: `==` becomes an absolute or L2
//! difference, `<`/`>` become hinges, `and` sums, `or` takes the minimum.

pub mod ast;
mod check;
mod lexer;
mod parser;
mod printer;
mod program;

use std::fmt;

pub use check::{typecheck, CheckedProgram};
pub use parser::parse;
pub use printer::pretty_print;
pub use program::{compile, ErrorProgram, EvalError, Evaluation, FlatObjective, ParamValue, Params};

/// Byte range into the source text.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// A message tied to a source location. Lines and columns are 1-based;
/// columns count characters.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    pub span: Span,
    pub line: usize,
    pub col: usize,
    /// Column just past the span on the starting line.
    pub end_col: usize,
}

impl Diagnostic {
    pub fn error(src: &str, span: Span, message: impl Into<String>) -> Self {
        let start = span.start.min(src.len());
        let end = span.end.clamp(start, src.len());
        let before = &src[..start];
        let line = before.matches('\n').count() + 1;
        let line_start = before.rfind('\n').map_or(0, |i| i + 1);
        let col = src[line_start..start].chars().count() + 1;
        let line_end = src[start..].find('\n').map_or(src.len(), |i| start + i);
        let end_col = col + src[start..end.min(line_end)].chars().count();
        Self { severity: Severity::Error, message: message.into(), span: Span::new(start, end), line, col, end_col }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev} at {}:{}: {}", self.line, self.col, self.message)
    }
}

/// Failure anywhere between source text and a compiled program.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics(pub Vec<Diagnostic>);

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for Diagnostics {}

impl From<Diagnostic> for Diagnostics {
    fn from(d: Diagnostic) -> Self {
        Diagnostics(vec![d])
    }
}

/// Parse, check and compile in one go.
pub fn compile_source(src: &str, skeleton: &crate::kinematics::Skeleton) -> Result<ErrorProgram, Diagnostics> {
    let ast = parse(src)?;
    let checked = typecheck(&ast, src, skeleton)?;
    Ok(compile(checked))
}
