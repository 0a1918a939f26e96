//! The textual modeling language: lexer, recursive-descent parser and the
//! canonical printer, plus the [`Diagnostic`] type shared with the checker.
//!
//! Files use the `.buml` extension. A model is a header followed by any
//! number of `class`, `enum`, `association`, `agent` and `page` items:
//!
//! ```
//! use forge_core::dsl::{parse_model, print_model};
//!
//! let src = "model Shop\n\nclass Item {\n  attr label: str [required]\n}\n";
//! let model = parse_model(src).unwrap();
//! assert_eq!(model.entities[0].name, "Item");
//! assert_eq!(print_model(&model), src);
//! ```

mod lexer;
mod parser;
mod printer;

use std::fmt;

pub use crate::model::SourceSpan;
pub use lexer::{is_keyword, KEYWORDS};
pub use parser::parse_model;
pub use printer::print_model;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// A parser or checker finding. `code` is one of the stable codes in
/// [`codes`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: &'static str,
    pub message: String,
    pub span: SourceSpan,
}

impl Diagnostic {
    pub fn error(code: &'static str, message: impl Into<String>, span: SourceSpan) -> Self {
        Diagnostic { severity: Severity::Error, code, message: message.into(), span }
    }

    pub fn warning(code: &'static str, message: impl Into<String>, span: SourceSpan) -> Self {
        Diagnostic { severity: Severity::Warning, code, message: message.into(), span }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

/// Renders `<severity>[<code>]: <message> at <file>:<line>:<col>`.
pub fn render_diagnostic(d: &Diagnostic, file: &str) -> String {
    format!(
        "{}[{}]: {} at {}:{}:{}",
        d.severity, d.code, d.message, file, d.span.line, d.span.column
    )
}

/// Stable diagnostic codes.
pub mod codes {
    pub const E001: &str = "E001";
    pub const E002: &str = "E002";
    pub const E003: &str = "E003";
    pub const E004: &str = "E004";
    pub const E101: &str = "E101";
    pub const E102: &str = "E102";
    pub const E103: &str = "E103";
    pub const E104: &str = "E104";
    pub const E105: &str = "E105";
    pub const E106: &str = "E106";
    pub const E201: &str = "E201";
    pub const E202: &str = "E202";
    pub const E203: &str = "E203";
    pub const E204: &str = "E204";
    pub const E205: &str = "E205";
    pub const W101: &str = "W101";
    /// Lexical error: unterminated string, bad escape or illegal character.
    pub const E900: &str = "E900";
    /// Syntax error: unexpected token.
    pub const E901: &str = "E901";
}
