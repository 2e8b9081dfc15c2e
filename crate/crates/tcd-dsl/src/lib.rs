//! Lexer, parser and static checker for a small notation describing
//! tensor-valued functions, lambdas with named index slots, and
//! einsum-style contractions.
//!
//! ```
//! use tcd_dsl::{check_document, Code, Mode};
//!
//! let doc = check_document("f = ^(a[], a[]) -> a[]\n", Mode::Whole);
//! assert_eq!(doc.diagnostics[0].code, Code::DuplicateSlot);
//! ```

pub mod ast;
pub mod check;
pub mod diagnostic;
pub mod document;
pub mod parser;
pub mod token;

pub use check::{check, check_with, Globals};
pub use diagnostic::{error_count, to_json, Code, Diagnostic, Severity};
pub use document::{check_document, extract_blocks, Block, CheckedDocument, Mode};
pub use parser::parse;
pub use token::{tokenize, tokenize_lossy, LexError, Span, Token, TokenKind};

/// Lexes, parses and checks one source string.
pub fn check_source(text: &str) -> CheckedDocument {
    check_document(text, Mode::Whole)
}
