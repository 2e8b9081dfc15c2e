use std::fmt;

use serde::Serialize;

use crate::token::Span;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
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

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Code {
    Lex,
    Parse,
    /// Index list length differs from the declared index count.
    IndexCount,
    DuplicateSlot,
    /// A bound parameter value names a parameter introduced later in the
    /// same list.
    ForwardRef,
    /// `&es` operand whose `@` names differ in number from its indices.
    EsIndexCount,
    BroadcastInDerivative,
    GlobalName,
    /// A fenced block that is never closed.
    UnclosedBlock,
}

impl Code {
    pub fn as_str(self) -> &'static str {
        match self {
            Code::Lex => "LEX",
            Code::Parse => "PARSE",
            Code::IndexCount => "INDEX_COUNT",
            Code::DuplicateSlot => "DUPLICATE_SLOT",
            Code::ForwardRef => "FORWARD_REF",
            Code::EsIndexCount => "ES_INDEX_COUNT",
            Code::BroadcastInDerivative => "BROADCAST_IN_DERIVATIVE",
            Code::GlobalName => "GLOBAL_NAME",
            Code::UnclosedBlock => "UNCLOSED_BLOCK",
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: Code,
    pub message: String,
    pub span: Span,
}

impl Diagnostic {
    pub fn error(code: Code, message: impl Into<String>, span: Span) -> Self {
        Self {
            severity: Severity::Error,
            code,
            message: message.into(),
            span,
        }
    }

    pub fn warning(code: Code, message: impl Into<String>, span: Span) -> Self {
        Self {
            severity: Severity::Warning,
            code,
            message: message.into(),
            span,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// `file:line:col: severity[CODE]: message`
    pub fn render(&self, file: &str) -> String {
        format!(
            "{file}:{}:{}: {}[{}]: {}",
            self.span.line, self.span.col, self.severity, self.code, self.message
        )
    }
}

pub fn error_count(diags: &[Diagnostic]) -> usize {
    diags.iter().filter(|d| d.is_error()).count()
}

/// Source order, errors before warnings at the same position.
pub fn sort(diags: &mut [Diagnostic]) {
    diags.sort_by(|a, b| {
        (a.span.offset, a.severity, a.code.as_str()).cmp(&(
            b.span.offset,
            b.severity,
            b.code.as_str(),
        ))
    });
}

#[derive(Serialize)]
struct JsonDiagnostic<'a> {
    file: &'a str,
    line: usize,
    col: usize,
    offset: usize,
    len: usize,
    severity: Severity,
    code: Code,
    message: &'a str,
}

/// Diagnostics of several files as one JSON array.
pub fn to_json<'a>(files: impl IntoIterator<Item = (&'a str, &'a [Diagnostic])>) -> String {
    let items: Vec<JsonDiagnostic<'_>> = files
        .into_iter()
        .flat_map(|(file, diags)| {
            diags.iter().map(move |d| JsonDiagnostic {
                file,
                line: d.span.line,
                col: d.span.col,
                offset: d.span.offset,
                len: d.span.len,
                severity: d.severity,
                code: d.code,
                message: &d.message,
            })
        })
        .collect();
    serde_json::to_string_pretty(&items).expect("diagnostics serialize")
}
