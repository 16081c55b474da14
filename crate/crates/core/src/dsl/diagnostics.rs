use std::fmt;

use serde::Serialize;

use super::ast::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
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

/// A located message about a model file. Lines and columns are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseDiagnostic {
    pub severity: Severity,
    pub line: usize,
    pub column: usize,
    pub message: String,
    /// The offending token's text, when there is one.
    pub token: Option<String>,
}

impl ParseDiagnostic {
    pub fn error(span: Span, message: impl Into<String>, token: Option<String>) -> Self {
        Self {
            severity: Severity::Error,
            line: span.line,
            column: span.column,
            message: message.into(),
            token,
        }
    }

    pub fn warning(span: Span, message: impl Into<String>, token: Option<String>) -> Self {
        Self {
            severity: Severity::Warning,
            ..Self::error(span, message, token)
        }
    }

    pub fn span(&self) -> Span {
        Span::new(self.line, self.column)
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

/// `line:col: severity: message`.
impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {}: {}",
            self.line, self.column, self.severity, self.message
        )
    }
}

/// Orders diagnostics by position, errors first on ties, without reordering equal entries.
pub fn sort_diagnostics(diags: &mut [ParseDiagnostic]) {
    diags.sort_by(|a, b| (a.line, a.column, a.severity).cmp(&(b.line, b.column, b.severity)));
}
