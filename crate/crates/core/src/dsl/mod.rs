//! The `.im` model format: lexer, parser, checks, canonical printer and
//! lowering to both analysis frameworks.

pub mod ast;
pub mod diagnostics;
pub mod lexer;
pub mod lower;
pub mod parser;
pub mod serialize;
pub mod validate;

pub use ast::ModelDocument;
pub use diagnostics::{sort_diagnostics, ParseDiagnostic, Severity};
pub use lower::{lower_to_id, lower_to_scm, IdProgram, LoweredQuery, ResolvedQuery, ScmProgram};
pub use parser::{parse_query, parse_reference, parse_syntax};
pub use serialize::{expr_string, query_string, serialize};
pub use validate::validate;

/// Every diagnostic for `text`: syntax first, then semantic checks, then
/// problems only visible after lowering (cycles). Sorted by position.
pub fn analyze(text: &str) -> (ModelDocument, Vec<ParseDiagnostic>) {
    let (doc, mut diags) = parse_syntax(text);
    if diags.iter().any(ParseDiagnostic::is_error) {
        sort_diagnostics(&mut diags);
        return (doc, diags);
    }
    let checked = validate(&doc);
    let clean = !checked.iter().any(ParseDiagnostic::is_error);
    diags.extend(checked);
    if clean {
        if let Err(errs) = lower_to_scm(&doc) {
            diags.extend(errs);
        }
    }
    sort_diagnostics(&mut diags);
    (doc, diags)
}

/// The document, or its diagnostics when any of them is an error.
pub fn parse(text: &str) -> Result<ModelDocument, Vec<ParseDiagnostic>> {
    let (doc, diags) = analyze(text);
    if diags.iter().any(ParseDiagnostic::is_error) {
        Err(diags)
    } else {
        Ok(doc)
    }
}
