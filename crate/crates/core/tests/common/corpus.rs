//! The `.im` corpus under `tests/corpus`. Files named `valid_*` must check
//! cleanly; `err_*` files must produce at least one error. Each file has
//! goldens next to it: `.diag` for diagnostics, and for valid files
//! `.canonical` (serialized form) and `.json` (audit report).
//!
//! Set `UPDATE_GOLDENS=1` to rewrite the goldens instead of comparing.

use std::path::{Path, PathBuf};

use intent_core::audit::{audit, AuditOptions};
use intent_core::dsl::{analyze, lower_to_id, parse, parse_syntax, serialize, ParseDiagnostic};

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus")
}

pub fn corpus_files() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "im"))
        .collect();
    files.sort();
    files
}

fn stem(path: &Path) -> String {
    path.file_stem().unwrap().to_string_lossy().into_owned()
}

fn compare_golden(path: &Path, ext: &str, actual: &str) -> Result<(), String> {
    let golden = path.with_extension(ext);
    if std::env::var_os("UPDATE_GOLDENS").is_some() {
        std::fs::write(&golden, actual).map_err(|e| e.to_string())?;
        return Ok(());
    }
    let expected = std::fs::read_to_string(&golden).map_err(|e| format!("{}: {e}", golden.display()))?;
    if expected == actual {
        Ok(())
    } else {
        Err(format!("{} differs:\n--- golden\n{expected}--- actual\n{actual}", golden.display()))
    }
}

fn diagnostics_text(diags: &[ParseDiagnostic]) -> String {
    diags.iter().map(|d| format!("{d}\n")).collect()
}

fn audit_text(doc: &intent_core::dsl::ModelDocument) -> String {
    match audit(doc, &AuditOptions::default()) {
        Ok(report) => report.to_json(),
        Err(e) => format!("error: {e}\n"),
    }
}

#[derive(Debug, Default)]
pub struct CorpusSummary {
    pub files: usize,
    pub valid: usize,
    pub invalid: usize,
}

/// Checks one corpus file against its goldens and the round-trip rules.
pub fn check_file(path: &Path) -> Result<bool, String> {
    let name = stem(path);
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let (_, diags) = analyze(&text);
    compare_golden(path, "diag", &diagnostics_text(&diags))?;
    let has_error = diags.iter().any(ParseDiagnostic::is_error);

    if name.starts_with("err_") {
        return if has_error {
            Ok(false)
        } else {
            Err(format!("{name}: expected an error"))
        };
    }
    if has_error {
        return Err(format!("{name}: unexpected errors\n{}", diagnostics_text(&diags)));
    }

    let doc = parse(&text).map_err(|d| diagnostics_text(&d))?;
    let canonical = serialize(&doc);
    compare_golden(path, "canonical", &canonical)?;
    let (again, diags) = parse_syntax(&canonical);
    if !diags.is_empty() || again != doc || serialize(&again) != canonical {
        return Err(format!("{name}: canonical form does not reparse to the same document"));
    }
    let lowered = lower_to_id(&doc).map_err(|d| diagnostics_text(&d))?;
    let relowered = lower_to_id(&again).map_err(|d| diagnostics_text(&d))?;
    if lowered.diagram != relowered.diagram {
        return Err(format!("{name}: reparsed document lowers to a different diagram"));
    }

    let first = audit_text(&doc);
    let second = audit_text(&doc);
    if first != second {
        return Err(format!("{name}: audit reports differ between runs"));
    }
    compare_golden(path, "json", &first)?;
    Ok(true)
}

pub fn check_corpus() -> Result<CorpusSummary, String> {
    let mut summary = CorpusSummary::default();
    let mut failures = Vec::new();
    for path in corpus_files() {
        summary.files += 1;
        match check_file(&path) {
            Ok(true) => summary.valid += 1,
            Ok(false) => summary.invalid += 1,
            Err(e) => failures.push(e),
        }
    }
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(failures.join("\n"))
    }
}
