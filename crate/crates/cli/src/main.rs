//! `intent`: check model files, solve worlds and audit intent.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use intent_core::audit::{audit, AuditError, AuditOptions, Framework};
use intent_core::dsl::{self, ParseDiagnostic};
use intent_core::hkw::AffectReading;
use intent_core::rational::{parse_rational, ratio_string, Confidence, Rational};
use intent_core::scm::{Assignment, Context, Signature, VarKind};
use num_traits::Zero;

const EXIT_SEMANTIC: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_GUARD: u8 = 3;

const ENV_MAX_POLICIES: &str = "INTENT_MAX_POLICIES";
const ENV_MAX_REALIZATIONS: &str = "INTENT_MAX_REALIZATIONS";
const ENV_MAX_VARIABLES: &str = "INTENT_MAX_VARIABLES";

#[derive(Parser)]
#[command(
    name = "intent",
    version,
    about = "Direct and oblique intent in causal models and influence diagrams"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FrameworkArg {
    Hkw,
    Kglt,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReadingArg {
    MinimalSet,
    PartOfMinimalSet,
    MinimalAmongSupersets,
}

#[derive(Subcommand)]
enum Command {
    /// Report every diagnostic for a model file.
    Check { path: PathBuf },
    /// Run the queries of a model file and print a report.
    Audit {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        framework: FrameworkArg,
        /// Confidence threshold for oblique intent, e.g. 19/20.
        #[arg(long)]
        confidence: Option<String>,
        /// Reference values for one decision, e.g. "B = 0". Repeatable.
        #[arg(long = "ref")]
        reference: Vec<String>,
        /// A query line that replaces the file's queries. Repeatable.
        #[arg(long)]
        query: Vec<String>,
        #[arg(long, conflicts_with = "text")]
        json: bool,
        #[arg(long)]
        text: bool,
        #[arg(long, value_enum, default_value = "minimal-set")]
        affect_reading: ReadingArg,
        /// Chance nodes count as intended only when the optimal policy changes.
        #[arg(long)]
        strict_policy_change: bool,
        /// Record elapsed times in the report.
        #[arg(long)]
        timing: bool,
    },
    /// Solve one world of the model.
    Solve {
        path: PathBuf,
        /// Decision values, e.g. "B=1".
        #[arg(long)]
        action: String,
        /// Exogenous values, e.g. "U_E=1,U_I=1"; unnamed ones take their most likely value.
        #[arg(long)]
        context: Option<String>,
    },
}

/// A failure carrying its exit code.
struct Failure {
    code: u8,
    lines: Vec<String>,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            lines: vec![message.into()],
        }
    }

    fn diagnostics(path: &Path, diags: &[ParseDiagnostic]) -> Self {
        Self {
            code: EXIT_SEMANTIC,
            lines: diags
                .iter()
                .map(|d| {
                    if d.line == 0 {
                        format!("{}: {} in a command-line option: {}", path.display(), d.severity, d.message)
                    } else {
                        format!("{}:{d}", path.display())
                    }
                })
                .collect(),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

fn env_limit(name: &str) -> Result<Option<u128>, Failure> {
    match std::env::var(name) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| {
            Failure::usage(format!("{name} must be a non-negative integer, got `{v}`"))
        }),
        Err(_) => Ok(None),
    }
}

fn check(path: &Path) -> Result<(), Failure> {
    let text = read(path)?;
    let (_, diags) = dsl::analyze(&text);
    for d in &diags {
        eprintln!("{}:{d}", path.display());
    }
    if diags.iter().any(ParseDiagnostic::is_error) {
        return Err(Failure {
            code: EXIT_SEMANTIC,
            lines: Vec::new(),
        });
    }
    println!("{}: ok", path.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_audit(
    path: &Path,
    framework: FrameworkArg,
    confidence: Option<String>,
    reference: Vec<String>,
    query: Vec<String>,
    json: bool,
    reading: ReadingArg,
    strict: bool,
    timing: bool,
) -> Result<(), Failure> {
    let mut opts = AuditOptions {
        framework: match framework {
            FrameworkArg::Hkw => Framework::Hkw,
            FrameworkArg::Kglt => Framework::Kglt,
            FrameworkArg::Both => Framework::Both,
        },
        timing,
        ..AuditOptions::default()
    };
    opts.affect.reading = match reading {
        ReadingArg::MinimalSet => AffectReading::MinimalSet,
        ReadingArg::PartOfMinimalSet => AffectReading::PartOfMinimalSet,
        ReadingArg::MinimalAmongSupersets => AffectReading::MinimalAmongSupersets,
    };
    opts.kglt.strict_policy_change = strict;
    if let Some(c) = confidence {
        let value = parse_rational(&c).map_err(|e| Failure::usage(format!("--confidence: {e}")))?;
        opts.confidence =
            Some(Confidence::new(value).map_err(|e| Failure::usage(format!("--confidence: {e}")))?);
    }
    if !reference.is_empty() {
        let decls = reference
            .iter()
            .map(|r| dsl::parse_reference(r).map_err(|d| flag_error("--ref", r, &d)))
            .collect::<Result<Vec<_>, _>>()?;
        opts.reference = Some(decls);
    }
    if !query.is_empty() {
        let queries = query
            .iter()
            .map(|q| dsl::parse_query(q).map_err(|d| flag_error("--query", q, &d)))
            .collect::<Result<Vec<_>, _>>()?;
        opts.queries = Some(queries);
    }
    if let Some(n) = env_limit(ENV_MAX_POLICIES)? {
        opts.kglt.limits.max_policies = n;
    }
    if let Some(n) = env_limit(ENV_MAX_REALIZATIONS)? {
        opts.kglt.limits.max_realizations = n;
    }
    if let Some(n) = env_limit(ENV_MAX_VARIABLES)? {
        opts.affect.max_variables = usize::try_from(n).unwrap_or(usize::MAX);
    }

    let text = read(path)?;
    let doc = dsl::parse(&text).map_err(|d| Failure::diagnostics(path, &d))?;
    let report = audit(&doc, &opts).map_err(|e| match e {
        AuditError::Invalid(d) => Failure::diagnostics(path, &d),
        e if e.is_size_guard() => Failure {
            code: EXIT_GUARD,
            lines: vec![format!("size guard: {e}")],
        },
        e => Failure {
            code: EXIT_SEMANTIC,
            lines: vec![e.to_string()],
        },
    })?;
    if json {
        print!("{}", report.to_json());
    } else {
        print!("{}", report.to_text());
    }
    Ok(())
}

fn flag_error(flag: &str, value: &str, diags: &[ParseDiagnostic]) -> Failure {
    let mut lines = vec![format!("{flag} `{value}` does not parse")];
    lines.extend(diags.iter().map(|d| format!("  {d}")));
    Failure {
        code: EXIT_USAGE,
        lines,
    }
}

/// `NAME=label` pairs separated by commas or whitespace.
fn parse_pairs(
    sig: &Signature,
    text: &str,
    kind: VarKind,
    flag: &str,
) -> Result<Assignment, Failure> {
    let mut out = Assignment::new();
    for item in text.split([',', ' ']).filter(|s| !s.trim().is_empty()) {
        let (name, label) = item
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("{flag}: expected NAME=value, got `{item}`")))?;
        let (id, v) = sig
            .resolve(name.trim(), label.trim())
            .map_err(|e| Failure::usage(format!("{flag}: {e}")))?;
        if sig.var(id).kind != kind {
            return Err(Failure::usage(format!(
                "{flag}: `{}` is not {}",
                name.trim(),
                kind.keyword()
            )));
        }
        out.insert(id, v);
    }
    Ok(out)
}

fn solve(path: &Path, action: &str, context: Option<&str>) -> Result<(), Failure> {
    let text = read(path)?;
    let doc = dsl::parse(&text).map_err(|d| Failure::diagnostics(path, &d))?;
    let program = dsl::lower_to_scm(&doc).map_err(|d| Failure::diagnostics(path, &d))?;
    let model = &program.model;
    let sig = model.signature();
    let action = parse_pairs(sig, action, VarKind::Decision, "--action")?;
    let missing: Vec<&str> = sig
        .decisions()
        .into_iter()
        .filter(|d| !action.contains_key(d))
        .map(|d| sig.name(d))
        .collect();
    if !missing.is_empty() {
        return Err(Failure::usage(format!(
            "--action: missing {}",
            missing.join(", ")
        )));
    }
    let given = match context {
        Some(c) => parse_pairs(sig, c, VarKind::Exogenous, "--context")?,
        None => Assignment::new(),
    };
    // Unnamed exogenous variables take their most probable value, first on ties.
    let mut values = Assignment::new();
    for u in sig.exogenous() {
        let v = match given.get(&u) {
            Some(&v) => v,
            None => {
                let mut marginal = vec![Rational::zero(); sig.domain_size(u)];
                for (s, w) in program.state.settings() {
                    marginal[s.context.get(u).unwrap_or(0)] += w;
                }
                (0..marginal.len()).fold(0, |best, i| {
                    if marginal[i] > marginal[best] {
                        i
                    } else {
                        best
                    }
                })
            }
        };
        values.insert(u, v);
    }
    let world = model
        .solve(&Context::new(values), &action)
        .map_err(|e| Failure {
            code: EXIT_SEMANTIC,
            lines: vec![e.to_string()],
        })?;
    for v in sig.ids() {
        println!("{}={}", sig.name(v), sig.label(v, world.get(v)));
    }
    println!(
        "utility {}",
        ratio_string(&program.state.utility_of(&world))
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check { path } => check(&path),
        Command::Audit {
            path,
            framework,
            confidence,
            reference,
            query,
            json,
            text: _,
            affect_reading,
            strict_policy_change,
            timing,
        } => run_audit(
            &path,
            framework,
            confidence,
            reference,
            query,
            json,
            affect_reading,
            strict_policy_change,
            timing,
        ),
        Command::Solve {
            path,
            action,
            context,
        } => solve(&path, &action, context.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            for line in &f.lines {
                eprintln!("{line}");
            }
            ExitCode::from(f.code)
        }
    }
}
