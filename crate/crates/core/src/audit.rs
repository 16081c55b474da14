//! Runs the queries of a model document and assembles a deterministic report.
//!
//! JSON output has a fixed key order and prints every rational as `p/q`, so
//! identical inputs give byte-identical reports. Timing is only recorded on
//! request.

use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dsl::ast::{ModelDocument, Query, ReferenceDecl, Spanned};
use crate::dsl::{
    expr_string, lower_to_id, lower_to_scm, serialize, IdProgram, LoweredQuery, ParseDiagnostic,
    ResolvedQuery, ScmProgram,
};
use crate::hkw::{
    hkw_intends, intends_to_affect, oblique_scan, scm_oblique_intends, AffectOptions,
    AffectReading, HkwOptions, IntentError, ObliqueClause, ObliqueVerdict, OutcomeSpec,
};
use crate::influence::{
    id_oblique_intent, id_oblique_scan, kglt_intent, IdError, IdObliqueVerdict, InfluenceDiagram,
    KgltOptions, KgltReport, NodeId,
};
use crate::rational::{compact_string, ratio_string, Confidence};
use crate::scm::{Assignment, Signature, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Framework {
    Hkw,
    Kglt,
    #[default]
    Both,
}

impl Framework {
    pub fn runs_hkw(self) -> bool {
        self != Framework::Kglt
    }

    pub fn runs_kglt(self) -> bool {
        self != Framework::Hkw
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "hkw" => Some(Framework::Hkw),
            "kglt" => Some(Framework::Kglt),
            "both" => Some(Framework::Both),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct AuditOptions {
    pub framework: Framework,
    /// Overrides every query's own confidence.
    pub confidence: Option<Confidence>,
    /// Replaces the document's reference section.
    pub reference: Option<Vec<ReferenceDecl>>,
    /// Replaces the document's queries.
    pub queries: Option<Vec<Spanned<Query>>>,
    pub affect: AffectOptions,
    pub kglt: KgltOptions,
    pub timing: bool,
}

#[derive(Debug, Error)]
pub enum AuditError {
    #[error("the model has errors")]
    Invalid(Vec<ParseDiagnostic>),
    #[error(transparent)]
    Intent(#[from] IntentError),
    #[error(transparent)]
    Diagram(#[from] IdError),
}

impl AuditError {
    /// True when a size guard stopped the analysis.
    pub fn is_size_guard(&self) -> bool {
        matches!(
            self,
            AuditError::Intent(IntentError::TooManyVariables { .. })
                | AuditError::Diagram(IdError::TooLarge { .. })
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModelInfo {
    /// SHA-256 of the canonical text of the document.
    pub sha256: String,
    pub variables: usize,
    pub decisions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Parameters {
    pub confidence: String,
    /// Per-decision reference values; absent when every other action is the reference.
    pub reference: Option<Vec<Vec<String>>>,
    pub affect_reading: AffectReading,
    pub strict_policy_change: bool,
    pub utility: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutcomeUtilityReport {
    pub outcome: String,
    pub expected_utility: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ObliqueReport {
    pub outcome: String,
    pub direct: String,
    pub intended: bool,
    pub clause: Option<ObliqueClause>,
    pub achieved: String,
    pub clause_a: String,
    pub clause_b: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DirectReport {
    pub action: Vec<String>,
    pub reference: Vec<Vec<String>>,
    pub outcome: String,
    pub direct: bool,
    /// Letters of the failed conditions.
    pub failed: Vec<String>,
    pub intends_to_affect: bool,
    pub affect_witnesses: Vec<Vec<String>>,
    pub decision_default: Vec<String>,
    pub outcome_utilities: Vec<OutcomeUtilityReport>,
    /// Outcomes obliquely intended alongside this one, when it is direct.
    pub oblique: Vec<ObliqueReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AffectReport {
    pub action: Vec<String>,
    pub reference: Vec<Vec<String>>,
    pub variables: Vec<String>,
    pub intended: bool,
    pub witnesses: Vec<Vec<String>>,
    pub action_utility: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SideEffectReport {
    pub action: Vec<String>,
    #[serde(flatten)]
    pub verdict: ObliqueReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionalReport {
    pub given: String,
    pub probability: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdObliqueReport {
    pub outcome: String,
    pub intended: bool,
    pub clause: Option<ObliqueClause>,
    pub achieved: String,
    pub marginal: String,
    pub conditionals: Vec<ConditionalReport>,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodeTestReport {
    pub node: String,
    pub decision: bool,
    pub intended: bool,
    pub restricted_optimum: String,
    pub policy_value: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ForeseenReport {
    pub outcome: Vec<String>,
    pub probability: String,
    pub score: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KgltIntentReport {
    pub policy: Vec<String>,
    pub expected_utility: String,
    pub foreseen: ForeseenReport,
    pub tests: Vec<NodeTestReport>,
    pub intended: Vec<String>,
    pub oblique: Vec<IdObliqueReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QueryOutcome {
    HkwDirect(DirectReport),
    HkwAffect(AffectReport),
    HkwOblique(SideEffectReport),
    KgltIntent(KgltIntentReport),
    KgltOblique(IdObliqueReport),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QueryReport {
    pub query: String,
    pub framework: Framework,
    pub confidence: String,
    pub result: QueryOutcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_us: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub model: ModelInfo,
    pub frameworks: Vec<Framework>,
    pub parameters: Parameters,
    pub queries: Vec<QueryReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_us: Option<u64>,
}

fn assignment_strings(sig: &Signature, a: &Assignment) -> Vec<String> {
    a.iter()
        .map(|(&v, &x)| format!("{}={}", sig.name(v), sig.label(v, x)))
        .collect()
}

fn var_set(sig: &Signature, vars: &[VarId]) -> Vec<String> {
    vars.iter().map(|&v| sig.name(v).to_string()).collect()
}

fn oblique_report(sig: &Signature, direct: &OutcomeSpec, v: &ObliqueVerdict) -> ObliqueReport {
    ObliqueReport {
        outcome: v.side.describe(sig),
        direct: direct.describe(sig),
        intended: v.intended,
        clause: v.clause,
        achieved: ratio_string(v.achieved()),
        clause_a: ratio_string(&v.clause_a),
        clause_b: v.clause_b.as_ref().map(ratio_string),
    }
}

fn id_oblique_report(id: &InfluenceDiagram, v: &IdObliqueVerdict) -> IdObliqueReport {
    IdObliqueReport {
        outcome: id.describe_value(v.node, v.value),
        intended: v.intended,
        clause: v.clause,
        achieved: ratio_string(&v.achieved),
        marginal: ratio_string(&v.marginal),
        conditionals: v
            .conditionals
            .iter()
            .map(|c| ConditionalReport {
                given: id.describe_value(c.node, c.value),
                probability: c.probability.as_ref().map(ratio_string),
            })
            .collect(),
        witness: v.witness.map(|(n, x)| id.describe_value(n, x)),
    }
}

fn kglt_report(k: &KgltReport, oblique: Vec<IdObliqueReport>) -> KgltIntentReport {
    let id = &k.diagram;
    KgltIntentReport {
        policy: k.policy.describe(id),
        expected_utility: ratio_string(&k.expected_utility),
        foreseen: ForeseenReport {
            outcome: k.foreseen.outcome.describe(id),
            probability: ratio_string(&k.foreseen.probability),
            score: ratio_string(&k.foreseen.score),
        },
        tests: k
            .tests
            .iter()
            .map(|t| NodeTestReport {
                node: id.describe_value(t.node, t.value),
                decision: id.node(t.node).is_decision(),
                intended: t.intended,
                restricted_optimum: ratio_string(&t.restricted_optimum),
                policy_value: t.policy_value.as_ref().map(ratio_string),
            })
            .collect(),
        intended: k
            .intended
            .iter()
            .map(|&(n, x)| id.describe_value(n, x))
            .collect(),
        oblique,
    }
}

/// Canonical text hash of a document.
pub fn model_hash(doc: &ModelDocument) -> String {
    hex::encode(Sha256::digest(serialize(doc).as_bytes()))
}

struct Runner<'a> {
    scm: &'a ScmProgram,
    id: &'a IdProgram,
    opts: &'a AuditOptions,
    kglt: Option<KgltReport>,
}

impl Runner<'_> {
    fn kglt(&mut self) -> Result<&KgltReport, AuditError> {
        if self.kglt.is_none() {
            self.kglt = Some(kglt_intent(&self.id.diagram, &self.opts.kglt)?);
        }
        Ok(self.kglt.as_ref().expect("just computed"))
    }

    fn run(&mut self, q: &LoweredQuery, c: &Confidence) -> Result<QueryOutcome, AuditError> {
        let es = &self.scm.state;
        let sig = self.scm.model.signature();
        Ok(match &q.kind {
            ResolvedQuery::HkwDirect { outcome, action } => {
                let reference = self.scm.reference_for(action)?;
                let spec = OutcomeSpec::new(sig, outcome.clone())?;
                let opts = HkwOptions {
                    affect: self.opts.affect,
                };
                let v = hkw_intends(es, action, &reference, &spec, &opts)?;
                let oblique = if v.direct {
                    oblique_scan(es, action, &spec, c)?
                        .iter()
                        .map(|o| oblique_report(sig, &spec, o))
                        .collect()
                } else {
                    Vec::new()
                };
                let vars = spec.variables();
                QueryOutcome::HkwDirect(DirectReport {
                    action: assignment_strings(sig, action),
                    reference: reference
                        .alternatives()
                        .iter()
                        .map(|a| assignment_strings(sig, a))
                        .collect(),
                    outcome: spec.describe(sig),
                    direct: v.direct,
                    failed: v.failed.iter().map(|f| f.letter().to_string()).collect(),
                    intends_to_affect: !v
                        .failed
                        .contains(&crate::hkw::DirectCondition::AffectsVariables),
                    affect_witnesses: v
                        .intended_affect_sets
                        .iter()
                        .map(|s| var_set(sig, s))
                        .collect(),
                    decision_default: assignment_strings(sig, &v.decision_default),
                    outcome_utilities: v
                        .outcome_utilities
                        .iter()
                        .map(|u| {
                            let pairs =
                                vars.iter().copied().zip(u.values.iter().copied()).collect();
                            OutcomeUtilityReport {
                                outcome: OutcomeSpec::new(sig, pairs)
                                    .map(|s| s.describe(sig))
                                    .unwrap_or_default(),
                                expected_utility: ratio_string(&u.utility),
                            }
                        })
                        .collect(),
                    oblique,
                })
            }
            ResolvedQuery::HkwAffect { variables, action } => {
                let reference = self.scm.reference_for(action)?;
                let r = intends_to_affect(es, action, &reference, variables, &self.opts.affect)?;
                QueryOutcome::HkwAffect(AffectReport {
                    action: assignment_strings(sig, action),
                    reference: reference
                        .alternatives()
                        .iter()
                        .map(|a| assignment_strings(sig, a))
                        .collect(),
                    variables: var_set(sig, variables),
                    intended: r.intended,
                    witnesses: r.witnesses.iter().map(|s| var_set(sig, s)).collect(),
                    action_utility: ratio_string(&r.action_utility),
                })
            }
            ResolvedQuery::HkwOblique {
                side,
                direct,
                action,
            } => {
                let direct = OutcomeSpec::new(sig, direct.clone())?;
                let side = OutcomeSpec::new(sig, side.clone())?;
                let v = scm_oblique_intends(es, action, &direct, &side, c)?;
                QueryOutcome::HkwOblique(SideEffectReport {
                    action: assignment_strings(sig, action),
                    verdict: oblique_report(sig, &direct, &v),
                })
            }
            ResolvedQuery::KgltIntent => {
                let k = self.kglt()?;
                let scan = id_oblique_scan(&k.diagram, &k.policy, c, &k.intended)?;
                let oblique = scan
                    .iter()
                    .map(|v| id_oblique_report(&k.diagram, v))
                    .collect();
                QueryOutcome::KgltIntent(kglt_report(k, oblique))
            }
            ResolvedQuery::KgltOblique { node, value } => {
                let k = self.kglt()?;
                let node = NodeId(node.0);
                let v = if k.intended.contains(&(node, *value)) {
                    // Already directly intended: report it as not oblique.
                    IdObliqueVerdict {
                        node,
                        value: *value,
                        intended: false,
                        clause: None,
                        marginal: k.diagram.probability(&k.policy, &[(node, *value)])?,
                        conditionals: Vec::new(),
                        achieved: k.diagram.probability(&k.policy, &[(node, *value)])?,
                        witness: None,
                    }
                } else {
                    id_oblique_intent(&k.diagram, &k.policy, node, *value, c, &k.intended)?
                };
                QueryOutcome::KgltOblique(id_oblique_report(&k.diagram, &v))
            }
        })
    }
}

/// Runs every query of `doc` (or the override queries) for the selected frameworks.
///
/// A document without queries gets `kglt intent`.
pub fn audit(doc: &ModelDocument, opts: &AuditOptions) -> Result<AuditReport, AuditError> {
    let started = Instant::now();
    let hash = model_hash(doc);
    let mut doc = doc.clone();
    if let Some(r) = &opts.reference {
        doc.reference = r.iter().map(ReferenceDecl::unplaced).collect();
    }
    if let Some(q) = &opts.queries {
        doc.queries = q.iter().map(|q| Spanned::bare(q.node.unplaced())).collect();
    }
    if doc.queries.is_empty() {
        doc.queries.push(Spanned::bare(Query {
            kind: crate::dsl::ast::QueryKind::KgltIntent,
            confidence: None,
        }));
    }
    let scm = lower_to_scm(&doc).map_err(AuditError::Invalid)?;
    let id = lower_to_id(&doc).map_err(AuditError::Invalid)?;
    let sig = scm.model.signature();

    let default_c = opts.confidence.clone().unwrap_or_default();
    let mut runner = Runner {
        scm: &scm,
        id: &id,
        opts,
        kglt: None,
    };
    let mut queries = Vec::new();
    for q in &scm.queries {
        let framework = if q.kind.is_hkw() {
            Framework::Hkw
        } else {
            Framework::Kglt
        };
        if (framework == Framework::Hkw && !opts.framework.runs_hkw())
            || (framework == Framework::Kglt && !opts.framework.runs_kglt())
        {
            continue;
        }
        let c = match (&opts.confidence, &q.confidence) {
            (Some(c), _) => c.clone(),
            (None, Some(r)) => Confidence::new(r.clone()).map_err(|e| {
                AuditError::Invalid(vec![ParseDiagnostic::error(
                    crate::dsl::ast::Span::new(1, 1),
                    e.to_string(),
                    None,
                )])
            })?,
            (None, None) => Confidence::default(),
        };
        let t = Instant::now();
        let result = runner.run(q, &c)?;
        queries.push(QueryReport {
            query: q.source.clone(),
            framework,
            confidence: ratio_string(c.value()),
            result,
            elapsed_us: opts.timing.then(|| micros(t)),
        });
    }

    let mut utility: Vec<String> = doc
        .utility
        .iter()
        .map(|u| {
            format!(
                "{} -> {}",
                expr_string(&u.when),
                compact_string(&u.value.node)
            )
        })
        .collect();
    if let Some(d) = &doc.default_utility {
        utility.push(format!("default -> {}", compact_string(&d.node)));
    }
    let frameworks = match opts.framework {
        Framework::Both => vec![Framework::Hkw, Framework::Kglt],
        f => vec![f],
    };
    Ok(AuditReport {
        model: ModelInfo {
            sha256: hash,
            variables: sig.len(),
            decisions: var_set(sig, &sig.decisions()),
        },
        frameworks,
        parameters: Parameters {
            confidence: ratio_string(default_c.value()),
            reference: scm.reference.as_ref().map(|per| {
                per.iter()
                    .map(|(d, vs)| {
                        vs.iter()
                            .map(|&x| format!("{}={}", sig.name(*d), sig.label(*d, x)))
                            .collect()
                    })
                    .collect()
            }),
            affect_reading: opts.affect.reading,
            strict_policy_change: opts.kglt.strict_policy_change,
            utility,
        },
        queries,
        elapsed_us: opts.timing.then(|| micros(started)),
    })
}

fn micros(t: Instant) -> u64 {
    u64::try_from(t.elapsed().as_micros()).unwrap_or(u64::MAX)
}

fn set_string(names: &[String]) -> String {
    format!("{{{}}}", names.join(", "))
}

fn oblique_line(o: &ObliqueReport) -> String {
    match o.clause {
        Some(ObliqueClause::A) => format!("{}: oblique (clause a, {})", o.outcome, o.achieved),
        Some(ObliqueClause::B) => format!(
            "{}: oblique (clause b, {}); clause a achieved {}",
            o.outcome, o.achieved, o.clause_a
        ),
        None => format!(
            "{}: not oblique; clause a achieved {}, clause b achieved {}",
            o.outcome,
            o.clause_a,
            o.clause_b.as_deref().unwrap_or("n/a")
        ),
    }
}

fn id_oblique_line(o: &IdObliqueReport) -> String {
    match o.clause {
        Some(ObliqueClause::A) => format!("{}: oblique (clause a, {})", o.outcome, o.achieved),
        Some(ObliqueClause::B) => format!(
            "{}: oblique (clause b, {} given {}); clause a achieved {}",
            o.outcome,
            o.achieved,
            o.witness.as_deref().unwrap_or("?"),
            o.marginal
        ),
        None => format!(
            "{}: not oblique; clause a achieved {}",
            o.outcome, o.marginal
        ),
    }
}

impl AuditReport {
    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Line-oriented summary.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "model sha256 {}", self.model.sha256);
        let _ = writeln!(out, "confidence {}", self.parameters.confidence);
        if let Some(r) = &self.parameters.reference {
            let parts: Vec<String> = r.iter().map(|vs| vs.join(" | ")).collect();
            let _ = writeln!(out, "reference {}", parts.join(", "));
        }
        for q in &self.queries {
            let _ = writeln!(out);
            let _ = writeln!(out, "> {}", q.query);
            match &q.result {
                QueryOutcome::HkwDirect(d) => {
                    let action = d.action.join(", ");
                    if d.direct {
                        let _ = writeln!(out, "{}: direct", d.outcome);
                        let _ = writeln!(out, "  {action} directly intends {}", d.outcome);
                    } else {
                        let _ = writeln!(out, "{}: not direct", d.outcome);
                        let _ = writeln!(out, "  failed conditions: {}", d.failed.join(", "));
                    }
                    let witnesses: Vec<String> =
                        d.affect_witnesses.iter().map(|w| set_string(w)).collect();
                    let _ = writeln!(
                        out,
                        "  intends to affect: {}{}",
                        if d.intends_to_affect { "yes" } else { "no" },
                        if witnesses.is_empty() {
                            String::new()
                        } else {
                            format!(" via {}", witnesses.join(", "))
                        }
                    );
                    for u in &d.outcome_utilities {
                        let _ =
                            writeln!(out, "  EU with {} held: {}", u.outcome, u.expected_utility);
                    }
                    for o in &d.oblique {
                        let _ = writeln!(out, "{}", oblique_line(o));
                        let _ = writeln!(
                            out,
                            "  {action} obliquely intends {} with confidence {}",
                            o.outcome, q.confidence
                        );
                    }
                }
                QueryOutcome::HkwAffect(a) => {
                    let vars = set_string(&a.variables);
                    if a.intended {
                        let witnesses: Vec<String> =
                            a.witnesses.iter().map(|w| set_string(w)).collect();
                        let _ = writeln!(
                            out,
                            "{vars}: intended to affect via {}",
                            witnesses.join(", ")
                        );
                    } else {
                        let _ = writeln!(out, "{vars}: not intended to affect");
                    }
                    let _ = writeln!(out, "  EU of {}: {}", a.action.join(", "), a.action_utility);
                }
                QueryOutcome::HkwOblique(s) => {
                    let _ = writeln!(out, "{}", oblique_line(&s.verdict));
                    if s.verdict.intended {
                        let _ = writeln!(
                            out,
                            "  {} obliquely intends {} with confidence {}",
                            s.action.join(", "),
                            s.verdict.outcome,
                            q.confidence
                        );
                    }
                }
                QueryOutcome::KgltIntent(k) => {
                    let _ = writeln!(out, "optimal policy: {}", k.policy.join(", "));
                    let _ = writeln!(out, "expected utility: {}", k.expected_utility);
                    let _ = writeln!(
                        out,
                        "foreseen outcome: {} (probability {})",
                        k.foreseen.outcome.join(" "),
                        k.foreseen.probability
                    );
                    let _ = writeln!(out, "intended: {}", set_string(&k.intended));
                    for t in &k.tests {
                        let _ = writeln!(
                            out,
                            "{}: {}",
                            t.node,
                            if t.intended {
                                "intended"
                            } else {
                                "not intended"
                            }
                        );
                    }
                    for o in &k.oblique {
                        let _ = writeln!(out, "{}", id_oblique_line(o));
                    }
                }
                QueryOutcome::KgltOblique(o) => {
                    let _ = writeln!(out, "{}", id_oblique_line(o));
                }
            }
        }
        out
    }
}
