//! Lowering of a validated document to a causal model with an epistemic
//! state, or to an influence diagram.
//!
//! Variables keep their declaration index in both targets: `VarId(i)` and
//! `NodeId(i)` name the same thing.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_traits::Zero;

use super::ast::*;
use super::diagnostics::ParseDiagnostic;
use super::serialize::query_string;
use super::validate::validate;
use crate::epistemic::{
    product_state_with, EpistemicState, ExogenousPrior, UtilityFunction, UtilityTerm,
};
use crate::hkw::{IntentError, ReferenceSet};
use crate::influence::{to_howard_canonical_form, InfluenceDiagram, Node, NodeId};
use crate::rational::Rational;
use crate::scm::{
    for_each_tuple, Assignment, CausalModel, ModelDiagnostic, Signature, StructuralEquation, VarId,
    Variable,
};

/// An expression with names resolved to variables and value indices.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Compiled {
    Const(bool),
    Is(VarId, usize),
    IsNot(VarId, usize),
    Not(Box<Compiled>),
    And(Vec<Compiled>),
    Or(Vec<Compiled>),
}

impl Compiled {
    fn eval(&self, value: &impl Fn(VarId) -> usize) -> bool {
        match self {
            Compiled::Const(b) => *b,
            Compiled::Is(v, x) => value(*v) == *x,
            Compiled::IsNot(v, x) => value(*v) != *x,
            Compiled::Not(e) => !e.eval(value),
            Compiled::And(es) => es.iter().all(|e| e.eval(value)),
            Compiled::Or(es) => es.iter().any(|e| e.eval(value)),
        }
    }

    fn vars(&self, out: &mut BTreeSet<VarId>) {
        match self {
            Compiled::Const(_) => {}
            Compiled::Is(v, _) | Compiled::IsNot(v, _) => {
                out.insert(*v);
            }
            Compiled::Not(e) => e.vars(out),
            Compiled::And(es) | Compiled::Or(es) => es.iter().for_each(|e| e.vars(out)),
        }
    }
}

fn compile(sig: &Signature, e: &Expr) -> Compiled {
    let var = |n: &Name| sig.lookup(&n.node).expect("validated name");
    match e {
        Expr::Const(b) => Compiled::Const(*b),
        Expr::Var(n) => Compiled::Is(var(n), 1),
        Expr::Is(n, l) => {
            let v = var(n);
            Compiled::Is(v, sig.value_index(v, &l.node).expect("validated label"))
        }
        Expr::IsNot(n, l) => {
            let v = var(n);
            Compiled::IsNot(v, sig.value_index(v, &l.node).expect("validated label"))
        }
        Expr::Not(inner) => Compiled::Not(Box::new(compile(sig, inner))),
        Expr::And(es) => Compiled::And(es.iter().map(|e| compile(sig, e)).collect()),
        Expr::Or(es) => Compiled::Or(es.iter().map(|e| compile(sig, e)).collect()),
    }
}

/// Calls `f` on each row of the joint space of `scope` with a lookup closure.
fn tabulate<T>(
    sig: &Signature,
    scope: &[VarId],
    mut f: impl FnMut(&dyn Fn(VarId) -> usize) -> T,
) -> Vec<T> {
    let sizes: Vec<usize> = scope.iter().map(|&v| sig.domain_size(v)).collect();
    let mut out = Vec::new();
    for_each_tuple(&sizes, |row| {
        let lookup = |v: VarId| {
            row[scope
                .iter()
                .position(|&s| s == v)
                .expect("variable in scope")]
        };
        out.push(f(&lookup));
    });
    out
}

/// A query with names resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResolvedQuery {
    HkwDirect {
        outcome: Vec<(VarId, usize)>,
        action: Assignment,
    },
    HkwAffect {
        variables: Vec<VarId>,
        action: Assignment,
    },
    HkwOblique {
        side: Vec<(VarId, usize)>,
        direct: Vec<(VarId, usize)>,
        action: Assignment,
    },
    KgltIntent,
    KgltOblique {
        node: VarId,
        value: usize,
    },
}

impl ResolvedQuery {
    pub fn is_hkw(&self) -> bool {
        !matches!(
            self,
            ResolvedQuery::KgltIntent | ResolvedQuery::KgltOblique { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoweredQuery {
    pub kind: ResolvedQuery,
    pub confidence: Option<Rational>,
    /// Canonical source text of the query.
    pub source: String,
}

#[derive(Debug, Clone)]
pub struct ScmProgram {
    pub model: Arc<CausalModel>,
    pub state: EpistemicState,
    /// Per-decision reference values, when the document gives them.
    pub reference: Option<Vec<(VarId, Vec<usize>)>>,
    pub queries: Vec<LoweredQuery>,
}

impl ScmProgram {
    /// The document's reference set, or every other joint action when none is given.
    pub fn reference_for(&self, action: &Assignment) -> Result<ReferenceSet, IntentError> {
        let sig = self.model.signature();
        match &self.reference {
            Some(per_decision) => ReferenceSet::product(sig, per_decision),
            None => ReferenceSet::all_except(sig, action),
        }
    }
}

#[derive(Debug, Clone)]
pub struct IdProgram {
    pub diagram: InfluenceDiagram,
    pub queries: Vec<LoweredQuery>,
}

/// Pieces shared by both lowerings.
struct Lowered {
    signature: Arc<Signature>,
    equations: Vec<StructuralEquation>,
    prior: ExogenousPrior,
    terms: Vec<UtilityTerm>,
    default: Rational,
    reference: Option<Vec<(VarId, Vec<usize>)>>,
    queries: Vec<LoweredQuery>,
}

fn errors_only(diags: Vec<ParseDiagnostic>) -> Result<(), Vec<ParseDiagnostic>> {
    let errors: Vec<ParseDiagnostic> = diags
        .into_iter()
        .filter(ParseDiagnostic::is_error)
        .collect();
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

fn internal(message: impl std::fmt::Display) -> Vec<ParseDiagnostic> {
    vec![ParseDiagnostic::error(
        Span::new(1, 1),
        message.to_string(),
        None,
    )]
}

fn lower_common(doc: &ModelDocument) -> Result<Lowered, Vec<ParseDiagnostic>> {
    errors_only(validate(doc))?;
    let vars: Vec<Variable> = doc
        .variables
        .iter()
        .map(|v| {
            let labels: Vec<&str> = v.domain.iter().map(|l| l.node.as_str()).collect();
            Variable::new(&v.name.node, v.kind, &labels)
        })
        .collect();
    let signature = Arc::new(Signature::new(vars).map_err(internal)?);
    let sig = &*signature;
    let id_of = |n: &Name| sig.lookup(&n.node).expect("validated name");
    let value_of = |v: VarId, l: &Name| sig.value_index(v, &l.node).expect("validated label");

    let mut equations = Vec::new();
    for eq in &doc.equations {
        let target = id_of(&eq.target);
        let mut scope = BTreeSet::new();
        let equation = match &eq.body {
            EquationBody::Expr(e) => {
                let c = compile(sig, e);
                c.vars(&mut scope);
                let parents: Vec<VarId> = scope.into_iter().collect();
                let table = tabulate(sig, &parents, |val| usize::from(c.eval(&val)));
                StructuralEquation {
                    target,
                    parents,
                    table,
                }
            }
            EquationBody::Case { arms, otherwise } => {
                let compiled: Vec<(Compiled, usize)> = arms
                    .iter()
                    .map(|a| {
                        let c = compile(sig, &a.when);
                        c.vars(&mut scope);
                        (c, value_of(target, &a.value))
                    })
                    .collect();
                let fallback = value_of(target, otherwise);
                let parents: Vec<VarId> = scope.into_iter().collect();
                let table = tabulate(sig, &parents, |val| {
                    compiled
                        .iter()
                        .find(|(c, _)| c.eval(&val))
                        .map_or(fallback, |(_, x)| *x)
                });
                StructuralEquation {
                    target,
                    parents,
                    table,
                }
            }
        };
        equations.push(equation);
    }

    let mut prior = ExogenousPrior::default();
    for d in &doc.distribution {
        let v = id_of(&d.name);
        let result = match &d.prior {
            Prior::Bernoulli(p) => prior.set_bernoulli(sig, v, p.node.clone()),
            Prior::Table(ws) => prior.set(sig, v, ws.iter().map(|w| w.node.clone()).collect()),
        };
        result.map_err(|e| {
            vec![ParseDiagnostic::error(
                d.name.span,
                e.to_string(),
                Some(d.name.node.clone()),
            )]
        })?;
    }

    let terms = doc
        .utility
        .iter()
        .map(|u| {
            let c = compile(sig, &u.when);
            let mut scope = BTreeSet::new();
            c.vars(&mut scope);
            let scope: Vec<VarId> = scope.into_iter().collect();
            let table = tabulate(sig, &scope, |val| {
                c.eval(&val).then(|| u.value.node.clone())
            });
            UtilityTerm { scope, table }
        })
        .collect();
    let default = doc
        .default_utility
        .as_ref()
        .map_or_else(Rational::zero, |d| d.node.clone());

    let reference = (!doc.reference.is_empty()).then(|| {
        sig.decisions()
            .into_iter()
            .map(|d| {
                let decl = doc
                    .reference
                    .iter()
                    .find(|r| r.name.node == sig.name(d))
                    .expect("validated reference covers every decision");
                (d, decl.values.iter().map(|l| value_of(d, l)).collect())
            })
            .collect()
    });

    let pairs = |lits: &[Literal]| -> Vec<(VarId, usize)> {
        lits.iter()
            .map(|l| {
                let v = id_of(&l.name);
                (v, value_of(v, &l.value))
            })
            .collect()
    };
    let queries = doc
        .queries
        .iter()
        .map(|q| {
            let kind = match &q.node.kind {
                QueryKind::HkwDirect { outcome, action } => ResolvedQuery::HkwDirect {
                    outcome: pairs(outcome),
                    action: pairs(action).into_iter().collect(),
                },
                QueryKind::HkwAffect { variables, action } => ResolvedQuery::HkwAffect {
                    variables: variables.iter().map(id_of).collect(),
                    action: pairs(action).into_iter().collect(),
                },
                QueryKind::HkwOblique {
                    side,
                    direct,
                    action,
                } => ResolvedQuery::HkwOblique {
                    side: pairs(side),
                    direct: pairs(direct),
                    action: pairs(action).into_iter().collect(),
                },
                QueryKind::KgltIntent => ResolvedQuery::KgltIntent,
                QueryKind::KgltOblique { side } => {
                    let (node, value) = pairs(std::slice::from_ref(side))[0];
                    ResolvedQuery::KgltOblique { node, value }
                }
            };
            LoweredQuery {
                kind,
                confidence: q.node.confidence.as_ref().map(|c| c.node.clone()),
                source: query_string(&q.node),
            }
        })
        .collect();

    Ok(Lowered {
        signature,
        equations,
        prior,
        terms,
        default,
        reference,
        queries,
    })
}

fn model_errors(doc: &ModelDocument, model: &CausalModel) -> Vec<ParseDiagnostic> {
    crate::scm::validate_model(model)
        .into_iter()
        .map(|d| {
            let anchor = match &d {
                ModelDiagnostic::Cycle { variables } => doc
                    .equations
                    .iter()
                    .find(|e| variables.first() == Some(&e.target.node))
                    .map(|e| (e.target.span, e.target.node.clone())),
                _ => None,
            };
            match anchor {
                Some((span, token)) => ParseDiagnostic::error(span, d.to_string(), Some(token)),
                None => ParseDiagnostic::error(Span::new(1, 1), d.to_string(), None),
            }
        })
        .collect()
}

/// Compiles the document to a causal model with a product prior over contexts.
pub fn lower_to_scm(doc: &ModelDocument) -> Result<ScmProgram, Vec<ParseDiagnostic>> {
    let l = lower_common(doc)?;
    let model = CausalModel::new(Arc::clone(&l.signature), l.equations);
    let errors = model_errors(doc, &model);
    if !errors.is_empty() {
        return Err(errors);
    }
    let model = Arc::new(model);
    let utility = UtilityFunction::new(&l.signature, l.terms, l.default).map_err(internal)?;
    let state = product_state_with(Arc::clone(&model), &l.prior, utility).map_err(internal)?;
    Ok(ScmProgram {
        model,
        state,
        reference: l.reference,
        queries: l.queries,
    })
}

fn fresh(taken: &BTreeSet<String>, base: &str) -> String {
    let mut name = base.to_string();
    while taken.contains(&name) {
        name.push('\'');
    }
    name
}

/// Compiles the document to an influence diagram in canonical form.
///
/// Exogenous variables become parentless chance nodes, endogenous variables
/// deterministic chance nodes and decisions decision nodes without observed
/// parents. Utility term `i` becomes node `U_i`, worth its value where the
/// term applies and 0 elsewhere; a nonzero default adds `U_default`, which
/// pays the default wherever no term applies.
pub fn lower_to_id(doc: &ModelDocument) -> Result<IdProgram, Vec<ParseDiagnostic>> {
    let l = lower_common(doc)?;
    let model = CausalModel::new(Arc::clone(&l.signature), l.equations);
    let errors = model_errors(doc, &model);
    if !errors.is_empty() {
        return Err(errors);
    }
    let sig = &*l.signature;
    let mut taken: BTreeSet<String> = sig.variables().iter().map(|v| v.name.clone()).collect();
    let mut nodes = Vec::new();
    for v in sig.ids() {
        let var = sig.var(v);
        let labels: Vec<&str> = var.domain.iter().map(String::as_str).collect();
        let node = match var.kind {
            crate::scm::VarKind::Exogenous => {
                let weights = l.prior.get(v).expect("validated prior").to_vec();
                Node::chance(&var.name, vec![], &labels, vec![weights])
            }
            crate::scm::VarKind::Decision => Node::decision(&var.name, vec![], &labels),
            crate::scm::VarKind::Endogenous => {
                let eq = model.equation(v).expect("validated equation");
                let parents = eq.parents.iter().map(|p| NodeId(p.0)).collect();
                Node::deterministic(&var.name, parents, &labels, &eq.table)
            }
        };
        nodes.push(node);
    }
    for (i, term) in l.terms.iter().enumerate() {
        let name = fresh(&taken, &format!("U_{}", i + 1));
        taken.insert(name.clone());
        let values = term
            .table
            .iter()
            .map(|x| x.clone().unwrap_or_else(Rational::zero))
            .collect();
        let parents = term.scope.iter().map(|v| NodeId(v.0)).collect();
        nodes.push(Node::utility(&name, parents, values));
    }
    if !l.default.is_zero() {
        let name = fresh(&taken, "U_default");
        let scope: Vec<VarId> = l
            .terms
            .iter()
            .flat_map(|t| t.scope.iter().copied())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let values = tabulate(sig, &scope, |val| {
            let fires = l.terms.iter().any(|t| {
                let row = t
                    .scope
                    .iter()
                    .fold(0usize, |acc, &v| acc * sig.domain_size(v) + val(v));
                t.table[row].is_some()
            });
            if fires {
                Rational::zero()
            } else {
                l.default.clone()
            }
        });
        nodes.push(Node::utility(
            &name,
            scope.iter().map(|v| NodeId(v.0)).collect(),
            values,
        ));
    }
    let diagram = InfluenceDiagram::new(nodes).map_err(internal)?;
    Ok(IdProgram {
        diagram: to_howard_canonical_form(&diagram),
        queries: l.queries,
    })
}
