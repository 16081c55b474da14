//! Semantic checks on a parsed document: names, domains, totality.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed};

use super::ast::*;
use super::diagnostics::ParseDiagnostic;
use crate::rational::{ratio_string, Rational};
use crate::scm::VarKind;

pub(crate) struct Symbols<'a> {
    by_name: BTreeMap<&'a str, (usize, &'a VariableDecl)>,
}

impl<'a> Symbols<'a> {
    pub(crate) fn new(doc: &'a ModelDocument) -> Self {
        let mut by_name = BTreeMap::new();
        for (i, v) in doc.variables.iter().enumerate() {
            by_name.entry(v.name.node.as_str()).or_insert((i, v));
        }
        Self { by_name }
    }

    pub(crate) fn get(&self, name: &str) -> Option<(usize, &'a VariableDecl)> {
        self.by_name.get(name).copied()
    }
}

fn is_bool_domain(v: &VariableDecl) -> bool {
    v.domain.len() == 2 && v.domain[0].node == "0" && v.domain[1].node == "1"
}

fn labels(v: &VariableDecl) -> String {
    v.domain
        .iter()
        .map(|l| l.node.as_str())
        .collect::<Vec<_>>()
        .join(", ")
}

struct Checker<'a> {
    syms: Symbols<'a>,
    diags: Vec<ParseDiagnostic>,
    used: BTreeSet<usize>,
}

impl<'a> Checker<'a> {
    fn error(&mut self, span: Span, message: String, token: &str) {
        self.diags.push(ParseDiagnostic::error(
            span,
            message,
            Some(token.to_string()),
        ));
    }

    fn resolve(&mut self, name: &Name) -> Option<&'a VariableDecl> {
        match self.syms.get(&name.node) {
            Some((i, decl)) => {
                if name.span != Span::default() && name.span < decl.name.span {
                    self.error(
                        name.span,
                        format!("`{}` is used before its declaration", name.node),
                        &name.node,
                    );
                    return None;
                }
                self.used.insert(i);
                Some(decl)
            }
            None => {
                self.error(
                    name.span,
                    format!("unknown variable `{}`", name.node),
                    &name.node,
                );
                None
            }
        }
    }

    fn label(&mut self, decl: &VariableDecl, label: &Name) -> bool {
        if decl.domain.iter().any(|l| l.node == label.node) {
            return true;
        }
        self.error(
            label.span,
            format!(
                "`{}` is not a value of `{}` (expected one of {})",
                label.node,
                decl.name.node,
                labels(decl)
            ),
            &label.node,
        );
        false
    }

    fn expr(&mut self, e: &Expr) {
        match e {
            Expr::Const(_) => {}
            Expr::Var(n) => {
                if let Some(decl) = self.resolve(n) {
                    if !is_bool_domain(decl) {
                        self.error(
                            n.span,
                            format!(
                                "`{}` does not range over 0, 1; compare it with `==` or `!=`",
                                n.node
                            ),
                            &n.node,
                        );
                    }
                }
            }
            Expr::Is(n, l) | Expr::IsNot(n, l) => {
                if let Some(decl) = self.resolve(n) {
                    self.label(decl, l);
                }
            }
            Expr::Not(inner) => self.expr(inner),
            Expr::And(items) | Expr::Or(items) => items.iter().for_each(|i| self.expr(i)),
        }
    }

    fn probability(&mut self, p: &Spanned<Rational>, var: &str) {
        if p.node.is_negative() || p.node > Rational::one() {
            self.diags.push(ParseDiagnostic::error(
                p.span,
                format!(
                    "probability {} for `{var}` lies outside [0, 1]",
                    ratio_string(&p.node)
                ),
                None,
            ));
        }
    }

    /// Resolves `literals` and checks kinds; returns false on any problem.
    fn literals(&mut self, lits: &[Literal], want: LiteralRole) -> bool {
        let mut ok = true;
        let mut seen = BTreeSet::new();
        for lit in lits {
            let Some(decl) = self.resolve(&lit.name) else {
                ok = false;
                continue;
            };
            ok &= self.label(decl, &lit.value);
            if !seen.insert(lit.name.node.as_str()) {
                self.error(
                    lit.name.span,
                    format!("`{}` is listed twice", lit.name.node),
                    &lit.name.node,
                );
                ok = false;
            }
            let fits = match want {
                LiteralRole::Outcome => decl.kind == VarKind::Endogenous,
                LiteralRole::Action => decl.kind == VarKind::Decision,
                LiteralRole::Node => decl.kind != VarKind::Decision,
            };
            if !fits {
                let message = match want {
                    LiteralRole::Outcome => format!(
                        "`{}` is {}; outcomes range over endogenous variables",
                        lit.name.node,
                        article(decl.kind)
                    ),
                    LiteralRole::Action => {
                        format!("`{}` is not a decision variable", lit.name.node)
                    }
                    LiteralRole::Node => format!(
                        "`{}` is a decision; side effects are chance nodes",
                        lit.name.node
                    ),
                };
                self.error(lit.name.span, message, &lit.name.node);
                ok = false;
            }
        }
        ok
    }

    fn action(&mut self, lits: &[Literal], decisions: &[&VariableDecl], anchor: Span) {
        if !self.literals(lits, LiteralRole::Action) {
            return;
        }
        let missing: Vec<&str> = decisions
            .iter()
            .filter(|d| !lits.iter().any(|l| l.name.node == d.name.node))
            .map(|d| d.name.node.as_str())
            .collect();
        if !missing.is_empty() {
            self.diags.push(ParseDiagnostic::error(
                anchor,
                format!(
                    "the action must fix every decision; missing {}",
                    missing.join(", ")
                ),
                None,
            ));
        }
    }
}

#[derive(Clone, Copy)]
enum LiteralRole {
    Outcome,
    Action,
    Node,
}

fn article(kind: VarKind) -> &'static str {
    match kind {
        VarKind::Exogenous => "exogenous",
        VarKind::Endogenous => "endogenous",
        VarKind::Decision => "a decision",
    }
}

/// Every semantic problem in `doc`, in source order of discovery.
pub fn validate(doc: &ModelDocument) -> Vec<ParseDiagnostic> {
    let mut c = Checker {
        syms: Symbols::new(doc),
        diags: Vec::new(),
        used: BTreeSet::new(),
    };
    if doc.variables.is_empty() {
        c.diags.push(ParseDiagnostic::error(
            Span::new(1, 1),
            "no variables section",
            None,
        ));
        return c.diags;
    }

    let mut names = BTreeSet::new();
    for v in &doc.variables {
        if !names.insert(v.name.node.as_str()) {
            c.error(
                v.name.span,
                format!("variable `{}` is declared twice", v.name.node),
                &v.name.node,
            );
        }
        let mut seen = BTreeSet::new();
        for l in &v.domain {
            if !seen.insert(l.node.as_str()) {
                c.error(
                    l.span,
                    format!("value `{}` is listed twice for `{}`", l.node, v.name.node),
                    &l.node,
                );
            }
        }
    }

    let mut defined = BTreeSet::new();
    for eq in &doc.equations {
        let target = c.resolve(&eq.target);
        if let Some(decl) = target {
            match decl.kind {
                VarKind::Exogenous | VarKind::Decision => c.error(
                    eq.target.span,
                    format!(
                        "{} variable `{}` cannot have an equation",
                        decl.kind.keyword(),
                        eq.target.node
                    ),
                    &eq.target.node,
                ),
                VarKind::Endogenous => {
                    if !defined.insert(eq.target.node.as_str()) {
                        c.error(
                            eq.target.span,
                            format!("`{}` has more than one equation", eq.target.node),
                            &eq.target.node,
                        );
                    }
                }
            }
        }
        match &eq.body {
            EquationBody::Expr(e) => {
                if let Some(decl) = target {
                    if !is_bool_domain(decl) {
                        c.error(
                            eq.target.span,
                            format!(
                                "`{}` does not range over 0, 1; define it with `case`",
                                eq.target.node
                            ),
                            &eq.target.node,
                        );
                    }
                }
                c.expr(e);
            }
            EquationBody::Case { arms, otherwise } => {
                for arm in arms {
                    c.expr(&arm.when);
                    if let Some(decl) = target {
                        c.label(decl, &arm.value);
                    }
                }
                if let Some(decl) = target {
                    c.label(decl, otherwise);
                }
            }
        }
    }
    for v in &doc.variables {
        if v.kind == VarKind::Endogenous && !defined.contains(v.name.node.as_str()) {
            c.error(
                v.name.span,
                format!("endogenous variable `{}` has no equation", v.name.node),
                &v.name.node,
            );
        }
    }

    let mut priors = BTreeSet::new();
    for d in &doc.distribution {
        // A prior alone does not count as a use.
        let before = c.used.clone();
        let resolved = c.resolve(&d.name);
        c.used = before;
        let Some(decl) = resolved else {
            continue;
        };
        if decl.kind != VarKind::Exogenous {
            c.error(
                d.name.span,
                format!(
                    "`{}` is not exogenous and takes no distribution",
                    d.name.node
                ),
                &d.name.node,
            );
            continue;
        }
        if !priors.insert(d.name.node.as_str()) {
            c.error(
                d.name.span,
                format!("`{}` has more than one distribution", d.name.node),
                &d.name.node,
            );
        }
        match &d.prior {
            Prior::Bernoulli(p) => {
                if decl.domain.len() != 2 {
                    c.error(
                        d.name.span,
                        format!(
                            "a single probability needs a two-valued variable; give `{}` a list of {} weights",
                            d.name.node,
                            decl.domain.len()
                        ),
                        &d.name.node,
                    );
                }
                c.probability(p, &d.name.node);
            }
            Prior::Table(ws) => {
                if ws.len() != decl.domain.len() {
                    c.error(
                        d.name.span,
                        format!(
                            "`{}` has {} values but {} weights are given",
                            d.name.node,
                            decl.domain.len(),
                            ws.len()
                        ),
                        &d.name.node,
                    );
                }
                ws.iter().for_each(|w| c.probability(w, &d.name.node));
                let sum: Rational = ws.iter().map(|w| &w.node).sum();
                if !sum.is_one() {
                    c.error(
                        d.name.span,
                        format!(
                            "weights for `{}` sum to {}, not 1",
                            d.name.node,
                            ratio_string(&sum)
                        ),
                        &d.name.node,
                    );
                }
            }
        }
    }
    for v in &doc.variables {
        if v.kind == VarKind::Exogenous && !priors.contains(v.name.node.as_str()) {
            c.error(
                v.name.span,
                format!("exogenous variable `{}` has no distribution", v.name.node),
                &v.name.node,
            );
        }
    }

    for u in &doc.utility {
        c.expr(&u.when);
    }
    if doc.default_utility.is_none() {
        if let Some(first) = doc.utility.first() {
            let span = first
                .when
                .names()
                .first()
                .map_or(first.value.span, |n| n.span);
            c.diags.push(ParseDiagnostic::error(
                span,
                "the utility section lacks a `default` line",
                None,
            ));
        }
    }

    let decisions: Vec<&VariableDecl> = doc
        .variables
        .iter()
        .filter(|v| v.kind == VarKind::Decision)
        .collect();
    let mut referenced = BTreeSet::new();
    for r in &doc.reference {
        let Some(decl) = c.resolve(&r.name) else {
            continue;
        };
        if decl.kind != VarKind::Decision {
            c.error(
                r.name.span,
                format!("`{}` is not a decision variable", r.name.node),
                &r.name.node,
            );
            continue;
        }
        if !referenced.insert(r.name.node.as_str()) {
            c.error(
                r.name.span,
                format!("`{}` appears twice in the reference", r.name.node),
                &r.name.node,
            );
        }
        let mut seen = BTreeSet::new();
        for v in &r.values {
            c.label(decl, v);
            if !seen.insert(v.node.as_str()) {
                c.error(
                    v.span,
                    format!("value `{}` is listed twice", v.node),
                    &v.node,
                );
            }
        }
    }
    if let Some(first) = doc.reference.first() {
        let missing: Vec<&str> = decisions
            .iter()
            .filter(|d| !referenced.contains(d.name.node.as_str()))
            .map(|d| d.name.node.as_str())
            .collect();
        if !missing.is_empty() {
            c.diags.push(ParseDiagnostic::error(
                first.name.span,
                format!("the reference omits {}", missing.join(", ")),
                None,
            ));
        }
    }

    for q in &doc.queries {
        check_query(&mut c, &q.node, q.span, &decisions);
    }

    for (i, v) in doc.variables.iter().enumerate() {
        if v.kind == VarKind::Exogenous && !c.used.contains(&i) {
            c.diags.push(ParseDiagnostic::warning(
                v.name.span,
                format!("exogenous variable `{}` is never used", v.name.node),
                Some(v.name.node.clone()),
            ));
        }
    }
    c.diags
}

fn check_query(c: &mut Checker<'_>, q: &Query, span: Span, decisions: &[&VariableDecl]) {
    match &q.kind {
        QueryKind::HkwDirect { outcome, action } => {
            c.literals(outcome, LiteralRole::Outcome);
            c.action(action, decisions, span);
        }
        QueryKind::HkwAffect { variables, action } => {
            let mut seen = BTreeSet::new();
            for v in variables {
                if let Some(decl) = c.resolve(v) {
                    if decl.kind != VarKind::Endogenous {
                        c.error(
                            v.span,
                            format!(
                                "`{}` is {}; outcomes range over endogenous variables",
                                v.node,
                                article(decl.kind)
                            ),
                            &v.node,
                        );
                    }
                }
                if !seen.insert(v.node.as_str()) {
                    c.error(v.span, format!("`{}` is listed twice", v.node), &v.node);
                }
            }
            c.action(action, decisions, span);
        }
        QueryKind::HkwOblique {
            side,
            direct,
            action,
        } => {
            let ok =
                c.literals(side, LiteralRole::Outcome) & c.literals(direct, LiteralRole::Outcome);
            if ok {
                for lit in side {
                    if direct.iter().any(|d| d.name.node == lit.name.node) {
                        c.error(
                            lit.name.span,
                            format!("side effect and direct outcome share `{}`", lit.name.node),
                            &lit.name.node,
                        );
                    }
                }
            }
            c.action(action, decisions, span);
        }
        QueryKind::KgltIntent => {}
        QueryKind::KgltOblique { side } => {
            c.literals(std::slice::from_ref(side), LiteralRole::Node);
        }
    }
    if let Some(conf) = &q.confidence {
        if !(conf.node.is_positive() && conf.node < Rational::one()) {
            c.diags.push(ParseDiagnostic::error(
                conf.span,
                format!(
                    "confidence {} must lie strictly between 0 and 1",
                    ratio_string(&conf.node)
                ),
                None,
            ));
        }
    }
}
