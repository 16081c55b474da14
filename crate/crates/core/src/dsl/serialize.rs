//! Canonical text form: sections in fixed order, one blank line between
//! sections, two-space indented case arms, LF line endings.

use std::fmt::Write;

use super::ast::*;
use crate::rational::compact_string;

pub fn serialize(doc: &ModelDocument) -> String {
    let mut sections: Vec<String> = Vec::new();
    let mut push = |name: &str, body: String| {
        if !body.is_empty() {
            sections.push(format!("[{name}]\n{body}"));
        }
    };

    let mut body = String::new();
    for v in &doc.variables {
        let labels: Vec<&str> = v.domain.iter().map(|l| l.node.as_str()).collect();
        let _ = writeln!(
            body,
            "{} {} : {}",
            v.kind.keyword(),
            v.name.node,
            labels.join(", ")
        );
    }
    push(Section::Variables.name(), body);

    let mut body = String::new();
    for eq in &doc.equations {
        match &eq.body {
            EquationBody::Expr(e) => {
                let _ = writeln!(body, "{} = {}", eq.target.node, expr_string(e));
            }
            EquationBody::Case { arms, otherwise } => {
                let _ = writeln!(body, "{} = case", eq.target.node);
                for arm in arms {
                    let _ = writeln!(
                        body,
                        "  when {} -> {}",
                        expr_string(&arm.when),
                        arm.value.node
                    );
                }
                let _ = writeln!(body, "  else -> {}", otherwise.node);
            }
        }
    }
    push(Section::Equations.name(), body);

    let mut body = String::new();
    for d in &doc.distribution {
        let value = match &d.prior {
            Prior::Bernoulli(p) => compact_string(&p.node),
            Prior::Table(ws) => {
                let parts: Vec<String> = ws.iter().map(|w| compact_string(&w.node)).collect();
                format!("[{}]", parts.join(", "))
            }
        };
        let _ = writeln!(body, "{} = {}", d.name.node, value);
    }
    push(Section::Distribution.name(), body);

    let mut body = String::new();
    for u in &doc.utility {
        let _ = writeln!(
            body,
            "{} -> {}",
            expr_string(&u.when),
            compact_string(&u.value.node)
        );
    }
    if let Some(d) = &doc.default_utility {
        let _ = writeln!(body, "default -> {}", compact_string(&d.node));
    }
    push(Section::Utility.name(), body);

    let mut body = String::new();
    for r in &doc.reference {
        let values: Vec<&str> = r.values.iter().map(|v| v.node.as_str()).collect();
        let _ = writeln!(body, "{} = {}", r.name.node, values.join(", "));
    }
    push(Section::Reference.name(), body);

    let mut body = String::new();
    for q in &doc.queries {
        let _ = writeln!(body, "{}", query_string(&q.node));
    }
    push(Section::Queries.name(), body);

    sections.join("\n")
}

fn literals_string(lits: &[Literal]) -> String {
    let parts: Vec<String> = lits
        .iter()
        .map(|l| format!("{} = {}", l.name.node, l.value.node))
        .collect();
    parts.join(", ")
}

/// One query in source form, without a trailing newline.
pub fn query_string(q: &Query) -> String {
    let mut out = match &q.kind {
        QueryKind::HkwDirect { outcome, action } => {
            format!(
                "hkw direct {} given {}",
                literals_string(outcome),
                literals_string(action)
            )
        }
        QueryKind::HkwAffect { variables, action } => {
            let names: Vec<&str> = variables.iter().map(|v| v.node.as_str()).collect();
            format!(
                "hkw affect {} given {}",
                names.join(", "),
                literals_string(action)
            )
        }
        QueryKind::HkwOblique {
            side,
            direct,
            action,
        } => format!(
            "hkw oblique {} via {} given {}",
            literals_string(side),
            literals_string(direct),
            literals_string(action)
        ),
        QueryKind::KgltIntent => "kglt intent".to_string(),
        QueryKind::KgltOblique { side } => format!(
            "kglt oblique {}",
            literals_string(std::slice::from_ref(side))
        ),
    };
    if let Some(c) = &q.confidence {
        let _ = write!(out, " confidence {}", compact_string(&c.node));
    }
    out
}

/// Prints with the fewest parentheses that reparse to the same tree. Nested
/// operators of the same kind keep their parentheses.
pub fn expr_string(e: &Expr) -> String {
    match e {
        Expr::Const(b) => b.to_string(),
        Expr::Var(n) => n.node.clone(),
        Expr::Is(n, v) => format!("{} == {}", n.node, v.node),
        Expr::IsNot(n, v) => format!("{} != {}", n.node, v.node),
        Expr::Not(inner) => match inner.as_ref() {
            Expr::And(_) | Expr::Or(_) | Expr::Is(..) | Expr::IsNot(..) => {
                format!("!({})", expr_string(inner))
            }
            _ => format!("!{}", expr_string(inner)),
        },
        Expr::And(items) => items
            .iter()
            .map(|i| match i {
                Expr::And(_) | Expr::Or(_) => format!("({})", expr_string(i)),
                _ => expr_string(i),
            })
            .collect::<Vec<_>>()
            .join(" & "),
        Expr::Or(items) => items
            .iter()
            .map(|i| match i {
                Expr::Or(_) => format!("({})", expr_string(i)),
                _ => expr_string(i),
            })
            .collect::<Vec<_>>()
            .join(" | "),
    }
}
