//! Random documents for the DSL properties. They are syntactically valid but
//! need not make semantic sense.

use intent_core::dsl::ast::{
    CaseArm, DistributionDecl, EquationBody, EquationDecl, Expr, Literal, ModelDocument, Prior, Query, QueryKind,
    ReferenceDecl, Spanned, UtilityDecl, VariableDecl,
};
use intent_core::rational::{frac, Rational};
use intent_core::scm::VarKind;
use proptest::prelude::*;

const NAMES: &[&str] = &["A", "B", "X1", "Y_2", "rain", "U_E"];
const LABELS: &[&str] = &["0", "1", "2", "lo", "hi", "off"];

fn name() -> impl Strategy<Value = Spanned<String>> {
    proptest::sample::select(NAMES).prop_map(|n| Spanned::bare(n.to_string()))
}

fn label() -> impl Strategy<Value = Spanned<String>> {
    proptest::sample::select(LABELS).prop_map(|n| Spanned::bare(n.to_string()))
}

fn rational(signed: bool) -> impl Strategy<Value = Rational> {
    let lo = if signed { -200 } else { 0 };
    (lo..200i64, proptest::sample::select(vec![1i64, 2, 3, 4, 8, 10, 200])).prop_map(|(n, d)| frac(n, d))
}

fn probability() -> impl Strategy<Value = Rational> {
    (0..=20i64).prop_map(|n| frac(n, 20))
}

pub fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        any::<bool>().prop_map(Expr::Const),
        name().prop_map(Expr::Var),
        (name(), label()).prop_map(|(n, v)| Expr::Is(n, v)),
        (name(), label()).prop_map(|(n, v)| Expr::IsNot(n, v)),
    ];
    leaf.prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Not(Box::new(e))),
            proptest::collection::vec(inner.clone(), 2..=3).prop_map(Expr::And),
            proptest::collection::vec(inner, 2..=3).prop_map(Expr::Or),
        ]
    })
}

fn variable() -> impl Strategy<Value = VariableDecl> {
    (
        proptest::sample::select(vec![VarKind::Exogenous, VarKind::Endogenous, VarKind::Decision]),
        name(),
        proptest::collection::vec(label(), 1..=3),
    )
        .prop_map(|(kind, name, domain)| VariableDecl { kind, name, domain })
}

fn equation() -> impl Strategy<Value = EquationDecl> {
    let body = prop_oneof![
        expr().prop_map(EquationBody::Expr),
        (
            proptest::collection::vec((expr(), label()).prop_map(|(when, value)| CaseArm { when, value }), 1..=3),
            label()
        )
            .prop_map(|(arms, otherwise)| EquationBody::Case { arms, otherwise }),
    ];
    (name(), body).prop_map(|(target, body)| EquationDecl { target, body })
}

fn distribution() -> impl Strategy<Value = DistributionDecl> {
    let prior = prop_oneof![
        probability().prop_map(|p| Prior::Bernoulli(Spanned::bare(p))),
        proptest::collection::vec(rational(false).prop_map(Spanned::bare), 1..=4).prop_map(Prior::Table),
    ];
    (name(), prior).prop_map(|(name, prior)| DistributionDecl { name, prior })
}

fn literals() -> impl Strategy<Value = Vec<Literal>> {
    proptest::collection::vec((name(), label()).prop_map(|(name, value)| Literal { name, value }), 1..=2)
}

fn query() -> impl Strategy<Value = Spanned<Query>> {
    let kind = prop_oneof![
        (literals(), literals()).prop_map(|(outcome, action)| QueryKind::HkwDirect { outcome, action }),
        (proptest::collection::vec(name(), 1..=2), literals())
            .prop_map(|(variables, action)| QueryKind::HkwAffect { variables, action }),
        (literals(), literals(), literals())
            .prop_map(|(side, direct, action)| QueryKind::HkwOblique { side, direct, action }),
        Just(QueryKind::KgltIntent),
        (name(), label()).prop_map(|(name, value)| QueryKind::KgltOblique {
            side: Literal { name, value }
        }),
    ];
    let confidence = proptest::option::of((1..20i64).prop_map(|n| Spanned::bare(frac(n, 20))));
    (kind, confidence).prop_map(|(kind, confidence)| Spanned::bare(Query { kind, confidence }))
}

pub fn document() -> impl Strategy<Value = ModelDocument> {
    (
        proptest::collection::vec(variable(), 0..=4),
        proptest::collection::vec(equation(), 0..=3),
        proptest::collection::vec(distribution(), 0..=3),
        proptest::collection::vec(
            (expr(), rational(true)).prop_map(|(when, v)| UtilityDecl {
                when,
                value: Spanned::bare(v),
            }),
            0..=3,
        ),
        proptest::option::of(rational(true).prop_map(Spanned::bare)),
        proptest::collection::vec(
            (name(), proptest::collection::vec(label(), 1..=2)).prop_map(|(name, values)| ReferenceDecl { name, values }),
            0..=2,
        ),
        proptest::collection::vec(query(), 0..=3),
    )
        .prop_map(
            |(variables, equations, distribution, utility, default_utility, reference, queries)| ModelDocument {
                variables,
                equations,
                distribution,
                utility,
                default_utility,
                reference,
                queries,
            },
        )
}

/// A random acyclic model over binary variables written twice: once with
/// expression equations and once with the same functions spelled out as
/// exhaustive case tables.
#[derive(Debug, Clone)]
pub struct SugarPair {
    pub sugar: String,
    pub tables: String,
}

/// Boolean expression over the variables `names`, printed directly.
fn bool_expr(names: Vec<String>) -> BoxedStrategy<String> {
    let leaf = prop_oneof![
        proptest::sample::select(names.clone()),
        proptest::sample::select(names.clone()).prop_map(|n| format!("{n} == 0")),
        proptest::sample::select(names).prop_map(|n| format!("{n} != 0")),
        Just("true".to_string()),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| format!("!({e})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) & ({b})")),
            (inner.clone(), inner).prop_map(|(a, b)| format!("({a}) | ({b})")),
        ]
    })
    .boxed()
}

fn eval(expr: &str, env: &[(String, bool)]) -> bool {
    // Tiny evaluator for the printed form above; all binary operands are parenthesised.
    fn atom(s: &str, env: &[(String, bool)]) -> bool {
        let s = s.trim();
        if s == "true" {
            return true;
        }
        if let Some(inner) = s.strip_prefix("!(").and_then(|r| r.strip_suffix(')')) {
            if balanced(inner) {
                return !atom(inner, env);
            }
        }
        if let Some((l, op, r)) = split_top(s) {
            return match op {
                '&' => atom(l, env) && atom(r, env),
                _ => atom(l, env) || atom(r, env),
            };
        }
        if let Some(inner) = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
            if balanced(inner) {
                return atom(inner, env);
            }
        }
        let lookup = |n: &str| env.iter().find(|(k, _)| k == n.trim()).unwrap().1;
        if let Some(n) = s.strip_suffix(" == 0") {
            return !lookup(n);
        }
        if let Some(n) = s.strip_suffix(" != 0") {
            return lookup(n);
        }
        lookup(s)
    }
    fn balanced(s: &str) -> bool {
        let mut depth = 0i32;
        for c in s.chars() {
            match c {
                '(' => depth += 1,
                ')' => depth -= 1,
                _ => {}
            }
            if depth < 0 {
                return false;
            }
        }
        depth == 0
    }
    fn split_top(s: &str) -> Option<(&str, char, &str)> {
        let mut depth = 0i32;
        for (i, c) in s.char_indices() {
            match c {
                '(' => depth += 1,
                ')' => depth -= 1,
                '&' | '|' if depth == 0 => return Some((&s[..i], c, &s[i + 1..])),
                _ => {}
            }
        }
        None
    }
    atom(expr, env)
}

pub fn sugar_pair() -> impl Strategy<Value = SugarPair> {
    (1usize..=3, 1usize..=4).prop_flat_map(|(n_exo, n_endo)| {
        let mut exprs = Vec::new();
        for i in 0..n_endo {
            let mut pool: Vec<String> = (0..n_exo).map(|u| format!("U{u}")).collect();
            pool.extend((0..i).map(|j| format!("X{j}")));
            let parents = proptest::sample::subsequence(pool, 1..=(n_exo + i).min(3));
            exprs.push(parents.prop_flat_map(|ps| (Just(ps.clone()), bool_expr(ps))).boxed());
        }
        (Just(n_exo), exprs, proptest::collection::vec(1..20i64, n_exo)).prop_map(|(n_exo, exprs, priors)| {
            let mut head = String::from("[variables]\n");
            for u in 0..n_exo {
                head += &format!("exogenous U{u} : 0, 1\n");
            }
            for i in 0..exprs.len() {
                head += &format!("endogenous X{i} : 0, 1\n");
            }
            let mut tail = String::from("\n[distribution]\n");
            for (u, p) in priors.iter().enumerate() {
                tail += &format!("U{u} = {p}/20\n");
            }
            let mut sugar = String::from("\n[equations]\n");
            let mut tables = String::from("\n[equations]\n");
            for (i, (parents, e)) in exprs.iter().enumerate() {
                sugar += &format!("X{i} = {e}\n");
                tables += &format!("X{i} = case\n");
                for row in 0..(1usize << parents.len()) {
                    let env: Vec<(String, bool)> = parents
                        .iter()
                        .enumerate()
                        .map(|(k, p)| (p.clone(), (row >> k) & 1 == 1))
                        .collect();
                    let cond: Vec<String> = env.iter().map(|(p, b)| format!("{p} == {}", u8::from(*b))).collect();
                    tables += &format!("  when {} -> {}\n", cond.join(" & "), u8::from(eval(e, &env)));
                }
                tables += "  else -> 0\n";
            }
            SugarPair {
                sugar: format!("{head}{sugar}{tail}"),
                tables: format!("{head}{tables}{tail}"),
            }
        })
    })
}
