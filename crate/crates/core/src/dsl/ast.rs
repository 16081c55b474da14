//! Syntax tree of a model document. Spans are carried for diagnostics but
//! ignored by equality, so a reparsed document compares equal to its source.

use std::fmt;

use crate::rational::Rational;
use crate::scm::VarKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

impl Span {
    pub fn new(line: usize, column: usize) -> Self {
        Self { line, column }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone)]
pub struct Spanned<T> {
    pub node: T,
    pub span: Span,
}

impl<T> Spanned<T> {
    pub fn new(node: T, span: Span) -> Self {
        Self { node, span }
    }

    /// A node with no source position.
    pub fn bare(node: T) -> Self {
        Self::new(node, Span::default())
    }
}

impl<T: PartialEq> PartialEq for Spanned<T> {
    fn eq(&self, other: &Self) -> bool {
        self.node == other.node
    }
}

impl<T: Eq> Eq for Spanned<T> {}

pub type Name = Spanned<String>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Const(bool),
    /// Bare name of a `{0, 1}` variable: true when it is 1.
    Var(Name),
    Is(Name, Name),
    IsNot(Name, Name),
    Not(Box<Expr>),
    /// At least two operands.
    And(Vec<Expr>),
    /// At least two operands.
    Or(Vec<Expr>),
}

impl Expr {
    /// Every variable name mentioned, in order of appearance, with repeats.
    pub fn names(&self) -> Vec<&Name> {
        let mut out = Vec::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names<'a>(&'a self, out: &mut Vec<&'a Name>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(n) | Expr::Is(n, _) | Expr::IsNot(n, _) => out.push(n),
            Expr::Not(e) => e.collect_names(out),
            Expr::And(es) | Expr::Or(es) => es.iter().for_each(|e| e.collect_names(out)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableDecl {
    pub kind: VarKind,
    pub name: Name,
    pub domain: Vec<Name>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseArm {
    pub when: Expr,
    pub value: Name,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EquationBody {
    /// Boolean expression for a `{0, 1}` target.
    Expr(Expr),
    /// First matching arm wins.
    Case { arms: Vec<CaseArm>, otherwise: Name },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquationDecl {
    pub target: Name,
    pub body: EquationBody,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Prior {
    /// Probability of the second domain value of a binary variable.
    Bernoulli(Spanned<Rational>),
    /// One weight per domain value.
    Table(Vec<Spanned<Rational>>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistributionDecl {
    pub name: Name,
    pub prior: Prior,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UtilityDecl {
    pub when: Expr,
    pub value: Spanned<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferenceDecl {
    pub name: Name,
    pub values: Vec<Name>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Literal {
    pub name: Name,
    pub value: Name,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryKind {
    /// Direct intent of `outcome` through `action`.
    HkwDirect {
        outcome: Vec<Literal>,
        action: Vec<Literal>,
    },
    /// Intends-to-affect for a set of variables.
    HkwAffect {
        variables: Vec<Name>,
        action: Vec<Literal>,
    },
    /// Oblique intent of `side` with `direct` as the direct target.
    HkwOblique {
        side: Vec<Literal>,
        direct: Vec<Literal>,
        action: Vec<Literal>,
    },
    /// The KGLT procedure on the lowered diagram.
    KgltIntent,
    /// Oblique intent of one node value on the lowered diagram.
    KgltOblique { side: Literal },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub kind: QueryKind,
    pub confidence: Option<Spanned<Rational>>,
}

fn unplace(n: &Name) -> Name {
    Spanned::bare(n.node.clone())
}

fn unplace_literals(lits: &[Literal]) -> Vec<Literal> {
    lits.iter()
        .map(|l| Literal {
            name: unplace(&l.name),
            value: unplace(&l.value),
        })
        .collect()
}

impl Query {
    /// The same query with every span cleared, for queries that come from
    /// outside the document and so have no position in it.
    pub fn unplaced(&self) -> Query {
        let kind = match &self.kind {
            QueryKind::HkwDirect { outcome, action } => QueryKind::HkwDirect {
                outcome: unplace_literals(outcome),
                action: unplace_literals(action),
            },
            QueryKind::HkwAffect { variables, action } => QueryKind::HkwAffect {
                variables: variables.iter().map(unplace).collect(),
                action: unplace_literals(action),
            },
            QueryKind::HkwOblique { side, direct, action } => QueryKind::HkwOblique {
                side: unplace_literals(side),
                direct: unplace_literals(direct),
                action: unplace_literals(action),
            },
            QueryKind::KgltIntent => QueryKind::KgltIntent,
            QueryKind::KgltOblique { side } => QueryKind::KgltOblique {
                side: unplace_literals(std::slice::from_ref(side)).remove(0),
            },
        };
        Query {
            kind,
            confidence: self.confidence.as_ref().map(|c| Spanned::bare(c.node.clone())),
        }
    }
}

impl ReferenceDecl {
    /// See [`Query::unplaced`].
    pub fn unplaced(&self) -> ReferenceDecl {
        ReferenceDecl {
            name: unplace(&self.name),
            values: self.values.iter().map(unplace).collect(),
        }
    }
}

/// Sections that may appear in a document, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Section {
    Variables,
    Equations,
    Distribution,
    Utility,
    Reference,
    Queries,
}

impl Section {
    pub const ALL: [Section; 6] = [
        Section::Variables,
        Section::Equations,
        Section::Distribution,
        Section::Utility,
        Section::Reference,
        Section::Queries,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Section::Variables => "variables",
            Section::Equations => "equations",
            Section::Distribution => "distribution",
            Section::Utility => "utility",
            Section::Reference => "reference",
            Section::Queries => "queries",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ModelDocument {
    pub variables: Vec<VariableDecl>,
    pub equations: Vec<EquationDecl>,
    pub distribution: Vec<DistributionDecl>,
    pub utility: Vec<UtilityDecl>,
    pub default_utility: Option<Spanned<Rational>>,
    pub reference: Vec<ReferenceDecl>,
    pub queries: Vec<Spanned<Query>>,
}

/// Words that cannot name variables or values.
pub const KEYWORDS: &[&str] = &[
    "exogenous",
    "endogenous",
    "decision",
    "case",
    "when",
    "else",
    "default",
    "true",
    "false",
    "hkw",
    "kglt",
    "direct",
    "affect",
    "oblique",
    "intent",
    "via",
    "given",
    "confidence",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}
