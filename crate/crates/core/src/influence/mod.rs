//! Influence diagrams: decision, chance and utility nodes over a DAG.
//!
//! Inference is by exhaustive enumeration of realizations, pruning branches of
//! probability zero. All arithmetic is exact.

mod hcf;
mod kglt;
mod policy;

use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::Rational;
use crate::scm::row_index;

pub use hcf::to_howard_canonical_form;
pub use kglt::{
    id_oblique_intent, id_oblique_scan, kglt_intent, restrict, Conditional, IdObliqueVerdict,
    KgltOptions, KgltReport, NodeTest, RestrictedDiagram,
};
pub use policy::{
    best_foreseen_outcome, optimal_policy, policy_count, ForeseenOutcome, Limits, Outcome, Policy,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeSpec {
    /// `allowed` masks the values a policy may choose.
    Decision {
        domain: Vec<String>,
        allowed: Vec<bool>,
    },
    /// One distribution per parent realization, first parent most significant.
    Chance {
        domain: Vec<String>,
        rows: Vec<Vec<Rational>>,
    },
    /// One value per parent realization.
    Utility { values: Vec<Rational> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub name: String,
    pub parents: Vec<NodeId>,
    pub spec: NodeSpec,
}

fn labels(domain: &[&str]) -> Vec<String> {
    domain.iter().map(|s| s.to_string()).collect()
}

impl Node {
    pub fn decision(name: &str, parents: Vec<NodeId>, domain: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            parents,
            spec: NodeSpec::Decision {
                domain: labels(domain),
                allowed: vec![true; domain.len()],
            },
        }
    }

    pub fn chance(
        name: &str,
        parents: Vec<NodeId>,
        domain: &[&str],
        rows: Vec<Vec<Rational>>,
    ) -> Self {
        Self {
            name: name.to_string(),
            parents,
            spec: NodeSpec::Chance {
                domain: labels(domain),
                rows,
            },
        }
    }

    /// A chance node putting unit mass on `table[row]` in every row.
    pub fn deterministic(
        name: &str,
        parents: Vec<NodeId>,
        domain: &[&str],
        table: &[usize],
    ) -> Self {
        let rows = table.iter().map(|&v| one_point(domain.len(), v)).collect();
        Self::chance(name, parents, domain, rows)
    }

    pub fn utility(name: &str, parents: Vec<NodeId>, values: Vec<Rational>) -> Self {
        Self {
            name: name.to_string(),
            parents,
            spec: NodeSpec::Utility { values },
        }
    }

    pub fn domain(&self) -> &[String] {
        match &self.spec {
            NodeSpec::Decision { domain, .. } | NodeSpec::Chance { domain, .. } => domain,
            NodeSpec::Utility { .. } => &[],
        }
    }

    pub fn is_decision(&self) -> bool {
        matches!(self.spec, NodeSpec::Decision { .. })
    }

    pub fn is_chance(&self) -> bool {
        matches!(self.spec, NodeSpec::Chance { .. })
    }

    pub fn is_utility(&self) -> bool {
        matches!(self.spec, NodeSpec::Utility { .. })
    }

    /// Every row of a chance node puts unit mass on one value.
    pub fn is_deterministic(&self) -> bool {
        match &self.spec {
            NodeSpec::Chance { rows, .. } => rows.iter().all(|r| r.iter().any(One::is_one)),
            _ => false,
        }
    }
}

pub(crate) fn one_point(size: usize, value: usize) -> Vec<Rational> {
    (0..size)
        .map(|i| {
            if i == value {
                Rational::one()
            } else {
                Rational::zero()
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdError {
    #[error("node `{0}` is declared twice")]
    DuplicateNode(String),
    #[error("node `{0}` has an empty domain")]
    EmptyDomain(String),
    #[error("node `{node}` names missing parent #{parent}")]
    UnknownParent { node: String, parent: usize },
    #[error("node `{node}` has utility node `{parent}` as a parent")]
    UtilityParent { node: String, parent: String },
    #[error("node `{node}` lists parent `{parent}` twice")]
    RepeatedParent { node: String, parent: String },
    #[error("cycle through {}", .0.join(", "))]
    Cycle(Vec<String>),
    #[error("node `{node}` has {found} rows, expected {expected}")]
    RowCount {
        node: String,
        expected: usize,
        found: usize,
    },
    #[error("row {row} of node `{node}` has {found} entries, expected {expected}")]
    RowLength {
        node: String,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row} of node `{node}` does not sum to 1")]
    RowSum { node: String, row: usize },
    #[error("row {row} of node `{node}` has a negative probability")]
    NegativeProbability { node: String, row: usize },
    #[error("decision `{0}` has no allowed value")]
    NoAllowedValue(String),
    #[error("decision `{0}` has an allowed mask of the wrong length")]
    AllowedLength(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("`{0}` is not a decision node")]
    NotDecision(String),
    #[error("utility node `{0}` cannot be restricted")]
    NotRestrictable(String),
    #[error("node `{0}` has a single admissible value; nothing is left after restriction")]
    SingletonDomain(String),
    #[error("value {value} is outside the domain of `{node}`")]
    ValueOutOfRange { node: String, value: usize },
    #[error("policy has no rule for decision `{0}`")]
    PolicyMissing(String),
    #[error("policy rule for `{0}` is malformed")]
    PolicyMalformed(String),
    #[error(
        "diagram too large to enumerate: {policies} policies (limit {max_policies}), \
         {realizations} realizations (limit {max_realizations})"
    )]
    TooLarge {
        policies: u128,
        realizations: u128,
        max_policies: u128,
        max_realizations: u128,
    },
    #[error("`{0}` is already in the intended set")]
    AlreadyIntended(String),
}

/// A validated, immutable influence diagram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfluenceDiagram {
    nodes: Vec<Node>,
    order: Vec<NodeId>,
}

impl InfluenceDiagram {
    pub fn new(nodes: Vec<Node>) -> Result<Self, IdError> {
        for (i, node) in nodes.iter().enumerate() {
            if nodes[..i].iter().any(|n| n.name == node.name) {
                return Err(IdError::DuplicateNode(node.name.clone()));
            }
            for (j, p) in node.parents.iter().enumerate() {
                let parent = nodes.get(p.0).ok_or_else(|| IdError::UnknownParent {
                    node: node.name.clone(),
                    parent: p.0,
                })?;
                if parent.is_utility() {
                    return Err(IdError::UtilityParent {
                        node: node.name.clone(),
                        parent: parent.name.clone(),
                    });
                }
                if node.parents[..j].contains(p) {
                    return Err(IdError::RepeatedParent {
                        node: node.name.clone(),
                        parent: parent.name.clone(),
                    });
                }
            }
            let rows = node.parents.iter().fold(1usize, |acc, p| {
                acc.saturating_mul(nodes[p.0].domain().len())
            });
            check_spec(node, rows)?;
        }
        let order = topological_order(&nodes)?;
        Ok(Self { nodes, order })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn lookup(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.name == name).map(NodeId)
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len()).map(NodeId)
    }

    /// Topological order, ties broken by declaration order.
    pub fn order(&self) -> &[NodeId] {
        &self.order
    }

    pub fn decisions(&self) -> Vec<NodeId> {
        self.ids()
            .filter(|&id| self.node(id).is_decision())
            .collect()
    }

    pub fn utilities(&self) -> Vec<NodeId> {
        self.ids()
            .filter(|&id| self.node(id).is_utility())
            .collect()
    }

    pub fn children(&self, id: NodeId) -> Vec<NodeId> {
        self.ids()
            .filter(|&c| self.node(c).parents.contains(&id))
            .collect()
    }

    /// Strict ancestors of `id`.
    pub fn ancestors(&self, id: NodeId) -> Vec<NodeId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = self.node(id).parents.clone();
        while let Some(p) = stack.pop() {
            if !seen[p.0] {
                seen[p.0] = true;
                stack.extend(self.node(p).parents.iter().copied());
            }
        }
        self.ids().filter(|p| seen[p.0]).collect()
    }

    pub fn has_decision_ancestor(&self, id: NodeId) -> bool {
        self.ancestors(id)
            .iter()
            .any(|&a| self.node(a).is_decision())
    }

    pub(crate) fn row_of(&self, id: NodeId, values: &[usize]) -> usize {
        let parents = &self.node(id).parents;
        row_index(
            parents.iter().map(|p| self.node(*p).domain().len()),
            parents.iter().map(|p| values[p.0]),
        )
    }

    /// Product of the domain sizes of all decision and chance nodes.
    pub fn realization_count(&self) -> u128 {
        self.nodes
            .iter()
            .filter(|n| !n.is_utility())
            .fold(1u128, |acc, n| acc.saturating_mul(n.domain().len() as u128))
    }

    /// `U(ξ)`: sum of the utility nodes' values in realization `values`.
    pub fn utility_of(&self, values: &[usize]) -> Rational {
        let mut total = Rational::zero();
        for id in self.ids() {
            if let NodeSpec::Utility { values: table } = &self.node(id).spec {
                total += &table[self.row_of(id, values)];
            }
        }
        total
    }

    /// Calls `f` on every realization with positive probability under `policy`,
    /// with its probability. Entries of utility nodes are left at 0.
    pub fn for_each_realization(
        &self,
        policy: &Policy,
        mut f: impl FnMut(&[usize], &Rational),
    ) -> Result<(), IdError> {
        policy.check(self)?;
        let steps: Vec<NodeId> = self
            .order
            .iter()
            .copied()
            .filter(|&id| !self.node(id).is_utility())
            .collect();
        let mut values = vec![0usize; self.nodes.len()];
        self.descend(policy, &steps, &mut values, &Rational::one(), &mut f);
        Ok(())
    }

    fn descend(
        &self,
        policy: &Policy,
        steps: &[NodeId],
        values: &mut Vec<usize>,
        prob: &Rational,
        f: &mut impl FnMut(&[usize], &Rational),
    ) {
        let Some((&id, rest)) = steps.split_first() else {
            f(values, prob);
            return;
        };
        let row = self.row_of(id, values);
        let dist = match &self.node(id).spec {
            NodeSpec::Chance { rows, .. } => &rows[row],
            NodeSpec::Decision { .. } => policy.row(id, row),
            NodeSpec::Utility { .. } => unreachable!("utility nodes are not enumerated"),
        };
        for (v, p) in dist.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            values[id.0] = v;
            self.descend(policy, rest, values, &(prob * p), f);
        }
        values[id.0] = 0;
    }

    /// `EU[ID(π)]`.
    pub fn expected_utility(&self, policy: &Policy) -> Result<Rational, IdError> {
        let mut total = Rational::zero();
        self.for_each_realization(policy, |values, p| total += p * self.utility_of(values))?;
        Ok(total)
    }

    /// Marginal distribution of every decision and chance node; utility nodes get an empty vector.
    pub fn marginals(&self, policy: &Policy) -> Result<Vec<Vec<Rational>>, IdError> {
        let mut out: Vec<Vec<Rational>> = self
            .nodes
            .iter()
            .map(|n| vec![Rational::zero(); n.domain().len()])
            .collect();
        self.for_each_realization(policy, |values, p| {
            for (i, node) in self.nodes.iter().enumerate() {
                if !node.is_utility() {
                    out[i][values[i]] += p;
                }
            }
        })?;
        Ok(out)
    }

    /// Probability that every `(node, value)` pair in `event` holds.
    pub fn probability(
        &self,
        policy: &Policy,
        event: &[(NodeId, usize)],
    ) -> Result<Rational, IdError> {
        let mut total = Rational::zero();
        self.for_each_realization(policy, |values, p| {
            if event.iter().all(|&(n, v)| values[n.0] == v) {
                total += p;
            }
        })?;
        Ok(total)
    }

    pub fn describe_value(&self, id: NodeId, value: usize) -> String {
        let node = self.node(id);
        format!("{}={}", node.name, node.domain()[value])
    }
}

fn check_spec(node: &Node, rows: usize) -> Result<(), IdError> {
    let name = || node.name.clone();
    match &node.spec {
        NodeSpec::Decision { domain, allowed } => {
            if domain.is_empty() {
                return Err(IdError::EmptyDomain(name()));
            }
            if allowed.len() != domain.len() {
                return Err(IdError::AllowedLength(name()));
            }
            if !allowed.iter().any(|&a| a) {
                return Err(IdError::NoAllowedValue(name()));
            }
        }
        NodeSpec::Chance {
            domain,
            rows: table,
        } => {
            if domain.is_empty() {
                return Err(IdError::EmptyDomain(name()));
            }
            if table.len() != rows {
                return Err(IdError::RowCount {
                    node: name(),
                    expected: rows,
                    found: table.len(),
                });
            }
            for (row, dist) in table.iter().enumerate() {
                if dist.len() != domain.len() {
                    return Err(IdError::RowLength {
                        node: name(),
                        row,
                        expected: domain.len(),
                        found: dist.len(),
                    });
                }
                if dist.iter().any(Signed::is_negative) {
                    return Err(IdError::NegativeProbability { node: name(), row });
                }
                if !dist.iter().sum::<Rational>().is_one() {
                    return Err(IdError::RowSum { node: name(), row });
                }
            }
        }
        NodeSpec::Utility { values } => {
            if values.len() != rows {
                return Err(IdError::RowCount {
                    node: name(),
                    expected: rows,
                    found: values.len(),
                });
            }
        }
    }
    Ok(())
}

fn topological_order(nodes: &[Node]) -> Result<Vec<NodeId>, IdError> {
    let n = nodes.len();
    let mut indegree: Vec<usize> = nodes.iter().map(|node| node.parents.len()).collect();
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let Some(next) = (0..n).find(|&i| !done[i] && indegree[i] == 0) else {
            let stuck = (0..n)
                .filter(|&i| !done[i])
                .map(|i| nodes[i].name.clone())
                .collect();
            return Err(IdError::Cycle(stuck));
        };
        done[next] = true;
        order.push(NodeId(next));
        for (i, node) in nodes.iter().enumerate() {
            indegree[i] -= node.parents.iter().filter(|p| p.0 == next).count();
        }
    }
    Ok(order)
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}
