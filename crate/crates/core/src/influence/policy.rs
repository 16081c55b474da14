//! Policies, exhaustive optimisation and the best foreseen outcome.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use super::{one_point, IdError, InfluenceDiagram, NodeId, NodeSpec};
use crate::rational::{compact_string, Rational};
use crate::scm::for_each_tuple;

/// One decision rule per decision node: a distribution over the decision's
/// domain for each realization of its parents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Policy {
    rules: BTreeMap<NodeId, Vec<Vec<Rational>>>,
}

impl Policy {
    pub fn new(
        id: &InfluenceDiagram,
        rules: BTreeMap<NodeId, Vec<Vec<Rational>>>,
    ) -> Result<Self, IdError> {
        let policy = Self { rules };
        policy.check(id)?;
        Ok(policy)
    }

    /// Deterministic policy from one chosen value per parent realization.
    pub fn deterministic(
        id: &InfluenceDiagram,
        choices: &[(NodeId, Vec<usize>)],
    ) -> Result<Self, IdError> {
        let mut rules = BTreeMap::new();
        for (node, values) in choices {
            let size = id.node(*node).domain().len();
            if let Some(&bad) = values.iter().find(|&&v| v >= size) {
                return Err(IdError::ValueOutOfRange {
                    node: id.node(*node).name.clone(),
                    value: bad,
                });
            }
            rules.insert(*node, values.iter().map(|&v| one_point(size, v)).collect());
        }
        Self::new(id, rules)
    }

    /// Every decision takes a fixed value whatever it observes.
    pub fn constant(id: &InfluenceDiagram, choices: &[(NodeId, usize)]) -> Result<Self, IdError> {
        let expanded: Vec<(NodeId, Vec<usize>)> = choices
            .iter()
            .map(|&(node, v)| (node, vec![v; parent_rows(id, node)]))
            .collect();
        Self::deterministic(id, &expanded)
    }

    pub(crate) fn check(&self, id: &InfluenceDiagram) -> Result<(), IdError> {
        for (node, _) in &self.rules {
            if node.0 >= id.len() || !id.node(*node).is_decision() {
                return Err(IdError::PolicyMalformed(
                    id.nodes()
                        .get(node.0)
                        .map_or_else(|| node.to_string(), |n| n.name.clone()),
                ));
            }
        }
        for node in id.decisions() {
            let name = || id.node(node).name.clone();
            let rows = self
                .rules
                .get(&node)
                .ok_or_else(|| IdError::PolicyMissing(name()))?;
            let size = id.node(node).domain().len();
            let well_formed = rows.len() == parent_rows(id, node)
                && rows.iter().all(|r| {
                    r.len() == size
                        && !r.iter().any(Signed::is_negative)
                        && r.iter().sum::<Rational>().is_one()
                });
            if !well_formed {
                return Err(IdError::PolicyMalformed(name()));
            }
        }
        Ok(())
    }

    pub fn rules(&self) -> &BTreeMap<NodeId, Vec<Vec<Rational>>> {
        &self.rules
    }

    pub(crate) fn row(&self, node: NodeId, row: usize) -> &[Rational] {
        &self.rules[&node][row]
    }

    /// The chosen value per parent realization, when every rule is deterministic.
    pub fn choices(&self) -> Option<BTreeMap<NodeId, Vec<usize>>> {
        self.rules
            .iter()
            .map(|(&node, rows)| {
                rows.iter()
                    .map(|r| r.iter().position(One::is_one))
                    .collect::<Option<Vec<usize>>>()
                    .map(|vals| (node, vals))
            })
            .collect()
    }

    /// `B=1` for rules that ignore their parents, `B[0,1]=...` per parent row
    /// otherwise; stochastic rules print their rows.
    pub fn describe(&self, id: &InfluenceDiagram) -> Vec<String> {
        let choices = self.choices();
        self.rules
            .iter()
            .map(|(&node, rows)| {
                let n = id.node(node);
                match choices.as_ref().map(|c| &c[&node]) {
                    Some(vals) if vals.windows(2).all(|w| w[0] == w[1]) => {
                        format!("{}={}", n.name, n.domain()[vals[0]])
                    }
                    Some(vals) => {
                        let parts: Vec<String> =
                            vals.iter().map(|&v| n.domain()[v].clone()).collect();
                        format!("{}=[{}]", n.name, parts.join(","))
                    }
                    None => {
                        let parts: Vec<String> = rows
                            .iter()
                            .map(|r| r.iter().map(compact_string).collect::<Vec<_>>().join(" "))
                            .collect();
                        format!("{}~[{}]", n.name, parts.join("; "))
                    }
                }
            })
            .collect()
    }
}

fn parent_rows(id: &InfluenceDiagram, node: NodeId) -> usize {
    id.node(node).parents.iter().fold(1usize, |acc, p| {
        acc.saturating_mul(id.node(*p).domain().len())
    })
}

/// Size guard for exhaustive enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_policies: u128,
    pub max_realizations: u128,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_policies: 20,
            max_realizations: 1 << 16,
        }
    }
}

impl Limits {
    pub fn check(&self, id: &InfluenceDiagram) -> Result<(), IdError> {
        let policies = policy_count(id);
        let realizations = id.realization_count();
        if policies > self.max_policies || realizations > self.max_realizations {
            return Err(IdError::TooLarge {
                policies,
                realizations,
                max_policies: self.max_policies,
                max_realizations: self.max_realizations,
            });
        }
        Ok(())
    }
}

/// Number of deterministic policies respecting each decision's allowed values.
pub fn policy_count(id: &InfluenceDiagram) -> u128 {
    id.decisions().iter().fold(1u128, |acc, &d| {
        let allowed = allowed_values(id, d).len() as u128;
        (0..parent_rows(id, d)).fold(acc, |a, _| a.saturating_mul(allowed))
    })
}

fn allowed_values(id: &InfluenceDiagram, node: NodeId) -> Vec<usize> {
    match &id.node(node).spec {
        NodeSpec::Decision { allowed, .. } => (0..allowed.len()).filter(|&i| allowed[i]).collect(),
        _ => Vec::new(),
    }
}

/// The expected-utility maximiser among deterministic policies and its value.
///
/// Policies are enumerated decision by decision in node order, parent rows in
/// lexicographic order, values in domain order, first position most
/// significant; the first maximiser wins.
pub fn optimal_policy(
    id: &InfluenceDiagram,
    limits: &Limits,
) -> Result<(Policy, Rational), IdError> {
    limits.check(id)?;
    let mut slots: Vec<(NodeId, Vec<usize>)> = Vec::new();
    for d in id.decisions() {
        let allowed = allowed_values(id, d);
        for _ in 0..parent_rows(id, d) {
            slots.push((d, allowed.clone()));
        }
    }
    let sizes: Vec<usize> = slots.iter().map(|(_, a)| a.len()).collect();
    let mut best: Option<(Policy, Rational)> = None;
    let mut failure = None;
    for_each_tuple(&sizes, |tuple| {
        if failure.is_some() {
            return;
        }
        let mut choices: Vec<(NodeId, Vec<usize>)> = Vec::new();
        for ((node, allowed), &i) in slots.iter().zip(tuple) {
            match choices.last_mut() {
                Some((last, vals)) if last == node => vals.push(allowed[i]),
                _ => choices.push((*node, vec![allowed[i]])),
            }
        }
        let result = Policy::deterministic(id, &choices).and_then(|pi| {
            let eu = id.expected_utility(&pi)?;
            Ok((pi, eu))
        });
        match result {
            Ok((pi, eu)) => {
                if best.as_ref().is_none_or(|(_, b)| eu > *b) {
                    best = Some((pi, eu));
                }
            }
            Err(e) => failure = Some(e),
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    // A diagram without decisions has exactly one (empty) policy.
    best.map_or_else(
        || {
            let pi = Policy::new(id, BTreeMap::new())?;
            let eu = id.expected_utility(&pi)?;
            Ok((pi, eu))
        },
        Ok,
    )
}

/// `ξ`: a full realization. Utility nodes carry their value, other nodes an index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    /// Domain index per node; 0 for utility nodes.
    pub values: Vec<usize>,
    pub utilities: BTreeMap<NodeId, Rational>,
}

impl Outcome {
    pub(crate) fn from_values(id: &InfluenceDiagram, values: &[usize]) -> Self {
        let utilities = id
            .utilities()
            .into_iter()
            .map(|u| {
                let NodeSpec::Utility { values: table } = &id.node(u).spec else {
                    unreachable!("utilities() returns utility nodes")
                };
                (u, table[id.row_of(u, values)].clone())
            })
            .collect();
        Self {
            values: values.to_vec(),
            utilities,
        }
    }

    pub fn value(&self, node: NodeId) -> usize {
        self.values[node.0]
    }

    pub fn total_utility(&self) -> Rational {
        self.utilities.values().sum()
    }

    /// `NAME=label` for every decision and chance node, then `NAME=value` for utility nodes.
    pub fn describe(&self, id: &InfluenceDiagram) -> Vec<String> {
        id.ids()
            .map(|n| match self.utilities.get(&n) {
                Some(u) => format!("{}={}", id.node(n).name, compact_string(u)),
                None => id.describe_value(n, self.values[n.0]),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForeseenOutcome {
    pub outcome: Outcome,
    pub probability: Rational,
    /// `U(ξ)·P(ξ)`.
    pub score: Rational,
}

/// `F(π)`: the positive-probability realization maximising utility times
/// probability, ties broken by the smaller realization vector.
pub fn best_foreseen_outcome(
    id: &InfluenceDiagram,
    pi: &Policy,
) -> Result<ForeseenOutcome, IdError> {
    let mut best: Option<(Vec<usize>, Rational, Rational)> = None;
    id.for_each_realization(pi, |values, p| {
        let score = id.utility_of(values) * p;
        let better = match &best {
            None => true,
            Some((bv, _, bs)) => score > *bs || (score == *bs && values < bv.as_slice()),
        };
        if better {
            best = Some((values.to_vec(), p.clone(), score));
        }
    })?;
    let (values, probability, score) =
        best.unwrap_or_else(|| (vec![0; id.len()], Rational::zero(), Rational::zero()));
    Ok(ForeseenOutcome {
        outcome: Outcome::from_values(id, &values),
        probability,
        score,
    })
}
