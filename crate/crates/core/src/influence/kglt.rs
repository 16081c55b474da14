//! Restriction, the KGLT intent procedure and oblique intent on diagrams.

use num_traits::Zero;

use super::policy::{best_foreseen_outcome, optimal_policy, ForeseenOutcome, Limits, Policy};
use super::{hcf::to_howard_canonical_form, IdError, InfluenceDiagram, NodeId, NodeSpec};
use crate::hkw::ObliqueClause;
use crate::rational::{Confidence, Rational};

/// A diagram in which `node` can no longer take `forbidden`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestrictedDiagram {
    pub diagram: InfluenceDiagram,
    pub node: NodeId,
    pub forbidden: usize,
}

/// `ID_{Y != F}`. Chance rows drop the forbidden value and renormalise, falling
/// back to uniform over the remaining values when no mass is left; decisions
/// lose the value from their choice set.
pub fn restrict(
    id: &InfluenceDiagram,
    node: NodeId,
    forbidden: usize,
) -> Result<RestrictedDiagram, IdError> {
    if node.0 >= id.len() {
        return Err(IdError::UnknownNode(node.to_string()));
    }
    let mut nodes = id.nodes().to_vec();
    let target = &mut nodes[node.0];
    let name = target.name.clone();
    if target.is_utility() {
        return Err(IdError::NotRestrictable(name));
    }
    let size = target.domain().len();
    if forbidden >= size {
        return Err(IdError::ValueOutOfRange {
            node: name,
            value: forbidden,
        });
    }
    match &mut target.spec {
        NodeSpec::Utility { .. } => unreachable!("checked above"),
        NodeSpec::Decision { allowed, .. } => {
            if allowed
                .iter()
                .enumerate()
                .filter(|&(i, &a)| a && i != forbidden)
                .count()
                == 0
            {
                return Err(IdError::SingletonDomain(name));
            }
            allowed[forbidden] = false;
        }
        NodeSpec::Chance { rows, .. } => {
            if size < 2 {
                return Err(IdError::SingletonDomain(name));
            }
            for row in rows.iter_mut() {
                row[forbidden] = Rational::zero();
                let mass: Rational = row.iter().sum();
                if mass.is_zero() {
                    let share = Rational::new(1.into(), ((size - 1) as i64).into());
                    for (i, p) in row.iter_mut().enumerate() {
                        if i != forbidden {
                            *p = share.clone();
                        }
                    }
                } else {
                    for p in row.iter_mut() {
                        *p = &*p / &mass;
                    }
                }
            }
        }
    }
    Ok(RestrictedDiagram {
        diagram: InfluenceDiagram::new(nodes)?,
        node,
        forbidden,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct KgltOptions {
    /// Chance nodes count as intended only when the canonical optimal policy
    /// of the restricted diagram differs from the original one, instead of
    /// when the original policy falls short of the restricted optimum.
    pub strict_policy_change: bool,
    pub limits: Limits,
}

/// The restriction test of one node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeTest {
    pub node: NodeId,
    /// Foreseen value that was forbidden.
    pub value: usize,
    pub intended: bool,
    pub restricted_policy: Policy,
    pub restricted_optimum: Rational,
    /// Expected utility of the original optimal policy in the restricted
    /// diagram; absent for decision nodes, where that policy may be inadmissible.
    pub policy_value: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KgltReport {
    /// The diagram in canonical form; ids of the input diagram are preserved.
    pub diagram: InfluenceDiagram,
    pub policy: Policy,
    pub expected_utility: Rational,
    pub foreseen: ForeseenOutcome,
    /// Tests in evaluation order (reverse topological).
    pub tests: Vec<NodeTest>,
    /// Intended `(node, foreseen value)` pairs in node order.
    pub intended: Vec<(NodeId, usize)>,
}

/// The KGLT intent procedure.
///
/// Nodes are tested when they are decisions or descend from one. Each tested
/// node is forbidden from its foreseen value. A chance node is intended when
/// the optimal policy no longer attains the optimum of the restricted
/// diagram; a decision node when the restricted optimum is strictly lower.
/// Nodes with a single admissible value cannot be restricted and are skipped.
pub fn kglt_intent(id: &InfluenceDiagram, opts: &KgltOptions) -> Result<KgltReport, IdError> {
    let diagram = to_howard_canonical_form(id);
    let (policy, expected_utility) = optimal_policy(&diagram, &opts.limits)?;
    let foreseen = best_foreseen_outcome(&diagram, &policy)?;
    let mut tests = Vec::new();
    for &y in diagram.order().iter().rev() {
        let node = diagram.node(y);
        if node.is_utility() || !(node.is_decision() || diagram.has_decision_ancestor(y)) {
            continue;
        }
        let value = foreseen.outcome.value(y);
        let restricted = match restrict(&diagram, y, value) {
            Ok(r) => r,
            Err(IdError::SingletonDomain(_)) => continue,
            Err(e) => return Err(e),
        };
        let (restricted_policy, restricted_optimum) =
            optimal_policy(&restricted.diagram, &opts.limits)?;
        let (intended, policy_value) = if node.is_decision() {
            (restricted_optimum < expected_utility, None)
        } else {
            let achieved = restricted.diagram.expected_utility(&policy)?;
            let intended = if opts.strict_policy_change {
                restricted_policy != policy
            } else {
                achieved < restricted_optimum
            };
            (intended, Some(achieved))
        };
        tests.push(NodeTest {
            node: y,
            value,
            intended,
            restricted_policy,
            restricted_optimum,
            policy_value,
        });
    }
    let mut intended: Vec<(NodeId, usize)> = tests
        .iter()
        .filter(|t| t.intended)
        .map(|t| (t.node, t.value))
        .collect();
    intended.sort();
    Ok(KgltReport {
        diagram,
        policy,
        expected_utility,
        foreseen,
        tests,
        intended,
    })
}

/// `P(Y = y | Z = z)` for one intended pair; `None` when `P(Z = z) = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conditional {
    pub node: NodeId,
    pub value: usize,
    pub probability: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdObliqueVerdict {
    pub node: NodeId,
    pub value: usize,
    pub intended: bool,
    /// Clause a is the marginal test, clause b the conditional one.
    pub clause: Option<ObliqueClause>,
    pub marginal: Rational,
    pub conditionals: Vec<Conditional>,
    /// Value reached by the clause that fired, or the marginal when none did.
    pub achieved: Rational,
    /// The intended pair behind a clause b verdict.
    pub witness: Option<(NodeId, usize)>,
}

/// Oblique intent of `Y = y` under `pi`, given the intended pairs.
pub fn id_oblique_intent(
    id: &InfluenceDiagram,
    pi: &Policy,
    node: NodeId,
    value: usize,
    c: &Confidence,
    intended: &[(NodeId, usize)],
) -> Result<IdObliqueVerdict, IdError> {
    if node.0 >= id.len() {
        return Err(IdError::UnknownNode(node.to_string()));
    }
    let n = id.node(node);
    if n.is_utility() {
        return Err(IdError::NotRestrictable(n.name.clone()));
    }
    if value >= n.domain().len() {
        return Err(IdError::ValueOutOfRange {
            node: n.name.clone(),
            value,
        });
    }
    if intended.contains(&(node, value)) {
        return Err(IdError::AlreadyIntended(id.describe_value(node, value)));
    }
    let mut marginal = Rational::zero();
    let mut given = vec![Rational::zero(); intended.len()];
    let mut joint = vec![Rational::zero(); intended.len()];
    id.for_each_realization(pi, |values, p| {
        let hit = values[node.0] == value;
        if hit {
            marginal += p;
        }
        for (i, &(z, zv)) in intended.iter().enumerate() {
            if values[z.0] == zv {
                given[i] += p;
                if hit {
                    joint[i] += p;
                }
            }
        }
    })?;
    let conditionals: Vec<Conditional> = intended
        .iter()
        .zip(given.iter().zip(&joint))
        .map(|(&(z, zv), (g, j))| Conditional {
            node: z,
            value: zv,
            probability: (!g.is_zero()).then(|| j / g),
        })
        .collect();
    let mut best: Option<&Conditional> = None;
    for cond in &conditionals {
        if let Some(p) = &cond.probability {
            if best
                .and_then(|b| b.probability.as_ref())
                .is_none_or(|bp| p > bp)
            {
                best = Some(cond);
            }
        }
    }
    let best_conditional = best.and_then(|b| b.probability.clone());
    let clause = if marginal > *c.value() {
        Some(ObliqueClause::A)
    } else if best_conditional.as_ref().is_some_and(|b| b > c.value()) {
        Some(ObliqueClause::B)
    } else {
        None
    };
    let achieved = match (clause, &best_conditional) {
        (Some(ObliqueClause::B), Some(b)) => b.clone(),
        _ => marginal.clone(),
    };
    let witness = (clause == Some(ObliqueClause::B))
        .then(|| best.map(|b| (b.node, b.value)))
        .flatten();
    Ok(IdObliqueVerdict {
        node,
        value,
        intended: clause.is_some(),
        clause,
        marginal,
        conditionals,
        achieved,
        witness,
    })
}

/// Oblique verdicts for every value of every chance node that descends from a
/// decision and is not itself intended, keeping those that hold.
pub fn id_oblique_scan(
    id: &InfluenceDiagram,
    pi: &Policy,
    c: &Confidence,
    intended: &[(NodeId, usize)],
) -> Result<Vec<IdObliqueVerdict>, IdError> {
    let mut found = Vec::new();
    for y in id.ids() {
        let node = id.node(y);
        if !node.is_chance()
            || !id.has_decision_ancestor(y)
            || intended.iter().any(|&(z, _)| z == y)
        {
            continue;
        }
        for v in 0..node.domain().len() {
            let verdict = id_oblique_intent(id, pi, y, v, c, intended)?;
            if verdict.intended {
                found.push(verdict);
            }
        }
    }
    Ok(found)
}
