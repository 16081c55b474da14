//! Random model generators and brute-force oracles shared by the property
//! and acceptance suites. The oracles work from the generator's own data and
//! enumerate full joints; they never call the engine's solvers.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use intent_core::epistemic::{product_state, EpistemicState, UtilityFunction, UtilityTerm};
use intent_core::influence::{InfluenceDiagram, Node, NodeId, Policy};
use intent_core::rational::{frac, int, Rational};
use intent_core::scm::{CausalModel, Signature, StructuralEquation, VarId, VarKind, Variable};
use num_traits::{One, Zero};
use proptest::prelude::*;

pub mod corpus;
pub mod docs;
pub mod props;

/// Probabilities the generators draw from.
pub const PROBS: [(i64, i64); 7] = [(0, 1), (1, 4), (1, 3), (1, 2), (2, 3), (3, 4), (1, 1)];

/// Binary SCM: exogenous `U0..`, at most one decision `A`, endogenous `X0..`
/// in topological order. Variable ids follow that layout.
#[derive(Debug, Clone)]
pub struct ScmBlueprint {
    pub n_exo: usize,
    pub has_decision: bool,
    /// Parents of each endogenous variable, as variable ids.
    pub parents: Vec<Vec<usize>>,
    /// Truth table of each endogenous variable, first parent most significant.
    pub tables: Vec<Vec<usize>>,
    /// `P(U_i = 1)`.
    pub priors: Vec<Rational>,
    /// Utility gained when `X_i = 1`.
    pub weights: Vec<i64>,
}

impl ScmBlueprint {
    pub fn n_dec(&self) -> usize {
        usize::from(self.has_decision)
    }

    pub fn n_endo(&self) -> usize {
        self.parents.len()
    }

    pub fn len(&self) -> usize {
        self.n_exo + self.n_dec() + self.n_endo()
    }

    pub fn endo_id(&self, i: usize) -> usize {
        self.n_exo + self.n_dec() + i
    }

    pub fn decision(&self) -> Option<VarId> {
        self.has_decision.then_some(VarId(self.n_exo))
    }

    pub fn signature(&self) -> Signature {
        let mut vars = Vec::new();
        for i in 0..self.n_exo {
            vars.push(Variable::binary(&format!("U{i}"), VarKind::Exogenous));
        }
        if self.has_decision {
            vars.push(Variable::binary("A", VarKind::Decision));
        }
        for i in 0..self.n_endo() {
            vars.push(Variable::binary(&format!("X{i}"), VarKind::Endogenous));
        }
        Signature::new(vars).unwrap()
    }

    pub fn model(&self) -> Arc<CausalModel> {
        let sig = Arc::new(self.signature());
        let equations = (0..self.n_endo())
            .map(|i| {
                let parents: Vec<VarId> = self.parents[i].iter().map(|&p| VarId(p)).collect();
                let table = &self.tables[i];
                StructuralEquation::from_fn(&sig, VarId(self.endo_id(i)), parents, |row| {
                    table[row.iter().fold(0, |acc, &b| acc * 2 + b)]
                })
            })
            .collect();
        Arc::new(CausalModel::new(sig, equations))
    }

    pub fn utility(&self, sig: &Signature) -> UtilityFunction {
        let terms = (0..self.n_endo())
            .map(|i| {
                let w = int(self.weights[i]);
                UtilityTerm::from_fn(sig, vec![VarId(self.endo_id(i))], move |row| (row[0] == 1).then(|| w.clone()))
            })
            .collect();
        UtilityFunction::new(sig, terms, Rational::zero()).unwrap()
    }

    pub fn state(&self) -> EpistemicState {
        let model = self.model();
        let sig = Arc::clone(model.signature());
        let priors: BTreeMap<VarId, Rational> = (0..self.n_exo).map(|i| (VarId(i), self.priors[i].clone())).collect();
        product_state(model, &priors, self.utility(&sig)).unwrap()
    }

    /// Every context with its probability, `U0` most significant.
    pub fn contexts(&self) -> Vec<(Vec<usize>, Rational)> {
        let mut out = Vec::new();
        for bits in 0..(1usize << self.n_exo) {
            let ctx: Vec<usize> = (0..self.n_exo).map(|i| (bits >> (self.n_exo - 1 - i)) & 1).collect();
            let mut p = Rational::one();
            for (i, &b) in ctx.iter().enumerate() {
                p *= if b == 1 { self.priors[i].clone() } else { Rational::one() - &self.priors[i] };
            }
            out.push((ctx, p));
        }
        out
    }

    /// Full world for a context and action, with `frozen` variables held.
    pub fn world(&self, ctx: &[usize], action: usize, frozen: &BTreeMap<usize, usize>) -> Vec<usize> {
        let mut w = vec![0; self.len()];
        w[..self.n_exo].copy_from_slice(ctx);
        if self.has_decision {
            w[self.n_exo] = frozen.get(&self.n_exo).copied().unwrap_or(action);
        }
        for i in 0..self.n_endo() {
            let id = self.endo_id(i);
            w[id] = match frozen.get(&id) {
                Some(&v) => v,
                None => {
                    let row = self.parents[i].iter().fold(0, |acc, &p| acc * 2 + w[p]);
                    self.tables[i][row]
                }
            };
        }
        w
    }

    pub fn utility_of(&self, w: &[usize]) -> Rational {
        (0..self.n_endo()).map(|i| int(self.weights[i] * w[self.endo_id(i)] as i64)).sum()
    }

    /// `P(all of lits | all of given)` under `action`; `None` when the condition has probability 0.
    pub fn conditional(&self, action: usize, lits: &[(usize, usize)], given: &[(usize, usize)]) -> Option<Rational> {
        let mut joint = Rational::zero();
        let mut cond = Rational::zero();
        for (ctx, p) in self.contexts() {
            let w = self.world(&ctx, action, &BTreeMap::new());
            if given.iter().all(|&(v, x)| w[v] == x) {
                cond += &p;
                if lits.iter().all(|&(v, x)| w[v] == x) {
                    joint += &p;
                }
            }
        }
        (!cond.is_zero()).then(|| joint / cond)
    }

    /// Left and right sides of the freeze inequality for `frozen` endogenous ids.
    pub fn freeze_sides(&self, action: usize, reference: &[usize], frozen: &[usize]) -> (Rational, Rational) {
        let mut lhs = Rational::zero();
        let mut best: Option<Rational> = None;
        for (ctx, p) in self.contexts() {
            if p.is_zero() {
                continue;
            }
            lhs += &p * self.utility_of(&self.world(&ctx, action, &BTreeMap::new()));
        }
        for &alt in reference {
            let mut total = Rational::zero();
            for (ctx, p) in self.contexts() {
                if p.is_zero() {
                    continue;
                }
                let base = self.world(&ctx, action, &BTreeMap::new());
                let hold: BTreeMap<usize, usize> = frozen.iter().map(|&v| (v, base[v])).collect();
                total += &p * self.utility_of(&self.world(&ctx, alt, &hold));
            }
            if best.as_ref().is_none_or(|b| total > *b) {
                best = Some(total);
            }
        }
        (lhs, best.unwrap_or_else(Rational::zero))
    }

    pub fn satisfies(&self, action: usize, reference: &[usize], frozen: &[usize]) -> bool {
        let (lhs, rhs) = self.freeze_sides(action, reference, frozen);
        lhs <= rhs
    }
}

fn prob() -> impl Strategy<Value = Rational> {
    (0..PROBS.len()).prop_map(|i| frac(PROBS[i].0, PROBS[i].1))
}

/// Up to 4 exogenous and 6 endogenous binary variables, parents at most 3.
pub fn scm_blueprint(with_decision: bool) -> impl Strategy<Value = ScmBlueprint> {
    (1usize..=4, 1usize..=6).prop_flat_map(move |(n_exo, n_endo)| {
        let n_dec = usize::from(with_decision);
        let parent_sets: Vec<_> = (0..n_endo)
            .map(|i| {
                let pool = n_exo + n_dec + i;
                proptest::sample::subsequence((0..pool).collect::<Vec<_>>(), 0..=pool.min(3))
            })
            .collect();
        (
            parent_sets,
            proptest::collection::vec(proptest::collection::vec(0usize..2, 8), n_endo),
            proptest::collection::vec(prob(), n_exo),
            proptest::collection::vec(-5i64..=5, n_endo),
        )
            .prop_map(move |(parents, raw, priors, weights)| {
                let tables = parents
                    .iter()
                    .zip(raw)
                    .map(|(ps, t): (&Vec<usize>, Vec<usize>)| t[..1 << ps.len()].to_vec())
                    .collect();
                ScmBlueprint {
                    n_exo,
                    has_decision: with_decision,
                    parents,
                    tables,
                    priors,
                    weights,
                }
            })
    })
}

/// Influence diagram with 1 or 2 binary decisions, chance nodes of domain 2
/// or 3, and 1 or 2 utility nodes, all in topological order.
#[derive(Debug, Clone)]
pub struct IdBlueprint {
    pub nodes: Vec<IdNode>,
}

#[derive(Debug, Clone)]
pub enum IdNode {
    Decision { parents: Vec<usize> },
    Chance { parents: Vec<usize>, size: usize, rows: Vec<Vec<Rational>> },
    Utility { parents: Vec<usize>, values: Vec<Rational> },
}

impl IdNode {
    pub fn parents(&self) -> &[usize] {
        match self {
            IdNode::Decision { parents } | IdNode::Chance { parents, .. } | IdNode::Utility { parents, .. } => parents,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            IdNode::Decision { .. } => 2,
            IdNode::Chance { size, .. } => *size,
            IdNode::Utility { .. } => 1,
        }
    }
}

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

impl IdBlueprint {
    pub fn row(&self, parents: &[usize], values: &[usize]) -> usize {
        parents.iter().fold(0, |acc, &p| acc * self.nodes[p].size() + values[p])
    }

    pub fn diagram(&self) -> InfluenceDiagram {
        let nodes = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let parents: Vec<NodeId> = n.parents().iter().map(|&p| NodeId(p)).collect();
                match n {
                    IdNode::Decision { .. } => Node::decision(&format!("D{i}"), parents, &["0", "1"]),
                    IdNode::Chance { size, rows, .. } => {
                        let l = labels(*size);
                        let l: Vec<&str> = l.iter().map(String::as_str).collect();
                        Node::chance(&format!("C{i}"), parents, &l, rows.clone())
                    }
                    IdNode::Utility { values, .. } => Node::utility(&format!("V{i}"), parents, values.clone()),
                }
            })
            .collect();
        InfluenceDiagram::new(nodes).unwrap()
    }

    pub fn decisions(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| matches!(self.nodes[i], IdNode::Decision { .. })).collect()
    }

    /// Every deterministic policy: per decision, one value per parent row.
    pub fn policies(&self) -> Vec<BTreeMap<usize, Vec<usize>>> {
        let mut out = vec![BTreeMap::new()];
        for d in self.decisions() {
            let rows: usize = self.nodes[d].parents().iter().map(|&p| self.nodes[p].size()).product();
            let mut next = Vec::new();
            for partial in &out {
                for code in 0..(1usize << rows) {
                    let choice: Vec<usize> = (0..rows).map(|r| (code >> (rows - 1 - r)) & 1).collect();
                    let mut p = partial.clone();
                    p.insert(d, choice);
                    next.push(p);
                }
            }
            out = next;
        }
        out
    }

    pub fn policy(&self, id: &InfluenceDiagram, choice: &BTreeMap<usize, Vec<usize>>) -> Policy {
        let choices: Vec<(NodeId, Vec<usize>)> = choice.iter().map(|(&d, v)| (NodeId(d), v.clone())).collect();
        Policy::deterministic(id, &choices).unwrap()
    }

    /// Every full realization of the non-utility nodes with its probability
    /// and total utility, enumerated as a plain product of domains.
    pub fn joint(&self, choice: &BTreeMap<usize, Vec<usize>>) -> Vec<(Vec<usize>, Rational, Rational)> {
        let n = self.nodes.len();
        let sizes: Vec<usize> = self.nodes.iter().map(IdNode::size).collect();
        let total: usize = sizes.iter().product();
        let mut out = Vec::new();
        for code in 0..total {
            let mut values = vec![0; n];
            let mut rest = code;
            for i in (0..n).rev() {
                values[i] = rest % sizes[i];
                rest /= sizes[i];
            }
            let mut p = Rational::one();
            let mut u = Rational::zero();
            for (i, node) in self.nodes.iter().enumerate() {
                let row = self.row(node.parents(), &values);
                match node {
                    IdNode::Decision { .. } => {
                        if choice[&i][row] != values[i] {
                            p = Rational::zero();
                        }
                    }
                    IdNode::Chance { rows, .. } => p *= &rows[row][values[i]],
                    IdNode::Utility { values: table, .. } => u += &table[row],
                }
            }
            out.push((values, p, u));
        }
        out
    }

    pub fn expected_utility(&self, choice: &BTreeMap<usize, Vec<usize>>) -> Rational {
        self.joint(choice).into_iter().map(|(_, p, u)| p * u).sum()
    }

    pub fn probability(&self, choice: &BTreeMap<usize, Vec<usize>>, event: &[(usize, usize)]) -> Rational {
        self.joint(choice)
            .into_iter()
            .filter(|(v, _, _)| event.iter().all(|&(n, x)| v[n] == x))
            .map(|(_, p, _)| p)
            .sum()
    }
}

fn distribution(size: usize) -> impl Strategy<Value = Vec<Rational>> {
    proptest::collection::vec(0i64..4, size).prop_map(|w| {
        let total: i64 = w.iter().sum();
        if total == 0 {
            let mut out = vec![Rational::zero(); w.len()];
            out[0] = Rational::one();
            out
        } else {
            w.iter().map(|&x| frac(x, total)).collect()
        }
    })
}

/// Picks up to `max` earlier non-utility nodes as parents.
fn pick_parents(pool: Vec<usize>, max: usize) -> impl Strategy<Value = Vec<usize>> {
    let len = pool.len();
    proptest::sample::subsequence(pool, 0..=len.min(max))
}

/// At most 8 decision and chance nodes plus 1 or 2 utility nodes; at most 16
/// deterministic policies.
pub fn id_blueprint() -> impl Strategy<Value = IdBlueprint> {
    (1usize..=2, 1usize..=5, 1usize..=2, any::<u64>()).prop_flat_map(|(n_dec, n_chance, n_util, seed)| {
        // Bits of `seed` decide where decisions fall among the chance nodes.
        let mut kinds = Vec::new();
        let mut chance_left = n_chance;
        let mut dec_left = n_dec;
        let mut pos = 0;
        while chance_left + dec_left > 0 {
            let dec_here = dec_left > 0 && (chance_left == 0 || (seed >> pos) & 1 == 1);
            if dec_here {
                kinds.push(true);
                dec_left -= 1;
            } else {
                kinds.push(false);
                chance_left -= 1;
            }
            pos += 1;
        }
        let mut strategies: Vec<BoxedStrategy<IdNode>> = Vec::new();
        for (i, &is_dec) in kinds.iter().enumerate() {
            let pool: Vec<usize> = (0..i).collect();
            if is_dec {
                // Decisions observe at most one earlier chance node.
                let chance_pool: Vec<usize> = (0..i).filter(|&j| !kinds[j]).collect();
                strategies.push(
                    pick_parents(chance_pool, 1)
                        .prop_map(|parents| IdNode::Decision { parents })
                        .boxed(),
                );
            } else {
                strategies.push(
                    (pick_parents(pool, 2), 2usize..=3)
                        .prop_map(|(parents, size)| IdNode::Chance {
                            parents,
                            size,
                            rows: Vec::new(),
                        })
                        .boxed(),
                );
            }
        }
        let n_inner = kinds.len();
        let utilities: Vec<BoxedStrategy<Vec<usize>>> = (0..n_util)
            .map(|_| pick_parents((0..n_inner).collect(), 2).boxed())
            .collect();
        (strategies, utilities)
    })
    .prop_flat_map(|(mut inner, util_parents)| {
        // Fill chance rows and utility tables now that domain sizes are known.
        let sizes: Vec<usize> = inner.iter().map(IdNode::size).collect();
        let mut row_strategies: Vec<BoxedStrategy<Vec<Vec<Rational>>>> = Vec::new();
        for node in &inner {
            match node {
                IdNode::Chance { parents, size, .. } => {
                    let rows: usize = parents.iter().map(|&p| sizes[p]).product();
                    row_strategies.push(proptest::collection::vec(distribution(*size), rows).boxed());
                }
                _ => row_strategies.push(Just(Vec::new()).boxed()),
            }
        }
        let util_strategies: Vec<BoxedStrategy<(Vec<usize>, Vec<Rational>)>> = util_parents
            .into_iter()
            .map(|parents| {
                let rows: usize = parents.iter().map(|&p| sizes[p]).product();
                (Just(parents), proptest::collection::vec((-10i64..=10).prop_map(int), rows)).boxed()
            })
            .collect();
        let shell = std::mem::take(&mut inner);
        (Just(shell), row_strategies, util_strategies).prop_map(|(shell, rows, utils)| {
            let mut nodes: Vec<IdNode> = shell
                .into_iter()
                .zip(rows)
                .map(|(node, r)| match node {
                    IdNode::Chance { parents, size, .. } => IdNode::Chance { parents, size, rows: r },
                    other => other,
                })
                .collect();
            for (parents, values) in utils {
                nodes.push(IdNode::Utility { parents, values });
            }
            IdBlueprint { nodes }
        })
    })
}
