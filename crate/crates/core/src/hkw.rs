//! Direct and oblique intent over epistemic states of structural causal models.
//!
//! Direct intent follows the counterfactual account: an agent intends to
//! affect a set of variables `O` through action `a` when freezing those
//! variables at the values `a` would give them makes some reference action at
//! least as good as `a` (the *freeze inequality*), minimally so. It intends an
//! outcome `O = o` when it intends to affect `O`, `a` can bring `o` about in a
//! possible setting, and `o` is the best value `O` can take under `a`.
//!
//! Oblique intent needs no utility: a side effect disjoint from the direct
//! target is obliquely intended when it is virtually certain under `a`
//! (clause a) or virtually certain given that the direct target obtains
//! (clause b), with "virtually certain" meaning probability above `C`.
//!
//! The minimality clause of "intends to affect" admits several readings; see
//! [`AffectReading`].

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::epistemic::{CausalSetting, EpistemicState};
use crate::rational::{Confidence, Rational};
use crate::scm::{
    for_each_tuple, Assignment, CausalFormula, Intervention, ScmError, Signature, VarId, VarKind,
    World,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IntentError {
    #[error(transparent)]
    Scm(#[from] ScmError),
    #[error("the setting is not part of the epistemic state")]
    UnknownSetting,
    #[error("a reference set needs at least one alternative")]
    EmptyReference,
    #[error("reference alternative {0} does not assign exactly the action's decision variables")]
    ReferenceMismatch(usize),
    #[error("`{0}` is not an outcome variable (endogenous and not a decision)")]
    NotOutcomeVariable(String),
    #[error("`{0}` appears twice in an outcome")]
    DuplicateOutcomeVariable(String),
    #[error("an outcome needs at least one variable")]
    EmptyOutcome,
    #[error("side effect and direct outcome share variables: {}", .0.join(", "))]
    Overlap(Vec<String>),
    #[error("{count} outcome variables exceed the search limit of {limit}")]
    TooManyVariables { count: usize, limit: usize },
}

/// `REF(a)`: the joint actions `a` is compared against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferenceSet {
    alternatives: Vec<Assignment>,
}

impl ReferenceSet {
    pub fn new(sig: &Signature, alternatives: Vec<Assignment>) -> Result<Self, IntentError> {
        if alternatives.is_empty() {
            return Err(IntentError::EmptyReference);
        }
        for alt in &alternatives {
            for (&var, &value) in alt {
                sig.check_value(var, value)?;
                if sig.var(var).kind != VarKind::Decision {
                    return Err(ScmError::NotDecision(sig.name(var).to_string()).into());
                }
            }
        }
        Ok(Self { alternatives })
    }

    /// Cartesian product of per-decision value lists, in decision then domain order.
    pub fn product(
        sig: &Signature,
        per_decision: &[(VarId, Vec<usize>)],
    ) -> Result<Self, IntentError> {
        let sizes: Vec<usize> = per_decision.iter().map(|(_, vals)| vals.len()).collect();
        let mut alternatives = Vec::new();
        for_each_tuple(&sizes, |tuple| {
            alternatives.push(
                per_decision
                    .iter()
                    .zip(tuple)
                    .map(|((var, vals), &i)| (*var, vals[i]))
                    .collect(),
            );
        });
        Self::new(sig, alternatives)
    }

    /// Every joint choice of `action`'s decision variables other than `action` itself.
    pub fn all_except(sig: &Signature, action: &Assignment) -> Result<Self, IntentError> {
        let vars: Vec<VarId> = action.keys().copied().collect();
        let sizes: Vec<usize> = vars.iter().map(|&v| sig.domain_size(v)).collect();
        let mut alternatives = Vec::new();
        for_each_tuple(&sizes, |tuple| {
            let alt: Assignment = vars.iter().copied().zip(tuple.iter().copied()).collect();
            if &alt != action {
                alternatives.push(alt);
            }
        });
        Self::new(sig, alternatives)
    }

    pub fn alternatives(&self) -> &[Assignment] {
        &self.alternatives
    }

    /// The canonical default action: the first alternative.
    pub fn first(&self) -> &Assignment {
        &self.alternatives[0]
    }

    fn check_against(&self, action: &Assignment) -> Result<(), IntentError> {
        for (i, alt) in self.alternatives.iter().enumerate() {
            if !alt.keys().eq(action.keys()) {
                return Err(IntentError::ReferenceMismatch(i));
            }
        }
        Ok(())
    }
}

/// `O = o` over distinct outcome variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OutcomeSpec {
    pairs: Vec<(VarId, usize)>,
}

impl OutcomeSpec {
    pub fn new(sig: &Signature, pairs: Vec<(VarId, usize)>) -> Result<Self, IntentError> {
        if pairs.is_empty() {
            return Err(IntentError::EmptyOutcome);
        }
        let mut seen = BTreeSet::new();
        for &(var, value) in &pairs {
            sig.check_value(var, value)?;
            check_outcome_variable(sig, var)?;
            if !seen.insert(var) {
                return Err(IntentError::DuplicateOutcomeVariable(
                    sig.name(var).to_string(),
                ));
            }
        }
        Ok(Self { pairs })
    }

    /// Builds from `(name, label)` pairs.
    pub fn parse(sig: &Signature, pairs: &[(&str, &str)]) -> Result<Self, IntentError> {
        let resolved = pairs
            .iter()
            .map(|(n, l)| sig.resolve(n, l))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(sig, resolved)
    }

    pub fn pairs(&self) -> &[(VarId, usize)] {
        &self.pairs
    }

    pub fn variables(&self) -> Vec<VarId> {
        self.pairs.iter().map(|&(v, _)| v).collect()
    }

    pub fn values(&self) -> Vec<usize> {
        self.pairs.iter().map(|&(_, x)| x).collect()
    }

    pub fn holds_in(&self, world: &World) -> bool {
        self.pairs.iter().all(|&(v, x)| world.get(v) == x)
    }

    pub fn as_intervention(&self) -> Intervention {
        Intervention::new(self.pairs.iter().copied().collect())
    }

    pub fn as_formula(&self, sig: &Signature) -> Result<CausalFormula, ScmError> {
        CausalFormula::all_of(sig, &self.pairs.iter().copied().collect())
    }

    /// `I=1` for one variable, `{I1=1, I2=1}` for several.
    pub fn describe(&self, sig: &Signature) -> String {
        let parts: Vec<String> = self
            .pairs
            .iter()
            .map(|&(v, x)| format!("{}={}", sig.name(v), sig.label(v, x)))
            .collect();
        if parts.len() == 1 {
            parts.into_iter().next().unwrap_or_default()
        } else {
            format!("{{{}}}", parts.join(", "))
        }
    }
}

fn check_outcome_variable(sig: &Signature, var: VarId) -> Result<(), IntentError> {
    if sig.get(var).map(|v| v.kind) == Some(VarKind::Endogenous) {
        Ok(())
    } else {
        Err(IntentError::NotOutcomeVariable(
            sig.get(var)
                .map_or_else(|| format!("#{}", var.0), |v| v.name.clone()),
        ))
    }
}

/// How the minimality clause of "intends to affect `O`" is read.
///
/// A set `S` *satisfies the freeze inequality* when
/// `EU(a) <= max_{a' in REF} EU(a' with S frozen at its a-values)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AffectReading {
    /// `O` itself satisfies the inequality and none of its strict subsets does.
    #[default]
    MinimalSet,
    /// `O` is contained in some set that satisfies the inequality while none of
    /// that set's strict subsets does.
    PartOfMinimalSet,
    /// Some `O' ⊇ O` satisfies the inequality and no `T` with `O ⊆ T ⊊ O'` does.
    MinimalAmongSupersets,
}

impl AffectReading {
    pub fn name(self) -> &'static str {
        match self {
            AffectReading::MinimalSet => "minimal-set",
            AffectReading::PartOfMinimalSet => "part-of-minimal-set",
            AffectReading::MinimalAmongSupersets => "minimal-among-supersets",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [
            AffectReading::MinimalSet,
            AffectReading::PartOfMinimalSet,
            AffectReading::MinimalAmongSupersets,
        ]
        .into_iter()
        .find(|r| r.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AffectOptions {
    pub reading: AffectReading,
    /// Upper bound on the number of outcome variables searched over.
    pub max_variables: usize,
}

impl Default for AffectOptions {
    fn default() -> Self {
        Self {
            reading: AffectReading::default(),
            max_variables: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffectResult {
    pub intended: bool,
    /// Minimal witnessing sets, by cardinality then variable order.
    pub witnesses: Vec<Vec<VarId>>,
    /// Left-hand side of the freeze inequality, `EU(a)`.
    pub action_utility: Rational,
}

/// Memoised evaluation of the freeze inequality over subsets of the outcome
/// variables, encoded as bit masks.
struct FreezeSearch<'a> {
    es: &'a EpistemicState,
    reference: &'a ReferenceSet,
    candidates: Vec<VarId>,
    /// Positive-weight settings with their world under `a`.
    solved: Vec<(&'a CausalSetting, &'a Rational, World)>,
    lhs: Rational,
    memo: Vec<Option<bool>>,
}

impl<'a> FreezeSearch<'a> {
    fn new(
        es: &'a EpistemicState,
        action: &Assignment,
        reference: &'a ReferenceSet,
        opts: &AffectOptions,
    ) -> Result<Self, IntentError> {
        reference.check_against(action)?;
        let candidates = es.signature().outcome_variables();
        if candidates.len() > opts.max_variables {
            return Err(IntentError::TooManyVariables {
                count: candidates.len(),
                limit: opts.max_variables,
            });
        }
        let mut solved = Vec::new();
        let mut lhs = Rational::zero();
        for (setting, weight) in es.possible() {
            let world = setting.model.solve(&setting.context, action)?;
            lhs += weight * es.utility_of(&world);
            solved.push((setting, weight, world));
        }
        let memo = vec![None; 1usize << candidates.len()];
        Ok(Self {
            es,
            reference,
            candidates,
            solved,
            lhs,
            memo,
        })
    }

    fn mask_of(&self, vars: &[VarId]) -> Result<usize, IntentError> {
        let sig = self.es.signature();
        let mut mask = 0usize;
        for &v in vars {
            check_outcome_variable(sig, v)?;
            let bit = self
                .candidates
                .iter()
                .position(|&c| c == v)
                .ok_or_else(|| IntentError::NotOutcomeVariable(sig.name(v).to_string()))?;
            mask |= 1 << bit;
        }
        Ok(mask)
    }

    fn vars_of(&self, mask: usize) -> Vec<VarId> {
        self.candidates
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, &v)| v)
            .collect()
    }

    fn satisfies(&mut self, mask: usize) -> Result<bool, IntentError> {
        if let Some(known) = self.memo[mask] {
            return Ok(known);
        }
        let frozen = self.vars_of(mask);
        let mut best: Option<Rational> = None;
        for alt in self.reference.alternatives() {
            let mut total = Rational::zero();
            for (setting, weight, world) in &self.solved {
                let holds = Intervention::new(frozen.iter().map(|&v| (v, world.get(v))).collect());
                let w = setting.model.solve_under(&setting.context, alt, &holds)?;
                total += *weight * self.es.utility_of(&w);
            }
            if best.as_ref().is_none_or(|b| total > *b) {
                best = Some(total);
            }
        }
        let sat = best.is_some_and(|b| self.lhs <= b);
        self.memo[mask] = Some(sat);
        Ok(sat)
    }

    /// Masks `M` with `base ⊆ M ⊆ universe` that satisfy the inequality while no
    /// `T` with `base ⊆ T ⊊ M` does.
    fn minimal_between(&mut self, base: usize, universe: usize) -> Result<Vec<usize>, IntentError> {
        let free = universe & !base;
        let mut below: std::collections::HashMap<usize, bool> = std::collections::HashMap::new();
        let mut minimal = Vec::new();
        // Enumerate subsets of `free` in increasing numeric order so every strict
        // subset is visited first.
        let mut sub = 0usize;
        loop {
            let mask = base | sub;
            let mut any_below = false;
            let mut bits = sub;
            while bits != 0 {
                let bit = bits & bits.wrapping_neg();
                bits &= !bit;
                let smaller = mask & !bit;
                if below[&smaller] || self.satisfies(smaller)? {
                    any_below = true;
                    break;
                }
            }
            below.insert(mask, any_below);
            if !any_below && self.satisfies(mask)? {
                minimal.push(mask);
            }
            if sub == free {
                break;
            }
            sub = (sub.wrapping_sub(free)) & free;
        }
        Ok(minimal)
    }
}

fn sort_witnesses(sets: &mut [Vec<VarId>]) {
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
}

/// Whether the agent intends to affect `target` through `action`, together with
/// the minimal witnessing sets under the chosen [`AffectReading`].
pub fn intends_to_affect(
    es: &EpistemicState,
    action: &Assignment,
    reference: &ReferenceSet,
    target: &[VarId],
    opts: &AffectOptions,
) -> Result<AffectResult, IntentError> {
    let mut search = FreezeSearch::new(es, action, reference, opts)?;
    let target_mask = search.mask_of(target)?;
    let all = (1usize << search.candidates.len()) - 1;
    let masks = match opts.reading {
        AffectReading::MinimalSet => search
            .minimal_between(0, target_mask)?
            .into_iter()
            .filter(|&m| m == target_mask)
            .collect(),
        AffectReading::PartOfMinimalSet => search
            .minimal_between(0, all)?
            .into_iter()
            .filter(|&m| m & target_mask == target_mask)
            .collect(),
        AffectReading::MinimalAmongSupersets => search.minimal_between(target_mask, all)?,
    };
    let mut witnesses: Vec<Vec<VarId>> = masks.iter().map(|&m| search.vars_of(m)).collect();
    sort_witnesses(&mut witnesses);
    Ok(AffectResult {
        intended: !witnesses.is_empty(),
        witnesses,
        action_utility: search.lhs,
    })
}

/// Every minimal set satisfying the freeze inequality (minimal over all strict subsets).
pub fn minimal_affect_sets(
    es: &EpistemicState,
    action: &Assignment,
    reference: &ReferenceSet,
    opts: &AffectOptions,
) -> Result<Vec<Vec<VarId>>, IntentError> {
    let mut search = FreezeSearch::new(es, action, reference, opts)?;
    let all = (1usize << search.candidates.len()) - 1;
    let mut sets: Vec<Vec<VarId>> = search
        .minimal_between(0, all)?
        .into_iter()
        .map(|m| search.vars_of(m))
        .collect();
    sort_witnesses(&mut sets);
    Ok(sets)
}

/// A setting is possible when its weight is strictly positive.
pub fn is_possible(es: &EpistemicState, setting: &CausalSetting) -> Result<bool, IntentError> {
    es.weight_of(setting)
        .map(|w| w.is_positive())
        .ok_or(IntentError::UnknownSetting)
}

/// `(M, u) |= [A <- a](O = o)`.
pub fn is_feasible(
    setting: &CausalSetting,
    action: &Assignment,
    spec: &OutcomeSpec,
) -> Result<bool, ScmError> {
    let world = setting.model.solve(&setting.context, action)?;
    Ok(spec.holds_in(&world))
}

/// The three conditions of direct intent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
pub enum DirectCondition {
    /// (a) the agent intends to affect the outcome variables.
    AffectsVariables,
    /// (b) the action can bring the outcome about in some possible setting.
    CanCause,
    /// (c) no other feasible value of the outcome variables is better.
    BestOutcome,
}

impl DirectCondition {
    pub fn letter(self) -> char {
        match self {
            DirectCondition::AffectsVariables => 'a',
            DirectCondition::CanCause => 'b',
            DirectCondition::BestOutcome => 'c',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ObliqueClause {
    /// Virtually certain under the action.
    A,
    /// Virtually certain given the direct outcome obtains.
    B,
}

impl fmt::Display for ObliqueClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ObliqueClause::A => "a",
            ObliqueClause::B => "b",
        })
    }
}

/// Result of one oblique-intent test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObliqueVerdict {
    pub side: OutcomeSpec,
    pub intended: bool,
    /// The clause that fired, clause a preferred when both do.
    pub clause: Option<ObliqueClause>,
    /// `P(O* = o*)` under the action.
    pub clause_a: Rational,
    /// `P(O* = o* | O = o)` under the action; `None` when the direct outcome has probability 0.
    pub clause_b: Option<Rational>,
}

impl ObliqueVerdict {
    /// Exact value reached by the clause that fired, or by clause a when none did.
    pub fn achieved(&self) -> &Rational {
        match (self.clause, &self.clause_b) {
            (Some(ObliqueClause::B), Some(b)) => b,
            _ => &self.clause_a,
        }
    }

    pub fn fires(&self, clause: ObliqueClause, c: &Confidence) -> bool {
        match clause {
            ObliqueClause::A => self.clause_a > *c.value(),
            ObliqueClause::B => self.clause_b.as_ref().is_some_and(|b| b > c.value()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeUtility {
    pub values: Vec<usize>,
    pub utility: Rational,
}

/// Outcome of the direct-intent test for one `O = o`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntentVerdict {
    pub outcome: OutcomeSpec,
    pub intended_affect_sets: Vec<Vec<VarId>>,
    pub direct: bool,
    /// Every condition that failed, in order.
    pub failed: Vec<DirectCondition>,
    /// Decision values used for the condition (c) worlds, which fix no action.
    pub decision_default: Assignment,
    /// Expected utility with `O` intervened to `o`, then to each other feasible value.
    pub outcome_utilities: Vec<OutcomeUtility>,
    pub oblique: Vec<ObliqueVerdict>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct HkwOptions {
    pub affect: AffectOptions,
}

/// Direct intent of `spec` through `action`.
pub fn hkw_intends(
    es: &EpistemicState,
    action: &Assignment,
    reference: &ReferenceSet,
    spec: &OutcomeSpec,
    opts: &HkwOptions,
) -> Result<IntentVerdict, IntentError> {
    let affect = intends_to_affect(es, action, reference, &spec.variables(), &opts.affect)?;

    let vars = spec.variables();
    let mut can_cause = false;
    let mut feasible: BTreeSet<Vec<usize>> = BTreeSet::new();
    for (setting, _) in es.possible() {
        let world = setting.model.solve(&setting.context, action)?;
        can_cause |= spec.holds_in(&world);
        feasible.insert(world.project(&vars));
    }

    let default = reference.first().clone();
    let intervened_utility = |values: &[usize]| -> Result<Rational, IntentError> {
        let iv = Intervention::new(vars.iter().copied().zip(values.iter().copied()).collect());
        let mut total = Rational::zero();
        for (setting, weight) in es.possible() {
            let w = setting.model.solve_under(&setting.context, &default, &iv)?;
            total += weight * es.utility_of(&w);
        }
        Ok(total)
    };
    let target = spec.values();
    let target_utility = intervened_utility(&target)?;
    let mut outcome_utilities = vec![OutcomeUtility {
        values: target.clone(),
        utility: target_utility.clone(),
    }];
    let mut best = true;
    for other in feasible.iter().filter(|v| **v != target) {
        let utility = intervened_utility(other)?;
        best &= target_utility >= utility;
        outcome_utilities.push(OutcomeUtility {
            values: other.clone(),
            utility,
        });
    }

    let mut failed = Vec::new();
    if !affect.intended {
        failed.push(DirectCondition::AffectsVariables);
    }
    if !can_cause {
        failed.push(DirectCondition::CanCause);
    }
    if !best {
        failed.push(DirectCondition::BestOutcome);
    }
    Ok(IntentVerdict {
        outcome: spec.clone(),
        intended_affect_sets: affect.witnesses,
        direct: failed.is_empty(),
        failed,
        decision_default: default,
        outcome_utilities,
        oblique: Vec::new(),
    })
}

/// Oblique intent of `side` given the direct outcome `direct` and action `action`.
pub fn scm_oblique_intends(
    es: &EpistemicState,
    action: &Assignment,
    direct: &OutcomeSpec,
    side: &OutcomeSpec,
    c: &Confidence,
) -> Result<ObliqueVerdict, IntentError> {
    let sig = es.signature();
    let direct_vars: BTreeSet<VarId> = direct.variables().into_iter().collect();
    let shared: Vec<String> = side
        .variables()
        .into_iter()
        .filter(|v| direct_vars.contains(v))
        .map(|v| sig.name(v).to_string())
        .collect();
    if !shared.is_empty() {
        return Err(IntentError::Overlap(shared));
    }
    let mut side_mass = Rational::zero();
    let mut joint_mass = Rational::zero();
    let mut direct_mass = Rational::zero();
    for (setting, weight) in es.possible() {
        let world = setting.model.solve(&setting.context, action)?;
        let side_holds = side.holds_in(&world);
        let direct_holds = direct.holds_in(&world);
        if side_holds {
            side_mass += weight;
        }
        if direct_holds {
            direct_mass += weight;
            if side_holds {
                joint_mass += weight;
            }
        }
    }
    let clause_b = (!direct_mass.is_zero()).then(|| joint_mass / direct_mass);
    let mut verdict = ObliqueVerdict {
        side: side.clone(),
        intended: false,
        clause: None,
        clause_a: side_mass,
        clause_b,
    };
    verdict.clause = [ObliqueClause::A, ObliqueClause::B]
        .into_iter()
        .find(|&cl| verdict.fires(cl, c));
    verdict.intended = verdict.clause.is_some();
    Ok(verdict)
}

/// Tests every single-variable side effect `X = x` disjoint from `direct` and
/// returns those obliquely intended, in variable then domain order.
pub fn oblique_scan(
    es: &EpistemicState,
    action: &Assignment,
    direct: &OutcomeSpec,
    c: &Confidence,
) -> Result<Vec<ObliqueVerdict>, IntentError> {
    let sig = es.signature();
    let direct_vars: BTreeSet<VarId> = direct.variables().into_iter().collect();
    let mut found = Vec::new();
    for var in sig.outcome_variables() {
        if direct_vars.contains(&var) {
            continue;
        }
        for value in 0..sig.domain_size(var) {
            let side = OutcomeSpec::new(sig, vec![(var, value)])?;
            let verdict = scm_oblique_intends(es, action, direct, &side, c)?;
            if verdict.intended {
                found.push(verdict);
            }
        }
    }
    Ok(found)
}
