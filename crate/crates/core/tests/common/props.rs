//! Property bodies, shared by the proptest suite and the acceptance runner.

use std::collections::{BTreeMap, BTreeSet};

use intent_core::epistemic::{expected_utility, CausalSetting, EpistemicState};
use intent_core::hkw::{
    intends_to_affect, oblique_scan, scm_oblique_intends, AffectOptions, AffectReading, OutcomeSpec, ReferenceSet,
};
use intent_core::influence::{
    id_oblique_intent, optimal_policy, restrict, to_howard_canonical_form, Limits, NodeId,
};
use intent_core::rational::{frac, Confidence, Rational};
use intent_core::scm::{Assignment, Context, Intervention, VarId};
use num_traits::{One, Zero};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use super::{IdBlueprint, IdNode, ScmBlueprint};

type Check = Result<(), TestCaseError>;

pub fn context_of(ctx: &[usize]) -> Context {
    Context::new(ctx.iter().enumerate().map(|(i, &v)| (VarId(i), v)).collect())
}

fn actions(bp: &ScmBlueprint) -> Vec<Assignment> {
    match bp.decision() {
        Some(d) => vec![Assignment::from([(d, 0)]), Assignment::from([(d, 1)])],
        None => vec![Assignment::new()],
    }
}

/// Intervention on the endogenous variables picked by `mask`, values from `values`.
pub fn intervention(bp: &ScmBlueprint, mask: u64, values: u64) -> Intervention {
    Intervention::new(
        (0..bp.n_endo())
            .filter(|i| (mask >> i) & 1 == 1)
            .map(|i| (VarId(bp.endo_id(i)), ((values >> i) & 1) as usize))
            .collect(),
    )
}

pub fn solve_matches_oracle(bp: &ScmBlueprint) -> Check {
    let m = bp.model();
    for (ctx, _) in bp.contexts() {
        for (a, act) in actions(bp).iter().enumerate() {
            let w = m.solve(&context_of(&ctx), act).unwrap();
            let expect = bp.world(&ctx, a, &BTreeMap::new());
            prop_assert_eq!(w.values().to_vec(), expect);
        }
    }
    Ok(())
}

pub fn intervention_fixpoint(bp: &ScmBlueprint, mask: u64, values: u64) -> Check {
    let iv = intervention(bp, mask, values);
    let m = bp.model().intervene(&iv).unwrap();
    for (ctx, _) in bp.contexts() {
        for act in actions(bp) {
            let w = m.solve(&context_of(&ctx), &act).unwrap();
            for (&v, &x) in iv.targets() {
                prop_assert_eq!(w.get(v), x);
            }
        }
    }
    Ok(())
}

pub fn total_intervention_ignores_context(bp: &ScmBlueprint, values: u64) -> Check {
    let iv = intervention(bp, u64::MAX, values);
    let m = bp.model().intervene(&iv).unwrap();
    let endo: Vec<VarId> = (0..bp.n_endo()).map(|i| VarId(bp.endo_id(i))).collect();
    for act in actions(bp) {
        let outputs: BTreeSet<Vec<usize>> = bp
            .contexts()
            .iter()
            .map(|(ctx, _)| m.solve(&context_of(ctx), &act).unwrap().project(&endo))
            .collect();
        prop_assert_eq!(outputs.len(), 1);
    }
    Ok(())
}

pub fn intervention_idempotent(bp: &ScmBlueprint, mask: u64, values: u64) -> Check {
    let iv = intervention(bp, mask, values);
    let once = bp.model().intervene(&iv).unwrap();
    let twice = once.intervene(&iv).unwrap();
    for (ctx, _) in bp.contexts() {
        for act in actions(bp) {
            let c = context_of(&ctx);
            prop_assert_eq!(once.solve(&c, &act).unwrap(), twice.solve(&c, &act).unwrap());
        }
    }
    Ok(())
}

pub fn intervention_composes(bp: &ScmBlueprint, mask: u64, values: u64, split: u64) -> Check {
    let first = intervention(bp, mask & split, values);
    let second = intervention(bp, mask & !split, values);
    let m = bp.model();
    let ab = m.intervene(&first).unwrap().intervene(&second).unwrap();
    let ba = m.intervene(&second).unwrap().intervene(&first).unwrap();
    let merged = first.merged(&second);
    for (ctx, _) in bp.contexts() {
        for act in actions(bp) {
            let c = context_of(&ctx);
            let w = ab.solve(&c, &act).unwrap();
            prop_assert_eq!(&w, &ba.solve(&c, &act).unwrap());
            prop_assert_eq!(&w, &m.solve_under(&c, &act, &merged).unwrap());
        }
    }
    Ok(())
}

fn state_from(settings: Vec<(CausalSetting, Rational)>, es: &EpistemicState) -> EpistemicState {
    EpistemicState::new(settings, es.utility().clone()).unwrap()
}

pub fn expected_utility_is_linear(bp: &ScmBlueprint, split: u64) -> Check {
    let es = bp.state();
    let act = actions(bp).pop().unwrap();
    let none = |_: &CausalSetting| Ok(Intervention::none());
    let total = expected_utility(&es, &act, none).unwrap();
    let oracle: Rational = bp
        .contexts()
        .iter()
        .map(|(ctx, p)| p * bp.utility_of(&bp.world(ctx, usize::from(bp.has_decision), &BTreeMap::new())))
        .sum();
    prop_assert_eq!(&total, &oracle);

    let (left, right): (Vec<_>, Vec<_>) =
        es.settings().iter().cloned().enumerate().partition(|(i, _)| (split >> (i % 64)) & 1 == 1);
    let weight = |part: &[(usize, (CausalSetting, Rational))]| part.iter().map(|(_, (_, w))| w.clone()).sum::<Rational>();
    let (wl, wr) = (weight(&left), weight(&right));
    if !wl.is_zero() && !wr.is_zero() {
        let normalized = |part: Vec<(usize, (CausalSetting, Rational))>, w: &Rational| {
            state_from(part.into_iter().map(|(_, (s, x))| (s, x / w)).collect(), &es)
        };
        let el = expected_utility(&normalized(left, &wl), &act, none).unwrap();
        let er = expected_utility(&normalized(right, &wr), &act, none).unwrap();
        prop_assert_eq!(total, wl * el + wr * er);
    }

    for (setting, _) in es.settings() {
        let single = state_from(vec![(setting.clone(), Rational::one())], &es);
        let world = setting.model.solve(&setting.context, &act).unwrap();
        prop_assert_eq!(expected_utility(&single, &act, none).unwrap(), es.utility_of(&world));
    }
    Ok(())
}

/// Side and direct literals on distinct endogenous variables picked by `pick`.
fn side_and_direct(bp: &ScmBlueprint, pick: u64) -> Option<((usize, usize), (usize, usize))> {
    let n = bp.n_endo();
    if n < 2 {
        return None;
    }
    let s = (pick % n as u64) as usize;
    let d = (s + 1 + ((pick >> 8) % (n as u64 - 1)) as usize) % n;
    Some((
        (bp.endo_id(s), ((pick >> 16) & 1) as usize),
        (bp.endo_id(d), ((pick >> 17) & 1) as usize),
    ))
}

pub fn oblique_clauses_match_oracle(bp: &ScmBlueprint, pick: u64, c: &Confidence) -> Check {
    let Some((side, direct)) = side_and_direct(bp, pick) else { return Ok(()) };
    let es = bp.state();
    let sig = es.signature().clone();
    let a = usize::from(bp.has_decision);
    let act = actions(bp).pop().unwrap();
    let v = scm_oblique_intends(
        &es,
        &act,
        &OutcomeSpec::new(&sig, vec![(VarId(direct.0), direct.1)]).unwrap(),
        &OutcomeSpec::new(&sig, vec![(VarId(side.0), side.1)]).unwrap(),
        c,
    )
    .unwrap();
    prop_assert_eq!(Some(v.clause_a.clone()), bp.conditional(a, &[side], &[]));
    prop_assert_eq!(v.clause_b.clone(), bp.conditional(a, &[side], &[direct]));
    Ok(())
}

pub fn oblique_monotone_in_confidence(bp: &ScmBlueprint, pick: u64, lo: &Confidence, hi: &Confidence) -> Check {
    let Some((side, direct)) = side_and_direct(bp, pick) else { return Ok(()) };
    let es = bp.state();
    let sig = es.signature().clone();
    let act = actions(bp).pop().unwrap();
    let d = OutcomeSpec::new(&sig, vec![(VarId(direct.0), direct.1)]).unwrap();
    let s = OutcomeSpec::new(&sig, vec![(VarId(side.0), side.1)]).unwrap();
    let at_hi = scm_oblique_intends(&es, &act, &d, &s, hi).unwrap();
    let at_lo = scm_oblique_intends(&es, &act, &d, &s, lo).unwrap();
    if let Some(clause) = at_hi.clause {
        prop_assert!(at_lo.intended);
        prop_assert!(at_lo.fires(clause, lo));
    }
    Ok(())
}

pub fn deterministic_bridge(bp: &ScmBlueprint, pick: u64, c: &Confidence) -> Check {
    let Some((side, direct)) = side_and_direct(bp, pick) else { return Ok(()) };
    let a = usize::from(bp.has_decision);
    if bp.conditional(a, &[direct], &[]) != Some(Rational::one()) {
        return Ok(());
    }
    let es = bp.state();
    let sig = es.signature().clone();
    let act = actions(bp).pop().unwrap();
    let v = scm_oblique_intends(
        &es,
        &act,
        &OutcomeSpec::new(&sig, vec![(VarId(direct.0), direct.1)]).unwrap(),
        &OutcomeSpec::new(&sig, vec![(VarId(side.0), side.1)]).unwrap(),
        c,
    )
    .unwrap();
    if v.fires(intent_core::hkw::ObliqueClause::A, c) {
        prop_assert!(v.fires(intent_core::hkw::ObliqueClause::B, c));
        prop_assert_eq!(v.clause_b.as_ref(), Some(&v.clause_a));
    }
    Ok(())
}

pub fn oblique_scan_is_disjoint(bp: &ScmBlueprint, pick: u64, c: &Confidence) -> Check {
    let Some((_, direct)) = side_and_direct(bp, pick) else { return Ok(()) };
    let es = bp.state();
    let sig = es.signature().clone();
    let act = actions(bp).pop().unwrap();
    let d = OutcomeSpec::new(&sig, vec![(VarId(direct.0), direct.1)]).unwrap();
    for v in oblique_scan(&es, &act, &d, c).unwrap() {
        prop_assert!(v.intended);
        prop_assert!(v.side.variables().iter().all(|x| x.0 != direct.0));
    }
    Ok(())
}

fn subsets(universe: &[usize]) -> Vec<Vec<usize>> {
    (0..(1usize << universe.len()))
        .map(|m| (0..universe.len()).filter(|i| (m >> i) & 1 == 1).map(|i| universe[i]).collect())
        .collect()
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.contains(x))
}

/// Witnesses for `target` under `reading`, by exhaustive subset enumeration.
pub fn affect_oracle(bp: &ScmBlueprint, target: &[usize], reading: AffectReading) -> BTreeSet<Vec<usize>> {
    let universe: Vec<usize> = (0..bp.n_endo()).map(|i| bp.endo_id(i)).collect();
    let all = subsets(&universe);
    let sat: BTreeMap<Vec<usize>, bool> = all.iter().map(|s| (s.clone(), bp.satisfies(1, &[0], s))).collect();
    let strict_subsets_fail = |m: &Vec<usize>, floor: &[usize]| {
        all.iter()
            .filter(|t| t.len() < m.len() && is_subset(t, m) && is_subset(floor, t))
            .all(|t| !sat[t])
    };
    let mut out = BTreeSet::new();
    for m in &all {
        if !sat[m] || !is_subset(target, m) {
            continue;
        }
        let keep = match reading {
            AffectReading::MinimalSet => m.len() == target.len() && strict_subsets_fail(m, &[]),
            AffectReading::PartOfMinimalSet => strict_subsets_fail(m, &[]),
            AffectReading::MinimalAmongSupersets => strict_subsets_fail(m, target),
        };
        if keep {
            out.insert(m.clone());
        }
    }
    out
}

pub fn affect_matches_oracle(bp: &ScmBlueprint, pick: u64, reading: AffectReading) -> Check {
    let n = bp.n_endo();
    let first = (pick % n as u64) as usize;
    let mut target = vec![bp.endo_id(first)];
    if (pick >> 8) & 1 == 1 && n > 1 {
        let second = (first + 1 + ((pick >> 9) % (n as u64 - 1)) as usize) % n;
        target.push(bp.endo_id(second));
        target.sort();
    }
    let es = bp.state();
    let sig = es.signature().clone();
    let a = bp.decision().unwrap();
    let reference = ReferenceSet::new(&sig, vec![Assignment::from([(a, 0)])]).unwrap();
    let opts = AffectOptions {
        reading,
        ..AffectOptions::default()
    };
    let target_vars: Vec<VarId> = target.iter().map(|&v| VarId(v)).collect();
    let r = intends_to_affect(&es, &Assignment::from([(a, 1)]), &reference, &target_vars, &opts).unwrap();
    let got: BTreeSet<Vec<usize>> = r.witnesses.iter().map(|w| w.iter().map(|v| v.0).collect()).collect();
    let expect = affect_oracle(bp, &target, reading);
    prop_assert_eq!(&got, &expect);
    prop_assert_eq!(r.intended, !expect.is_empty());
    // Every witness satisfies the inequality and every strict subset holding the target fails.
    for w in &got {
        prop_assert!(bp.satisfies(1, &[0], w));
        for t in subsets(w) {
            if t.len() < w.len() && is_subset(&target, &t) {
                prop_assert!(!bp.satisfies(1, &[0], &t), "{t:?} below witness {w:?}");
            }
        }
    }
    Ok(())
}

pub fn hcf_preserves_utility(bp: &IdBlueprint) -> Check {
    let id = bp.diagram();
    let hcf = to_howard_canonical_form(&id);
    // Response functions multiply quickly; enumerate only canonical forms of modest size.
    prop_assume!(hcf.realization_count() <= 50_000);
    for choice in bp.policies() {
        let pi = bp.policy(&id, &choice);
        let eu = id.expected_utility(&pi).unwrap();
        prop_assert_eq!(&eu, &bp.expected_utility(&choice));
        prop_assert_eq!(&eu, &hcf.expected_utility(&pi).unwrap());
        let before = id.marginals(&pi).unwrap();
        let after = hcf.marginals(&pi).unwrap();
        prop_assert_eq!(&before[..], &after[..before.len()]);
    }
    Ok(())
}

pub fn marginals_match_oracle(bp: &IdBlueprint) -> Check {
    let id = bp.diagram();
    for choice in bp.policies() {
        let pi = bp.policy(&id, &choice);
        let m = id.marginals(&pi).unwrap();
        for (n, node) in bp.nodes.iter().enumerate() {
            if matches!(node, IdNode::Utility { .. }) {
                continue;
            }
            for x in 0..node.size() {
                prop_assert_eq!(&m[n][x], &bp.probability(&choice, &[(n, x)]));
            }
        }
    }
    Ok(())
}

pub fn optimal_policy_dominates(bp: &IdBlueprint) -> Check {
    let id = bp.diagram();
    let (_, best) = optimal_policy(&id, &wide()).unwrap();
    let oracle = bp.policies().iter().map(|c| bp.expected_utility(c)).max().unwrap();
    prop_assert_eq!(best, oracle);
    Ok(())
}

pub fn restriction_excludes_value(bp: &IdBlueprint, pick: u64) -> Check {
    let id = bp.diagram();
    let candidates: Vec<usize> = (0..bp.nodes.len())
        .filter(|&n| !matches!(bp.nodes[n], IdNode::Utility { .. }))
        .collect();
    let node = candidates[(pick % candidates.len() as u64) as usize];
    let forbidden = ((pick >> 8) % bp.nodes[node].size() as u64) as usize;
    let r = restrict(&id, NodeId(node), forbidden).unwrap();
    let (pi, _) = optimal_policy(&r.diagram, &wide()).unwrap();
    let mut seen = false;
    r.diagram
        .for_each_realization(&pi, |values, p| {
            if !p.is_zero() && values[node] == forbidden {
                seen = true;
            }
        })
        .unwrap();
    prop_assert!(!seen);
    Ok(())
}

/// Clause values of ID oblique intent against joint enumeration; `given`
/// nodes are conditioned on the values picked from `pick`.
pub fn id_oblique_matches_oracle(bp: &IdBlueprint, pick: u64, c: &Confidence) -> Check {
    let id = bp.diagram();
    let chance: Vec<usize> = (0..bp.nodes.len())
        .filter(|&n| matches!(bp.nodes[n], IdNode::Chance { .. }))
        .collect();
    let node = chance[(pick % chance.len() as u64) as usize];
    let value = ((pick >> 8) % bp.nodes[node].size() as u64) as usize;
    let intended: Vec<(NodeId, usize)> = (0..bp.nodes.len())
        .filter(|&n| n != node && !matches!(bp.nodes[n], IdNode::Utility { .. }) && (pick >> (16 + n)) & 1 == 1)
        .map(|n| (NodeId(n), ((pick >> (32 + n)) % bp.nodes[n].size() as u64) as usize))
        .collect();
    let choice = bp.policies().swap_remove(((pick >> 48) % bp.policies().len() as u64) as usize);
    let pi = bp.policy(&id, &choice);
    let v = id_oblique_intent(&id, &pi, NodeId(node), value, c, &intended).unwrap();
    prop_assert_eq!(&v.marginal, &bp.probability(&choice, &[(node, value)]));
    for (cond, &(z, zv)) in v.conditionals.iter().zip(&intended) {
        let pz = bp.probability(&choice, &[(z.0, zv)]);
        let expect = (!pz.is_zero()).then(|| bp.probability(&choice, &[(node, value), (z.0, zv)]) / pz);
        prop_assert_eq!(&cond.probability, &expect);
    }
    Ok(())
}

pub fn id_oblique_monotone(bp: &IdBlueprint, pick: u64, lo: &Confidence, hi: &Confidence) -> Check {
    let id = bp.diagram();
    let chance: Vec<usize> = (0..bp.nodes.len())
        .filter(|&n| matches!(bp.nodes[n], IdNode::Chance { .. }))
        .collect();
    let node = chance[(pick % chance.len() as u64) as usize];
    let value = ((pick >> 8) % bp.nodes[node].size() as u64) as usize;
    let intended: Vec<(NodeId, usize)> = bp
        .decisions()
        .into_iter()
        .map(|d| (NodeId(d), ((pick >> (16 + d)) & 1) as usize))
        .collect();
    let (pi, _) = optimal_policy(&id, &wide()).unwrap();
    let at_hi = id_oblique_intent(&id, &pi, NodeId(node), value, hi, &intended).unwrap();
    let at_lo = id_oblique_intent(&id, &pi, NodeId(node), value, lo, &intended).unwrap();
    if at_hi.intended {
        prop_assert!(at_lo.intended);
        match at_hi.clause {
            Some(intent_core::hkw::ObliqueClause::A) => prop_assert!(at_lo.marginal > *lo.value()),
            _ => prop_assert!(at_lo.conditionals.iter().any(|c| c.probability.as_ref().is_some_and(|p| p > lo.value()))),
        }
    }
    Ok(())
}

/// Limits wide enough for any generated diagram.
pub fn wide() -> Limits {
    Limits {
        max_policies: 1 << 20,
        max_realizations: 1 << 24,
    }
}

/// Two confidences `lo < hi`, both strictly inside (0, 1).
pub fn confidence_pair() -> impl Strategy<Value = (Confidence, Confidence)> {
    (1i64..20, 1i64..20).prop_filter_map("distinct", |(a, b)| {
        (a != b).then(|| {
            let (lo, hi) = (a.min(b), a.max(b));
            (Confidence::new(frac(lo, 20)).unwrap(), Confidence::new(frac(hi, 20)).unwrap())
        })
    })
}

pub fn confidence() -> impl Strategy<Value = Confidence> {
    (1i64..20).prop_map(|a| Confidence::new(frac(a, 20)).unwrap())
}
