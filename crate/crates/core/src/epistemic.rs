//! Epistemic states: a finite weighted set of causal settings plus a total
//! utility function over worlds.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::{ratio_string, Rational};
use crate::scm::{
    for_each_tuple, row_index, Assignment, CausalModel, Context, Intervention, ScmError, Signature,
    VarId, VarKind, World,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EpistemicError {
    #[error(transparent)]
    Scm(#[from] ScmError),
    #[error("probability for `{var}` must lie in [0, 1], got {value}")]
    ProbabilityOutOfRange { var: String, value: String },
    #[error("`{0}` is not binary; give its full distribution instead")]
    NotBinary(String),
    #[error("distribution for `{var}` has {found} entries, expected {expected}")]
    DistributionLength {
        var: String,
        expected: usize,
        found: usize,
    },
    #[error("distribution for `{var}` sums to {sum}, not 1")]
    DistributionSum { var: String, sum: String },
    #[error("no distribution given for exogenous variable `{0}`")]
    MissingPrior(String),
    #[error("setting weights sum to {0}, not 1")]
    Unnormalized(String),
    #[error("setting {0} has a negative weight")]
    NegativeWeight(usize),
    #[error("setting {0} repeats an earlier setting")]
    DuplicateSetting(usize),
    #[error("setting {0} uses a different signature")]
    SignatureMismatch(usize),
    #[error("an epistemic state needs at least one setting")]
    NoSettings,
    #[error("utility term over {vars} has {found} entries, expected {expected}")]
    UtilityTableSize {
        vars: String,
        expected: usize,
        found: usize,
    },
}

/// A causal model together with a context.
#[derive(Debug, Clone)]
pub struct CausalSetting {
    pub model: Arc<CausalModel>,
    pub context: Context,
}

impl PartialEq for CausalSetting {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.model, &other.model) || self.model == other.model)
            && self.context == other.context
    }
}

impl Eq for CausalSetting {}

impl CausalSetting {
    pub fn new(model: Arc<CausalModel>, context: Context) -> Self {
        Self { model, context }
    }
}

/// One additive piece of a utility function: a local table over `scope`.
/// `None` entries mean the term does not apply to that assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UtilityTerm {
    pub scope: Vec<VarId>,
    pub table: Vec<Option<Rational>>,
}

impl UtilityTerm {
    pub fn from_fn(
        sig: &Signature,
        scope: Vec<VarId>,
        mut f: impl FnMut(&[usize]) -> Option<Rational>,
    ) -> Self {
        let sizes: Vec<usize> = scope.iter().map(|&v| sig.domain_size(v)).collect();
        let mut table = Vec::new();
        for_each_tuple(&sizes, |row| table.push(f(row)));
        Self { scope, table }
    }

    /// `value` whenever every variable in `when` takes the given value.
    pub fn when(sig: &Signature, when: &Assignment, value: Rational) -> Self {
        let scope: Vec<VarId> = when.keys().copied().collect();
        let wanted: Vec<usize> = when.values().copied().collect();
        Self::from_fn(sig, scope, |row| {
            (row == wanted.as_slice()).then(|| value.clone())
        })
    }

    fn lookup(&self, sig: &Signature, world: &World) -> Option<&Rational> {
        let row = row_index(
            self.scope.iter().map(|&v| sig.domain_size(v)),
            self.scope.iter().map(|&v| world.get(v)),
        );
        self.table[row].as_ref()
    }
}

/// Total utility over worlds: the sum of every applicable term, or `default`
/// when no term applies. Totality holds by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UtilityFunction {
    terms: Vec<UtilityTerm>,
    default: Rational,
}

impl UtilityFunction {
    pub fn new(
        sig: &Signature,
        terms: Vec<UtilityTerm>,
        default: Rational,
    ) -> Result<Self, EpistemicError> {
        for term in &terms {
            for &v in &term.scope {
                sig.check_value(v, 0)?;
            }
            let expected = sig.space_size(&term.scope);
            if term.table.len() != expected {
                return Err(EpistemicError::UtilityTableSize {
                    vars: term
                        .scope
                        .iter()
                        .map(|&v| sig.name(v))
                        .collect::<Vec<_>>()
                        .join(","),
                    expected,
                    found: term.table.len(),
                });
            }
        }
        Ok(Self { terms, default })
    }

    pub fn constant(value: Rational) -> Self {
        Self {
            terms: Vec::new(),
            default: value,
        }
    }

    /// A single term over every variable of the signature.
    pub fn extensional(sig: &Signature, f: impl FnMut(&[usize]) -> Rational) -> Self {
        let mut f = f;
        let scope: Vec<VarId> = sig.ids().collect();
        Self {
            terms: vec![UtilityTerm::from_fn(sig, scope, |row| Some(f(row)))],
            default: Rational::zero(),
        }
    }

    pub fn terms(&self) -> &[UtilityTerm] {
        &self.terms
    }

    pub fn default_value(&self) -> &Rational {
        &self.default
    }

    pub fn eval(&self, sig: &Signature, world: &World) -> Rational {
        let mut total = Rational::zero();
        let mut any = false;
        for term in &self.terms {
            if let Some(v) = term.lookup(sig, world) {
                total += v;
                any = true;
            }
        }
        if any {
            total
        } else {
            self.default.clone()
        }
    }
}

/// `(P, K, u)`: weighted settings sharing one signature, and a utility.
#[derive(Debug, Clone)]
pub struct EpistemicState {
    signature: Arc<Signature>,
    settings: Vec<(CausalSetting, Rational)>,
    utility: UtilityFunction,
}

impl EpistemicState {
    pub fn new(
        settings: Vec<(CausalSetting, Rational)>,
        utility: UtilityFunction,
    ) -> Result<Self, EpistemicError> {
        let signature = Arc::clone(
            settings
                .first()
                .ok_or(EpistemicError::NoSettings)?
                .0
                .model
                .signature(),
        );
        let mut total = Rational::zero();
        for (i, (setting, weight)) in settings.iter().enumerate() {
            if **setting.model.signature() != *signature {
                return Err(EpistemicError::SignatureMismatch(i));
            }
            if weight.is_negative() {
                return Err(EpistemicError::NegativeWeight(i));
            }
            if settings[..i].iter().any(|(s, _)| s == setting) {
                return Err(EpistemicError::DuplicateSetting(i));
            }
            total += weight;
        }
        if !total.is_one() {
            return Err(EpistemicError::Unnormalized(ratio_string(&total)));
        }
        Ok(Self {
            signature,
            settings,
            utility,
        })
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.signature
    }

    pub fn settings(&self) -> &[(CausalSetting, Rational)] {
        &self.settings
    }

    pub fn utility(&self) -> &UtilityFunction {
        &self.utility
    }

    pub fn weight_of(&self, setting: &CausalSetting) -> Option<&Rational> {
        self.settings
            .iter()
            .find(|(s, _)| s == setting)
            .map(|(_, w)| w)
    }

    pub fn utility_of(&self, world: &World) -> Rational {
        self.utility.eval(&self.signature, world)
    }

    /// Settings with strictly positive weight.
    pub fn possible(&self) -> impl Iterator<Item = &(CausalSetting, Rational)> {
        self.settings.iter().filter(|(_, w)| w.is_positive())
    }
}

/// Independent per-variable distributions over the exogenous variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExogenousPrior(BTreeMap<VarId, Vec<Rational>>);

impl ExogenousPrior {
    /// Full distribution for `var`, one weight per domain value in domain order.
    pub fn set(
        &mut self,
        sig: &Signature,
        var: VarId,
        weights: Vec<Rational>,
    ) -> Result<(), EpistemicError> {
        sig.check_value(var, 0)?;
        let name = sig.name(var).to_string();
        if sig.var(var).kind != VarKind::Exogenous {
            return Err(ScmError::NotExogenous(name).into());
        }
        if weights.len() != sig.domain_size(var) {
            return Err(EpistemicError::DistributionLength {
                var: name,
                expected: sig.domain_size(var),
                found: weights.len(),
            });
        }
        if let Some(bad) = weights
            .iter()
            .find(|w| w.is_negative() || **w > Rational::one())
        {
            return Err(EpistemicError::ProbabilityOutOfRange {
                var: name,
                value: ratio_string(bad),
            });
        }
        let sum: Rational = weights.iter().sum();
        if !sum.is_one() {
            return Err(EpistemicError::DistributionSum {
                var: name,
                sum: ratio_string(&sum),
            });
        }
        self.0.insert(var, weights);
        Ok(())
    }

    /// Bernoulli prior: `p` is the probability of the second domain value.
    pub fn set_bernoulli(
        &mut self,
        sig: &Signature,
        var: VarId,
        p: Rational,
    ) -> Result<(), EpistemicError> {
        sig.check_value(var, 0)?;
        if sig.domain_size(var) != 2 {
            return Err(EpistemicError::NotBinary(sig.name(var).to_string()));
        }
        if p.is_negative() || p > Rational::one() {
            return Err(EpistemicError::ProbabilityOutOfRange {
                var: sig.name(var).to_string(),
                value: ratio_string(&p),
            });
        }
        self.set(sig, var, vec![Rational::one() - &p, p])
    }

    pub fn get(&self, var: VarId) -> Option<&[Rational]> {
        self.0.get(&var).map(Vec::as_slice)
    }

    /// Every context with its product weight, in lexicographic context order.
    pub fn contexts(&self, sig: &Signature) -> Result<Vec<(Context, Rational)>, EpistemicError> {
        let exo = sig.exogenous();
        for &u in &exo {
            if !self.0.contains_key(&u) {
                return Err(EpistemicError::MissingPrior(sig.name(u).to_string()));
            }
        }
        let sizes: Vec<usize> = exo.iter().map(|&u| sig.domain_size(u)).collect();
        let mut out = Vec::with_capacity(sizes.iter().product());
        for_each_tuple(&sizes, |tuple| {
            let mut weight = Rational::one();
            let mut values = Assignment::new();
            for (&u, &x) in exo.iter().zip(tuple) {
                weight *= &self.0[&u][x];
                values.insert(u, x);
            }
            out.push((Context::new(values), weight));
        });
        Ok(out)
    }
}

/// One setting per context of the product space. Zero-weight settings are kept.
pub fn product_state(
    model: Arc<CausalModel>,
    bernoulli: &BTreeMap<VarId, Rational>,
    utility: UtilityFunction,
) -> Result<EpistemicState, EpistemicError> {
    let mut prior = ExogenousPrior::default();
    for (&var, p) in bernoulli {
        prior.set_bernoulli(model.signature(), var, p.clone())?;
    }
    product_state_with(model, &prior, utility)
}

pub fn product_state_with(
    model: Arc<CausalModel>,
    prior: &ExogenousPrior,
    utility: UtilityFunction,
) -> Result<EpistemicState, EpistemicError> {
    let settings = prior
        .contexts(model.signature())?
        .into_iter()
        .map(|(ctx, w)| (CausalSetting::new(Arc::clone(&model), ctx), w))
        .collect();
    EpistemicState::new(settings, utility)
}

/// `w_{M,u,A<-a,X<-x}`: a setting solved with the action fixed and some
/// variables held at given values.
#[derive(Debug, Clone, Copy)]
pub struct CounterfactualWorldSpec<'a> {
    pub setting: &'a CausalSetting,
    pub action: &'a Assignment,
    pub holds: &'a Intervention,
}

pub fn world_of(spec: CounterfactualWorldSpec<'_>) -> Result<World, ScmError> {
    let sig = spec.setting.model.signature();
    if let Some(&v) = spec
        .holds
        .targets()
        .keys()
        .find(|&&v| sig.get(v).is_some_and(|var| var.kind == VarKind::Decision))
    {
        return Err(ScmError::NotEndogenous(format!(
            "{} (decisions are fixed by the action, not held)",
            sig.name(v)
        )));
    }
    spec.setting
        .model
        .solve_under(&spec.setting.context, spec.action, spec.holds)
}

/// `sum_{(M,u)} P(M,u) * u(w_{M,u,A<-a,X<-x})`, where `holds` gives the
/// frozen variables for each setting.
pub fn expected_utility(
    es: &EpistemicState,
    action: &Assignment,
    mut holds: impl FnMut(&CausalSetting) -> Result<Intervention, ScmError>,
) -> Result<Rational, ScmError> {
    let mut total = Rational::zero();
    for (setting, weight) in es.settings() {
        if weight.is_zero() {
            continue;
        }
        let frozen = holds(setting)?;
        let world = world_of(CounterfactualWorldSpec {
            setting,
            action,
            holds: &frozen,
        })?;
        total += weight * es.utility_of(&world);
    }
    Ok(total)
}
