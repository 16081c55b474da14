//! Finite discrete structural causal models.
//!
//! A [`Signature`] fixes the variables and their ordered finite domains. A
//! [`CausalModel`] adds one extensional [`StructuralEquation`] per endogenous
//! variable; decision variables carry no equation and are supplied on every
//! solve. Values are stored as indices into the owning variable's domain, so
//! all enumeration follows domain order.
//!
//! Interventions (`do(X = x)`) replace the targeted equations with constants.
//! [`CausalModel::intervene`] builds the intervened model explicitly, while
//! [`CausalModel::solve_under`] evaluates the same thing without rebuilding.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Index of a variable inside its [`Signature`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

/// Partial assignment of variables to value indices.
pub type Assignment = BTreeMap<VarId, usize>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    Exogenous,
    Endogenous,
    /// Endogenous variable whose value is chosen by the agent.
    Decision,
}

impl VarKind {
    pub fn is_endogenous(self) -> bool {
        !matches!(self, VarKind::Exogenous)
    }

    pub fn keyword(self) -> &'static str {
        match self {
            VarKind::Exogenous => "exogenous",
            VarKind::Endogenous => "endogenous",
            VarKind::Decision => "decision",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub domain: Vec<String>,
}

impl Variable {
    pub fn new(name: &str, kind: VarKind, domain: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            kind,
            domain: domain.iter().map(|v| v.to_string()).collect(),
        }
    }

    /// Binary variable with domain `[0, 1]`.
    pub fn binary(name: &str, kind: VarKind) -> Self {
        Self::new(name, kind, &["0", "1"])
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScmError {
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("variable `{0}` has an empty domain")]
    EmptyDomain(String),
    #[error("variable `{var}` lists value `{value}` twice")]
    DuplicateValue { var: String, value: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("`{value}` is not in the domain of `{var}`")]
    UnknownValue { var: String, value: String },
    #[error("value index {index} is outside the domain of `{var}`")]
    ValueOutOfDomain { var: String, index: usize },
    #[error("cannot intervene on exogenous variable `{0}`; supply a different context instead")]
    ExogenousIntervention(String),
    #[error("`{0}` is not an exogenous variable")]
    NotExogenous(String),
    #[error("`{0}` is not a decision variable")]
    NotDecision(String),
    #[error("`{0}` is not an endogenous variable")]
    NotEndogenous(String),
    #[error("context is missing exogenous variables: {}", .0.join(", "))]
    MissingContext(Vec<String>),
    #[error("no value chosen for decision variables: {}", .0.join(", "))]
    MissingAction(Vec<String>),
    #[error("model is invalid: {}", join_diagnostics(.0))]
    InvalidModel(Vec<ModelDiagnostic>),
}

fn join_diagnostics(diags: &[ModelDiagnostic]) -> String {
    diags
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// The variables of a model: names, kinds and ordered finite domains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    vars: Vec<Variable>,
    by_name: HashMap<String, VarId>,
}

impl Signature {
    pub fn new(vars: Vec<Variable>) -> Result<Self, ScmError> {
        let mut by_name = HashMap::with_capacity(vars.len());
        for (i, var) in vars.iter().enumerate() {
            if var.domain.is_empty() {
                return Err(ScmError::EmptyDomain(var.name.clone()));
            }
            let mut seen = BTreeSet::new();
            for value in &var.domain {
                if !seen.insert(value) {
                    return Err(ScmError::DuplicateValue {
                        var: var.name.clone(),
                        value: value.clone(),
                    });
                }
            }
            if by_name.insert(var.name.clone(), VarId(i)).is_some() {
                return Err(ScmError::DuplicateVariable(var.name.clone()));
            }
        }
        Ok(Self { vars, by_name })
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.vars[id.0]
    }

    pub fn get(&self, id: VarId) -> Option<&Variable> {
        self.vars.get(id.0)
    }

    pub fn name(&self, id: VarId) -> &str {
        &self.vars[id.0].name
    }

    pub fn domain_size(&self, id: VarId) -> usize {
        self.vars[id.0].domain.len()
    }

    pub fn label(&self, id: VarId, value: usize) -> &str {
        &self.vars[id.0].domain[value]
    }

    pub fn lookup(&self, name: &str) -> Option<VarId> {
        self.by_name.get(name).copied()
    }

    pub fn ids(&self) -> impl Iterator<Item = VarId> + '_ {
        (0..self.vars.len()).map(VarId)
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn exogenous(&self) -> Vec<VarId> {
        self.of_kind(|k| k == VarKind::Exogenous)
    }

    /// Endogenous variables, decisions included.
    pub fn endogenous(&self) -> Vec<VarId> {
        self.of_kind(VarKind::is_endogenous)
    }

    pub fn decisions(&self) -> Vec<VarId> {
        self.of_kind(|k| k == VarKind::Decision)
    }

    /// Endogenous variables that are not decisions; the candidates for outcomes.
    pub fn outcome_variables(&self) -> Vec<VarId> {
        self.of_kind(|k| k == VarKind::Endogenous)
    }

    fn of_kind(&self, pred: impl Fn(VarKind) -> bool) -> Vec<VarId> {
        self.ids().filter(|&id| pred(self.var(id).kind)).collect()
    }

    pub fn value_index(&self, id: VarId, label: &str) -> Option<usize> {
        self.vars[id.0].domain.iter().position(|v| v == label)
    }

    /// Resolves a `name = label` pair.
    pub fn resolve(&self, name: &str, label: &str) -> Result<(VarId, usize), ScmError> {
        let id = self
            .lookup(name)
            .ok_or_else(|| ScmError::UnknownVariable(name.to_string()))?;
        let value = self
            .value_index(id, label)
            .ok_or_else(|| ScmError::UnknownValue {
                var: name.to_string(),
                value: label.to_string(),
            })?;
        Ok((id, value))
    }

    pub fn check_value(&self, id: VarId, value: usize) -> Result<(), ScmError> {
        let var = self
            .get(id)
            .ok_or_else(|| ScmError::UnknownVariable(format!("#{}", id.0)))?;
        if value < var.domain.len() {
            Ok(())
        } else {
            Err(ScmError::ValueOutOfDomain {
                var: var.name.clone(),
                index: value,
            })
        }
    }

    /// Formats an assignment as `A=1, B=0` in variable order.
    pub fn describe(&self, assignment: &Assignment) -> String {
        assignment
            .iter()
            .map(|(&id, &v)| format!("{}={}", self.name(id), self.label(id, v)))
            .collect::<Vec<_>>()
            .join(", ")
    }

    /// Number of joint assignments of `vars`, saturating on overflow.
    pub fn space_size(&self, vars: &[VarId]) -> usize {
        vars.iter()
            .fold(1usize, |acc, &v| acc.saturating_mul(self.domain_size(v)))
    }
}

/// Enumerates every joint assignment of `sizes` in lexicographic order, first
/// position most significant.
pub(crate) fn for_each_tuple(sizes: &[usize], mut f: impl FnMut(&[usize])) {
    if sizes.iter().any(|&s| s == 0) {
        return;
    }
    let mut tuple = vec![0usize; sizes.len()];
    loop {
        f(&tuple);
        let mut pos = sizes.len();
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            tuple[pos] += 1;
            if tuple[pos] < sizes[pos] {
                break;
            }
            tuple[pos] = 0;
        }
    }
}

/// Mixed-radix row index of `values` (first entry most significant).
pub(crate) fn row_index(
    sizes: impl Iterator<Item = usize>,
    values: impl Iterator<Item = usize>,
) -> usize {
    sizes.zip(values).fold(0, |acc, (size, v)| acc * size + v)
}

/// `target := table[parents]`, stored extensionally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuralEquation {
    pub target: VarId,
    pub parents: Vec<VarId>,
    /// One entry per joint parent assignment, first parent most significant.
    pub table: Vec<usize>,
}

impl StructuralEquation {
    pub fn constant(target: VarId, value: usize) -> Self {
        Self {
            target,
            parents: Vec::new(),
            table: vec![value],
        }
    }

    /// Tabulates `f` over every joint value of `parents`.
    pub fn from_fn(
        sig: &Signature,
        target: VarId,
        parents: Vec<VarId>,
        mut f: impl FnMut(&[usize]) -> usize,
    ) -> Self {
        let sizes: Vec<usize> = parents.iter().map(|&p| sig.domain_size(p)).collect();
        let mut table = Vec::with_capacity(sizes.iter().product());
        for_each_tuple(&sizes, |row| table.push(f(row)));
        Self {
            target,
            parents,
            table,
        }
    }

    fn eval(&self, sig: &Signature, values: &[usize]) -> usize {
        let row = row_index(
            self.parents.iter().map(|&p| sig.domain_size(p)),
            self.parents.iter().map(|&p| values[p.0]),
        );
        self.table[row]
    }
}

/// A problem found by [`validate_model`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelDiagnostic {
    Cycle {
        variables: Vec<String>,
    },
    MissingEquation {
        variable: String,
    },
    DuplicateEquation {
        variable: String,
    },
    ExogenousEquation {
        variable: String,
    },
    UnknownVariable {
        equation: String,
        index: usize,
    },
    TableSize {
        variable: String,
        expected: usize,
        found: usize,
    },
    OutOfDomain {
        variable: String,
        row: usize,
        value: usize,
    },
}

impl fmt::Display for ModelDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelDiagnostic::Cycle { variables } => {
                write!(f, "cyclic dependency among {{{}}}", variables.join(", "))
            }
            ModelDiagnostic::MissingEquation { variable } => {
                write!(f, "endogenous variable `{variable}` has no equation")
            }
            ModelDiagnostic::DuplicateEquation { variable } => {
                write!(f, "variable `{variable}` has more than one equation")
            }
            ModelDiagnostic::ExogenousEquation { variable } => {
                write!(f, "exogenous variable `{variable}` cannot have an equation")
            }
            ModelDiagnostic::UnknownVariable { equation, index } => {
                write!(
                    f,
                    "equation `{equation}` refers to unknown variable #{index}"
                )
            }
            ModelDiagnostic::TableSize {
                variable,
                expected,
                found,
            } => write!(
                f,
                "table for `{variable}` has {found} rows, expected {expected}"
            ),
            ModelDiagnostic::OutOfDomain {
                variable,
                row,
                value,
            } => write!(
                f,
                "table for `{variable}` row {row} yields value index {value} outside its domain"
            ),
        }
    }
}

/// A signature together with its structural equations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalModel {
    signature: Arc<Signature>,
    equations: Vec<Option<StructuralEquation>>,
    order: Vec<VarId>,
    diagnostics: Vec<ModelDiagnostic>,
}

impl CausalModel {
    /// Builds a model. Construction never fails; problems are recorded and
    /// reported by [`validate_model`], and an invalid model refuses to solve.
    pub fn new(signature: Arc<Signature>, equations: Vec<StructuralEquation>) -> Self {
        let mut diagnostics = Vec::new();
        let mut slots: Vec<Option<StructuralEquation>> = vec![None; signature.len()];
        for eq in equations {
            let Some(target) = signature.get(eq.target) else {
                diagnostics.push(ModelDiagnostic::UnknownVariable {
                    equation: format!("#{}", eq.target.0),
                    index: eq.target.0,
                });
                continue;
            };
            if target.kind == VarKind::Exogenous {
                diagnostics.push(ModelDiagnostic::ExogenousEquation {
                    variable: target.name.clone(),
                });
                continue;
            }
            if slots[eq.target.0].is_some() {
                diagnostics.push(ModelDiagnostic::DuplicateEquation {
                    variable: target.name.clone(),
                });
                continue;
            }
            if let Some(bad) = eq.parents.iter().find(|p| p.0 >= signature.len()) {
                diagnostics.push(ModelDiagnostic::UnknownVariable {
                    equation: target.name.clone(),
                    index: bad.0,
                });
                continue;
            }
            let expected = signature.space_size(&eq.parents);
            if eq.table.len() != expected {
                diagnostics.push(ModelDiagnostic::TableSize {
                    variable: target.name.clone(),
                    expected,
                    found: eq.table.len(),
                });
                continue;
            }
            if let Some((row, &value)) = eq
                .table
                .iter()
                .enumerate()
                .find(|(_, &v)| v >= target.domain.len())
            {
                diagnostics.push(ModelDiagnostic::OutOfDomain {
                    variable: target.name.clone(),
                    row,
                    value,
                });
                continue;
            }
            let idx = eq.target.0;
            slots[idx] = Some(eq);
        }
        for id in signature.outcome_variables() {
            if slots[id.0].is_none() && !diagnostics.iter().any(|d| mentions(d, signature.name(id)))
            {
                diagnostics.push(ModelDiagnostic::MissingEquation {
                    variable: signature.name(id).to_string(),
                });
            }
        }
        let (order, cycles) = topological_order(&signature, &slots);
        diagnostics.extend(cycles);
        Self {
            signature,
            equations: slots,
            order,
            diagnostics,
        }
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.signature
    }

    pub fn equation(&self, id: VarId) -> Option<&StructuralEquation> {
        self.equations.get(id.0).and_then(Option::as_ref)
    }

    pub fn equations(&self) -> impl Iterator<Item = &StructuralEquation> {
        self.equations.iter().flatten()
    }

    /// Decision variables not fixed by an equation; these must be chosen on every solve.
    pub fn actions(&self) -> Vec<VarId> {
        self.signature
            .decisions()
            .into_iter()
            .filter(|id| self.equations[id.0].is_none())
            .collect()
    }

    /// Parents of `id` under this model's equations.
    pub fn parents(&self, id: VarId) -> &[VarId] {
        self.equation(id).map_or(&[], |eq| eq.parents.as_slice())
    }

    /// Evaluation order; empty when the model is cyclic.
    pub fn order(&self) -> &[VarId] {
        &self.order
    }

    pub fn is_valid(&self) -> bool {
        self.diagnostics.is_empty()
    }

    /// Returns `M_{X <- x}`: every targeted equation becomes a constant.
    pub fn intervene(&self, iv: &Intervention) -> Result<CausalModel, ScmError> {
        iv.check(&self.signature)?;
        if iv.is_empty() {
            return Ok(self.clone());
        }
        let mut equations: Vec<StructuralEquation> = self.equations().cloned().collect();
        equations.retain(|eq| !iv.0.contains_key(&eq.target));
        equations.extend(
            iv.0.iter()
                .map(|(&target, &value)| StructuralEquation::constant(target, value)),
        );
        equations.sort_by_key(|eq| eq.target);
        Ok(CausalModel::new(Arc::clone(&self.signature), equations))
    }

    /// Solves the model under `ctx` with the decision variables fixed by `actions`.
    pub fn solve(&self, ctx: &Context, actions: &Assignment) -> Result<World, ScmError> {
        self.evaluate(ctx, actions, &Intervention::none())
    }

    /// Equivalent to `self.intervene(iv)?.solve(ctx, actions)` without rebuilding the model.
    pub fn solve_under(
        &self,
        ctx: &Context,
        actions: &Assignment,
        iv: &Intervention,
    ) -> Result<World, ScmError> {
        iv.check(&self.signature)?;
        self.evaluate(ctx, actions, iv)
    }

    fn evaluate(
        &self,
        ctx: &Context,
        actions: &Assignment,
        iv: &Intervention,
    ) -> Result<World, ScmError> {
        if !self.diagnostics.is_empty() {
            return Err(ScmError::InvalidModel(self.diagnostics.clone()));
        }
        let sig = &*self.signature;
        ctx.check(sig)?;
        for (&id, &value) in actions {
            sig.check_value(id, value)?;
            if sig.var(id).kind != VarKind::Decision {
                return Err(ScmError::NotDecision(sig.name(id).to_string()));
            }
        }
        let missing: Vec<String> = self
            .actions()
            .into_iter()
            .filter(|id| !actions.contains_key(id) && !iv.0.contains_key(id))
            .map(|id| sig.name(id).to_string())
            .collect();
        if !missing.is_empty() {
            return Err(ScmError::MissingAction(missing));
        }

        let mut values = vec![0usize; sig.len()];
        for &id in &self.order {
            values[id.0] = if let Some(&fixed) = iv.0.get(&id) {
                fixed
            } else {
                match sig.var(id).kind {
                    VarKind::Exogenous => ctx.0[&id],
                    _ => match &self.equations[id.0] {
                        Some(eq) => eq.eval(sig, &values),
                        None => actions[&id],
                    },
                }
            };
        }
        Ok(World { values })
    }
}

fn mentions(diag: &ModelDiagnostic, name: &str) -> bool {
    match diag {
        ModelDiagnostic::DuplicateEquation { variable }
        | ModelDiagnostic::TableSize { variable, .. }
        | ModelDiagnostic::OutOfDomain { variable, .. } => variable == name,
        ModelDiagnostic::UnknownVariable { equation, .. } => equation == name,
        _ => false,
    }
}

/// Kahn's algorithm with ties broken by variable order. Variables left over
/// are grouped into strongly connected components to name each cycle.
fn topological_order(
    sig: &Signature,
    slots: &[Option<StructuralEquation>],
) -> (Vec<VarId>, Vec<ModelDiagnostic>) {
    let n = sig.len();
    let parents =
        |i: usize| -> &[VarId] { slots[i].as_ref().map_or(&[], |e| e.parents.as_slice()) };
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut indegree = vec![0usize; n];
    for i in 0..n {
        for p in parents(i) {
            children[p.0].push(i);
            indegree[i] += 1;
        }
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = ready.pop_first() {
        order.push(VarId(i));
        for &c in &children[i] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.insert(c);
            }
        }
    }
    if order.len() == n {
        return (order, Vec::new());
    }

    let stuck: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] > 0).collect();
    let reach = |start: usize| -> BTreeSet<usize> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<usize> = parents(start).iter().map(|p| p.0).collect();
        while let Some(v) = stack.pop() {
            if stuck.contains(&v) && seen.insert(v) {
                stack.extend(parents(v).iter().map(|p| p.0));
            }
        }
        seen
    };
    let reaches: BTreeMap<usize, BTreeSet<usize>> = stuck.iter().map(|&i| (i, reach(i))).collect();
    let mut assigned = BTreeSet::new();
    let mut cycles = Vec::new();
    for &i in &stuck {
        if assigned.contains(&i) || !reaches[&i].contains(&i) {
            continue;
        }
        let component: Vec<usize> = stuck
            .iter()
            .copied()
            .filter(|&j| reaches[&i].contains(&j) && reaches[&j].contains(&i))
            .collect();
        assigned.extend(component.iter().copied());
        cycles.push(ModelDiagnostic::Cycle {
            variables: component
                .iter()
                .map(|&j| sig.name(VarId(j)).to_string())
                .collect(),
        });
    }
    (Vec::new(), cycles)
}

/// Every violated model invariant; empty iff the model is valid.
pub fn validate_model(model: &CausalModel) -> Vec<ModelDiagnostic> {
    model.diagnostics.clone()
}

/// `X <- x` over endogenous variables.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Intervention(Assignment);

impl Intervention {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn new(targets: Assignment) -> Self {
        Self(targets)
    }

    pub fn single(var: VarId, value: usize) -> Self {
        Self(BTreeMap::from([(var, value)]))
    }

    pub fn targets(&self) -> &Assignment {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Combines two interventions; entries of `other` win on overlap.
    pub fn merged(&self, other: &Intervention) -> Intervention {
        let mut targets = self.0.clone();
        targets.extend(other.0.iter().map(|(&k, &v)| (k, v)));
        Intervention(targets)
    }

    fn check(&self, sig: &Signature) -> Result<(), ScmError> {
        for (&id, &value) in &self.0 {
            sig.check_value(id, value)?;
            if sig.var(id).kind == VarKind::Exogenous {
                return Err(ScmError::ExogenousIntervention(sig.name(id).to_string()));
            }
        }
        Ok(())
    }
}

/// Total assignment of the exogenous variables.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Context(Assignment);

impl Context {
    pub fn new(values: Assignment) -> Self {
        Self(values)
    }

    /// Builds a context from `(name, label)` pairs.
    pub fn from_labels(sig: &Signature, pairs: &[(&str, &str)]) -> Result<Self, ScmError> {
        let mut values = Assignment::new();
        for (name, label) in pairs {
            let (id, v) = sig.resolve(name, label)?;
            if sig.var(id).kind != VarKind::Exogenous {
                return Err(ScmError::NotExogenous(name.to_string()));
            }
            values.insert(id, v);
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &Assignment {
        &self.0
    }

    pub fn get(&self, id: VarId) -> Option<usize> {
        self.0.get(&id).copied()
    }

    fn check(&self, sig: &Signature) -> Result<(), ScmError> {
        for (&id, &value) in &self.0 {
            sig.check_value(id, value)?;
            if sig.var(id).kind != VarKind::Exogenous {
                return Err(ScmError::NotExogenous(sig.name(id).to_string()));
            }
        }
        let missing: Vec<String> = sig
            .exogenous()
            .into_iter()
            .filter(|id| !self.0.contains_key(id))
            .map(|id| sig.name(id).to_string())
            .collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(ScmError::MissingContext(missing))
        }
    }
}

/// A total assignment of every variable, as produced by solving a setting.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct World {
    values: Vec<usize>,
}

impl World {
    pub fn get(&self, id: VarId) -> usize {
        self.values[id.0]
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    /// Restriction of the world to `vars`.
    pub fn project(&self, vars: &[VarId]) -> Vec<usize> {
        vars.iter().map(|&v| self.values[v.0]).collect()
    }

    /// `X=x` pairs for the given variables, space separated.
    pub fn describe(&self, sig: &Signature, vars: &[VarId]) -> String {
        vars.iter()
            .map(|&v| format!("{}={}", sig.name(v), sig.label(v, self.values[v.0])))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Literal {
    pub var: VarId,
    pub value: usize,
    pub negated: bool,
}

/// Conjunction of (possibly negated) assignments over endogenous variables.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct CausalFormula {
    literals: Vec<Literal>,
}

impl CausalFormula {
    pub fn new(sig: &Signature, literals: Vec<Literal>) -> Result<Self, ScmError> {
        for lit in &literals {
            sig.check_value(lit.var, lit.value)?;
            if !sig.var(lit.var).kind.is_endogenous() {
                return Err(ScmError::NotEndogenous(sig.name(lit.var).to_string()));
            }
        }
        Ok(Self { literals })
    }

    /// Conjunction of positive literals `X = x`.
    pub fn all_of(sig: &Signature, assignment: &Assignment) -> Result<Self, ScmError> {
        Self::new(
            sig,
            assignment
                .iter()
                .map(|(&var, &value)| Literal {
                    var,
                    value,
                    negated: false,
                })
                .collect(),
        )
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn holds_in(&self, world: &World) -> bool {
        self.literals
            .iter()
            .all(|lit| (world.get(lit.var) == lit.value) != lit.negated)
    }
}

/// `(M, u) |= [X <- x] phi` with the decisions fixed by `actions`.
pub fn satisfies(
    model: &CausalModel,
    ctx: &Context,
    actions: &Assignment,
    iv: &Intervention,
    phi: &CausalFormula,
) -> Result<bool, ScmError> {
    let world = model.intervene(iv)?.solve(ctx, actions)?;
    Ok(phi.holds_in(&world))
}
