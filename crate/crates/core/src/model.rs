//! Instances, inspection schemes, and the agent/principal utilities.
//!
//! An action `j` has cost `c(j)` and success probability `f(j)`; success is
//! worth 1 to the principal. Under a scheme `(i, α, p)` the agent is paid `α`
//! on success unless the inspected set meets `{i, j}` when they deviate to
//! `j != i`. Actions are addressed by their index in [`Instance::actions`].

use std::collections::HashMap;
use std::sync::Arc;

use crate::costfn::{CostHandle, SetFunction};
use crate::error::{Error, Result};
use crate::subset::{Subset, MAX_ACTIONS};

/// Default tolerance for utility comparisons.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Tolerance on the total mass of a scheme's distribution.
pub const SCHEME_MASS_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Action {
    pub id: String,
    /// Cost to the agent, in units of the success reward.
    pub cost: f64,
    /// Success probability.
    pub prob: f64,
}

impl Action {
    pub fn new(id: impl Into<String>, cost: f64, prob: f64) -> Self {
        Action { id: id.into(), cost, prob }
    }
}

/// Actions, a designated zero-cost null action, and an inspection cost function.
#[derive(Clone)]
pub struct Instance {
    actions: Vec<Action>,
    null: usize,
    cost_fn: CostHandle,
    index: HashMap<String, usize>,
}

impl std::fmt::Debug for Instance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Instance")
            .field("actions", &self.actions)
            .field("null", &self.null)
            .finish_non_exhaustive()
    }
}

impl Instance {
    pub fn new(actions: Vec<Action>, null_id: &str, cost_fn: CostHandle) -> Result<Self> {
        let n = actions.len();
        if n == 0 {
            return Err(Error::validation("an instance needs at least one action"));
        }
        if n > MAX_ACTIONS {
            return Err(Error::validation(format!("at most {MAX_ACTIONS} actions are supported, got {n}")));
        }
        let mut index = HashMap::with_capacity(n);
        for (j, a) in actions.iter().enumerate() {
            if index.insert(a.id.clone(), j).is_some() {
                return Err(Error::validation(format!("duplicate action id {:?}", a.id)));
            }
            if !(a.cost.is_finite() && a.cost >= 0.0) {
                return Err(Error::validation(format!("action {:?} has invalid cost {}", a.id, a.cost)));
            }
            if !(a.prob.is_finite() && (0.0..=1.0).contains(&a.prob)) {
                return Err(Error::validation(format!(
                    "action {:?} has success probability {} outside [0, 1]",
                    a.id, a.prob
                )));
            }
        }
        let null = *index
            .get(null_id)
            .ok_or_else(|| Error::validation(format!("null action {null_id:?} is missing")))?;
        if actions[null].cost != 0.0 {
            return Err(Error::validation(format!(
                "null action {null_id:?} must have zero cost, got {}",
                actions[null].cost
            )));
        }
        if cost_fn.ground_size() != n {
            return Err(Error::validation(format!(
                "cost function is over {} actions, instance has {n}",
                cost_fn.ground_size()
            )));
        }
        if cost_fn.value(Subset::EMPTY) != 0.0 {
            return Err(Error::validation("cost function must satisfy v(∅) = 0"));
        }
        Ok(Instance { actions, null, cost_fn, index })
    }

    /// Same actions, different cost function (e.g. a [`crate::costfn::CountingOracle`] wrapper).
    pub fn with_cost_fn(&self, cost_fn: CostHandle) -> Result<Self> {
        Instance::new(self.actions.clone(), &self.actions[self.null].id, cost_fn)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.actions.len()
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    #[inline]
    pub fn null_index(&self) -> usize {
        self.null
    }

    pub fn id(&self, j: usize) -> &str {
        &self.actions[j].id
    }

    /// `c(j)`
    #[inline]
    pub fn c(&self, j: usize) -> f64 {
        self.actions[j].cost
    }

    /// `f(j)`
    #[inline]
    pub fn f(&self, j: usize) -> f64 {
        self.actions[j].prob
    }

    /// `v(S)`
    #[inline]
    pub fn v(&self, s: Subset) -> f64 {
        self.cost_fn.value(s)
    }

    pub fn cost_fn(&self) -> &CostHandle {
        &self.cost_fn
    }

    pub fn all(&self) -> Subset {
        Subset::full(self.n())
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::input(format!("unknown action id {id:?}")))
    }

    pub fn subset_of_ids<S: AsRef<str>>(&self, ids: &[S]) -> Result<Subset> {
        ids.iter().map(|id| self.index_of(id.as_ref())).collect()
    }

    pub fn ids_of(&self, s: Subset) -> Vec<String> {
        s.iter().map(|j| self.actions[j].id.clone()).collect()
    }
}

/// Suggested action, payment on success, and a sparse distribution over inspected sets.
#[derive(Clone, Debug, PartialEq)]
pub struct InspectionScheme {
    pub suggested: usize,
    pub alpha: f64,
    pub distribution: Vec<(Subset, f64)>,
}

impl InspectionScheme {
    pub fn new(suggested: usize, alpha: f64, distribution: Vec<(Subset, f64)>) -> Self {
        InspectionScheme { suggested, alpha, distribution }
    }

    /// Inspect `set` with probability one.
    pub fn deterministic(suggested: usize, alpha: f64, set: Subset) -> Self {
        InspectionScheme::new(suggested, alpha, vec![(set, 1.0)])
    }

    /// The set inspected with probability one, if the scheme is deterministic.
    pub fn deterministic_set(&self) -> Option<Subset> {
        let mut support = self.distribution.iter().filter(|(_, p)| *p > 0.0);
        match (support.next(), support.next()) {
            (Some((s, p)), None) if (*p - 1.0).abs() <= SCHEME_MASS_TOL => Some(*s),
            _ => None,
        }
    }

    pub fn support_size(&self) -> usize {
        self.distribution.iter().filter(|(_, p)| *p > 0.0).count()
    }

    pub fn total_mass(&self) -> f64 {
        self.distribution.iter().map(|(_, p)| p).sum()
    }

    /// Checks the scheme against an instance: known actions, `α ∈ [0,1]`,
    /// nonnegative probabilities summing to one, no repeated sets.
    pub fn validate(&self, inst: &Instance) -> Result<()> {
        if self.suggested >= inst.n() {
            return Err(Error::input(format!("suggested action {} out of range", self.suggested)));
        }
        if !(self.alpha.is_finite() && (0.0..=1.0).contains(&self.alpha)) {
            return Err(Error::validation(format!("alpha = {} is outside [0, 1]", self.alpha)));
        }
        let all = inst.all();
        let mut seen = std::collections::HashSet::with_capacity(self.distribution.len());
        for (s, p) in &self.distribution {
            if !s.is_subset_of(all) {
                return Err(Error::input(format!("inspected set {s:?} contains unknown actions")));
            }
            if !(p.is_finite() && *p >= 0.0) {
                return Err(Error::validation(format!("probability {p} of {s:?} is negative")));
            }
            if !seen.insert(*s) {
                return Err(Error::validation(format!("set {s:?} appears twice in the distribution")));
            }
        }
        let mass = self.total_mass();
        if (mass - 1.0).abs() > SCHEME_MASS_TOL {
            return Err(Error::validation(format!("probabilities sum to {mass}, not 1")));
        }
        Ok(())
    }
}

/// Per-action marginal inspection probabilities `p(a) = Σ_{S∋a} p(S)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MarginalProfile(Vec<f64>);

impl MarginalProfile {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(x) = values.iter().find(|x| !(x.is_finite() && (0.0..=1.0).contains(*x))) {
            return Err(Error::input(format!("marginal {x} is outside [0, 1]")));
        }
        Ok(MarginalProfile(values))
    }

    pub fn of_scheme(scheme: &InspectionScheme, n: usize) -> Self {
        MarginalProfile((0..n).map(|j| marginal(scheme, j)).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, j: usize) -> f64 {
        self.0[j]
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }
}

/// `p(j)`: total probability of inspecting a set containing `j`.
pub fn marginal(scheme: &InspectionScheme, j: usize) -> f64 {
    scheme
        .distribution
        .iter()
        .filter(|(s, _)| s.contains(j))
        .map(|(_, p)| p)
        .sum()
}

/// Probability that a deviation from the suggested action to `j` is detected.
pub fn caught_probability(scheme: &InspectionScheme, j: usize) -> f64 {
    let watch = Subset::singleton(scheme.suggested).with(j);
    scheme
        .distribution
        .iter()
        .filter(|(s, _)| s.intersects(watch))
        .map(|(_, p)| p)
        .sum()
}

/// Expected inspection cost `Σ_S p(S)·v(S)`, querying only supported sets.
pub fn expected_inspection_cost(inst: &Instance, scheme: &InspectionScheme) -> f64 {
    scheme
        .distribution
        .iter()
        .filter(|(_, p)| *p > 0.0)
        .map(|(s, p)| p * inst.v(*s))
        .sum()
}

/// Probability the agent is paid on success when playing `j`.
fn paid_fraction(scheme: &InspectionScheme, j: usize) -> f64 {
    if j == scheme.suggested {
        1.0
    } else {
        1.0 - caught_probability(scheme, j)
    }
}

/// Agent's expected utility from playing `j` under `scheme`.
pub fn agent_utility(inst: &Instance, scheme: &InspectionScheme, j: usize) -> f64 {
    scheme.alpha * inst.f(j) * paid_fraction(scheme, j) - inst.c(j)
}

/// Principal's expected utility when the agent plays `j` under `scheme`.
pub fn principal_utility(inst: &Instance, scheme: &InspectionScheme, j: usize) -> f64 {
    (1.0 - scheme.alpha * paid_fraction(scheme, j)) * inst.f(j) - expected_inspection_cost(inst, scheme)
}

/// Actions whose agent utility is within `tol` of the best one, ascending by index.
pub fn best_responses(inst: &Instance, scheme: &InspectionScheme, tol: f64) -> Vec<usize> {
    let utils: Vec<f64> = (0..inst.n()).map(|j| agent_utility(inst, scheme, j)).collect();
    let best = utils.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (0..inst.n()).filter(|&j| utils[j] >= best - tol).collect()
}

/// Whether the suggested action is a best response (ties count as IC).
pub fn is_ic(inst: &Instance, scheme: &InspectionScheme, tol: f64) -> bool {
    let u_i = agent_utility(inst, scheme, scheme.suggested);
    (0..inst.n()).all(|j| agent_utility(inst, scheme, j) <= u_i + tol)
}

/// The best response the principal likes most, with her utility under it.
///
/// Ties between best responses are resolved in the principal's favor, then by index.
pub fn principal_favored_response(inst: &Instance, scheme: &InspectionScheme, tol: f64) -> (usize, f64) {
    best_responses(inst, scheme, tol)
        .into_iter()
        .map(|j| (j, principal_utility(inst, scheme, j)))
        .fold(None, |best: Option<(usize, f64)>, cand| match best {
            Some(b) if b.1 >= cand.1 => Some(b),
            _ => Some(cand),
        })
        .expect("an instance has at least one action")
}

/// Moves all mass on sets containing the suggested action onto `{i}` alone.
///
/// Agent utilities are unchanged and, for monotone costs, the principal's
/// utility can only go up.
pub fn normalize_scheme(scheme: &InspectionScheme) -> InspectionScheme {
    let i = scheme.suggested;
    let mut out: Vec<(Subset, f64)> = Vec::with_capacity(scheme.distribution.len());
    let mut slot = None;
    let mut on_i = 0.0;
    for &(s, p) in &scheme.distribution {
        if s.contains(i) {
            on_i += p;
            if slot.is_none() {
                slot = Some(out.len());
                out.push((Subset::singleton(i), 0.0));
            }
        } else {
            out.push((s, p));
        }
    }
    if let Some(k) = slot {
        out[k].1 = on_i;
    }
    InspectionScheme::new(i, scheme.alpha, out)
}

/// Convenience constructor for a cost function handle.
pub fn cost_handle<F: SetFunction + 'static>(f: F) -> CostHandle {
    Arc::new(f)
}
