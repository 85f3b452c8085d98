use crate::costfn::SetFunction;
use crate::error::{Error, Result};
use crate::model::MarginalProfile;
use crate::subset::Subset;

/// Slack allowed when checking that the requested mass covers the largest marginal.
const MASS_TOL: f64 = 1e-12;

/// A chain-supported distribution realizing given marginals.
///
/// Elements of `ground` are sorted by ascending marginal (ties by index).
/// Level `t` is the suffix `{order[t], ..}` and carries the difference
/// between consecutive marginals; the remaining mass goes to `∅`. Zero-mass
/// levels are dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct NestedDistribution {
    pub order: Vec<usize>,
    pub levels: Vec<(Subset, f64)>,
    pub empty_mass: f64,
    pub cost: f64,
}

impl NestedDistribution {
    pub fn total_mass(&self) -> f64 {
        self.levels.iter().map(|(_, p)| p).sum::<f64>() + self.empty_mass
    }

    pub fn support_size(&self) -> usize {
        self.levels.len() + usize::from(self.empty_mass > 0.0)
    }

    /// Realized marginal of element `j`.
    pub fn marginal(&self, j: usize) -> f64 {
        self.levels.iter().filter(|(s, _)| s.contains(j)).map(|(_, p)| p).sum()
    }

    /// Levels followed by `∅` (when it has positive mass).
    pub fn into_distribution(self) -> Vec<(Subset, f64)> {
        let mut out = self.levels;
        if self.empty_mass > 0.0 {
            out.push((Subset::EMPTY, self.empty_mass));
        }
        out
    }
}

/// Builds the nested distribution over `ground` with the given marginals and total mass.
///
/// For submodular `f` its expected cost is minimal among all distributions
/// with these marginals. `marginals` is indexed by action; entries outside
/// `ground` are ignored.
pub fn nested_min_cost_distribution<F: SetFunction + ?Sized>(
    ground: Subset,
    marginals: &MarginalProfile,
    mass: f64,
    f: &F,
) -> Result<NestedDistribution> {
    let q = marginals.values();
    if let Some(j) = ground.iter().find(|&j| j >= q.len()) {
        return Err(Error::input(format!("no marginal given for ground element {j}")));
    }
    let mut order: Vec<usize> = ground.iter().collect();
    order.sort_by(|&a, &b| q[a].total_cmp(&q[b]).then(a.cmp(&b)));
    let top = order.last().map_or(0.0, |&j| q[j]);
    if mass < top - MASS_TOL {
        return Err(Error::Infeasible(format!(
            "mass {mass} is below the largest marginal {top}"
        )));
    }
    let mut levels = Vec::with_capacity(order.len());
    let mut suffix = ground;
    let mut prev = 0.0;
    let mut cost = 0.0;
    for &j in &order {
        let p = q[j] - prev;
        if p > 0.0 {
            cost += p * f.value(suffix);
            levels.push((suffix, p));
        }
        prev = q[j];
        suffix = suffix.without(j);
    }
    Ok(NestedDistribution { order, levels, empty_mass: (mass - top).max(0.0), cost })
}
