//! Inspection cost functions behind a value/demand oracle interface.
//!
//! Every cost function is a normalized, monotone set function over the action
//! indices of an instance. Concrete constructors live in [`CostSpec`]; the
//! class checkers in [`checks`] verify monotonicity, submodularity and XOS
//! certificates by enumeration or seeded sampling.

pub mod checks;
mod counting;
mod spec;

use std::sync::Arc;

pub use counting::CountingOracle;
pub use spec::CostSpec;

use crate::error::{Error, Result};
use crate::subset::Subset;

/// Largest ground set for which the enumerating demand oracle is allowed.
pub const MAX_DEMAND_ENUMERATION: usize = 20;

/// A set function `v : 2^A -> R_{>=0}` with `v(∅) = 0`, accessed through oracles.
///
/// Implementations must be pure: the same query always returns the same answer,
/// and queries may be issued concurrently.
pub trait SetFunction: Send + Sync {
    /// Number of elements in the ground set.
    fn ground_size(&self) -> usize;

    /// Value oracle.
    fn value(&self, s: Subset) -> f64;

    /// Demand oracle: a set maximizing `value(S) - Σ_{j∈S} q_j`.
    ///
    /// The default enumerates all subsets (see [`demand_default`]).
    fn demand(&self, prices: &[f64]) -> Result<Subset> {
        demand_default(self, prices)
    }

    /// Constructor data for serialization, when this function has a compact form.
    fn spec(&self) -> Option<CostSpec> {
        None
    }
}

/// Shared handle to a cost function.
pub type CostHandle = Arc<dyn SetFunction>;

impl<F: SetFunction + ?Sized> SetFunction for Arc<F> {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }
    fn value(&self, s: Subset) -> f64 {
        (**self).value(s)
    }
    fn demand(&self, prices: &[f64]) -> Result<Subset> {
        (**self).demand(prices)
    }
    fn spec(&self) -> Option<CostSpec> {
        (**self).spec()
    }
}

/// `Σ_{j∈S} q_j`, summed in ascending index order.
///
/// Every demand computation in the crate prices sets through this function so
/// that exact-tie decisions agree between implementations.
pub fn price(prices: &[f64], s: Subset) -> f64 {
    s.iter().map(|j| prices[j]).sum()
}

/// Ranks two demand candidates: higher surplus first, then smaller cardinality,
/// then smaller bitmask.
pub fn demand_prefers(a: (Subset, f64), b: (Subset, f64)) -> bool {
    let (sa, ua) = a;
    let (sb, ub) = b;
    if ua != ub {
        return ua > ub;
    }
    if sa.len() != sb.len() {
        return sa.len() < sb.len();
    }
    sa.bits() < sb.bits()
}

/// Demand by exhaustive enumeration over all `2^n` subsets.
pub fn demand_default<F: SetFunction + ?Sized>(f: &F, prices: &[f64]) -> Result<Subset> {
    let n = f.ground_size();
    if n > MAX_DEMAND_ENUMERATION {
        return Err(Error::SizeLimit(format!(
            "enumerating demand oracle supports n <= {MAX_DEMAND_ENUMERATION}, got {n}"
        )));
    }
    check_prices(prices, n)?;
    let mut best = (Subset::EMPTY, 0.0);
    for s in Subset::all(n).skip(1) {
        let cand = (s, f.value(s) - price(prices, s));
        if demand_prefers(cand, best) {
            best = cand;
        }
    }
    Ok(best.0)
}

pub(crate) fn check_prices(prices: &[f64], n: usize) -> Result<()> {
    if prices.len() != n {
        return Err(Error::input(format!(
            "price vector has {} entries, ground set has {n}",
            prices.len()
        )));
    }
    if let Some(q) = prices.iter().find(|q| !(q.is_finite() && **q >= 0.0)) {
        return Err(Error::input(format!("prices must be finite and nonnegative, got {q}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn additive_demand_picks_profitable_items() {
        let v = CostSpec::Additive { weights: vec![0.5, 0.2, 0.9, 0.3] };
        let d = v.demand(&[0.1, 0.2, 1.0, 0.0]).unwrap();
        // item 1 ties (0.2 vs 0.2) and is excluded by the smaller-set rule
        assert_eq!(d, [0, 3].into_iter().collect());
    }

    #[test]
    fn huge_prices_demand_nothing() {
        let v = CostSpec::Additive { weights: vec![0.5, 0.2, 0.9] };
        assert_eq!(v.demand(&[10.0; 3]).unwrap(), Subset::EMPTY);
    }

    #[test]
    fn demand_rejects_negative_prices() {
        let v = CostSpec::Additive { weights: vec![0.5] };
        assert!(matches!(v.demand(&[-1.0]), Err(Error::Input(_))));
    }
}
