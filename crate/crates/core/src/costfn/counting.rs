use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::Result;
use crate::subset::Subset;

use super::{CostSpec, SetFunction};

/// Wraps a set function and counts the oracle calls made through it.
///
/// Answers are forwarded unchanged; counters only increase.
pub struct CountingOracle {
    inner: Arc<dyn SetFunction>,
    value_queries: AtomicU64,
    demand_queries: AtomicU64,
}

impl CountingOracle {
    pub fn new(inner: Arc<dyn SetFunction>) -> Self {
        CountingOracle {
            inner,
            value_queries: AtomicU64::new(0),
            demand_queries: AtomicU64::new(0),
        }
    }

    pub fn value_queries(&self) -> u64 {
        self.value_queries.load(Ordering::Relaxed)
    }

    pub fn demand_queries(&self) -> u64 {
        self.demand_queries.load(Ordering::Relaxed)
    }

    pub fn total_queries(&self) -> u64 {
        self.value_queries() + self.demand_queries()
    }
}

impl SetFunction for CountingOracle {
    fn ground_size(&self) -> usize {
        self.inner.ground_size()
    }

    fn value(&self, s: Subset) -> f64 {
        self.value_queries.fetch_add(1, Ordering::Relaxed);
        self.inner.value(s)
    }

    fn demand(&self, prices: &[f64]) -> Result<Subset> {
        self.demand_queries.fetch_add(1, Ordering::Relaxed);
        self.inner.demand(prices)
    }

    fn spec(&self) -> Option<CostSpec> {
        self.inner.spec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_every_call_and_is_transparent() {
        let base: Arc<dyn SetFunction> = Arc::new(CostSpec::Additive { weights: vec![0.3, 0.7] });
        let oracle = CountingOracle::new(base.clone());
        for s in Subset::all(2) {
            assert_eq!(oracle.value(s), base.value(s));
        }
        assert_eq!(oracle.demand(&[0.5, 0.5]).unwrap(), base.demand(&[0.5, 0.5]).unwrap());
        assert_eq!(oracle.value_queries(), 4);
        assert_eq!(oracle.demand_queries(), 1);
    }
}
