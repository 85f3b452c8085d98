use crate::error::{Error, Result};
use crate::subset::Subset;

use super::SetFunction;

/// Constructor data for the built-in inspection cost families.
///
/// All weights are indexed by action index. Every variant is normalized and
/// monotone once [`CostSpec::validate`] accepts it.
#[derive(Clone, Debug, PartialEq)]
pub enum CostSpec {
    /// `v(S) = Σ_{j∈S} w_j`.
    Additive { weights: Vec<f64> },
    /// `v(S) = min(cap, Σ_{j∈S} w_j)`.
    BudgetAdditive { weights: Vec<f64>, cap: f64 },
    /// `v(S) = Σ_{e ∈ ∪_{j∈S} covers[j]} element_weights[e]`.
    WeightedCoverage {
        covers: Vec<Vec<usize>>,
        element_weights: Vec<f64>,
    },
    /// `v(S) = table[|S|]` for a nondecreasing concave table with `table[0] = 0`.
    ConcaveCardinality { table: Vec<f64> },
    /// `v(S) = values[bitmask(S)]`.
    ExplicitTable { values: Vec<f64> },
    /// `v(S) = max_ℓ Σ_{j∈S} clauses[ℓ][j]`.
    XosClauses { clauses: Vec<Vec<f64>> },
}

fn nonneg(what: &str, w: &[f64]) -> Result<()> {
    match w.iter().position(|x| !(x.is_finite() && *x >= 0.0)) {
        Some(j) => Err(Error::validation(format!(
            "{what}[{j}] = {} must be finite and nonnegative",
            w[j]
        ))),
        None => Ok(()),
    }
}

fn arity(what: &str, len: usize, n: usize) -> Result<()> {
    if len != n {
        return Err(Error::validation(format!("{what} has {len} entries, expected {n}")));
    }
    Ok(())
}

impl CostSpec {
    /// Ground-set size implied by the constructor data.
    pub fn implied_size(&self) -> usize {
        match self {
            CostSpec::Additive { weights } | CostSpec::BudgetAdditive { weights, .. } => weights.len(),
            CostSpec::WeightedCoverage { covers, .. } => covers.len(),
            CostSpec::ConcaveCardinality { table } => table.len().saturating_sub(1),
            CostSpec::ExplicitTable { values } => values.len().trailing_zeros() as usize,
            CostSpec::XosClauses { clauses } => clauses.first().map_or(0, Vec::len),
        }
    }

    /// Checks the invariants of the constructor against a ground set of size `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            CostSpec::Additive { weights } => {
                arity("weights", weights.len(), n)?;
                nonneg("weights", weights)
            }
            CostSpec::BudgetAdditive { weights, cap } => {
                arity("weights", weights.len(), n)?;
                nonneg("weights", weights)?;
                nonneg("cap", &[*cap])
            }
            CostSpec::WeightedCoverage { covers, element_weights } => {
                arity("covers", covers.len(), n)?;
                nonneg("element_weights", element_weights)?;
                if element_weights.len() > 64 {
                    return Err(Error::validation("coverage universe is limited to 64 elements"));
                }
                for (j, c) in covers.iter().enumerate() {
                    if let Some(e) = c.iter().find(|e| **e >= element_weights.len()) {
                        return Err(Error::validation(format!(
                            "covers[{j}] references element {e} outside the universe"
                        )));
                    }
                }
                Ok(())
            }
            CostSpec::ConcaveCardinality { table } => {
                arity("table", table.len(), n + 1)?;
                nonneg("table", table)?;
                if table[0] != 0.0 {
                    return Err(Error::validation("concave table must have table[0] = 0"));
                }
                for t in 1..table.len() {
                    if table[t] < table[t - 1] {
                        return Err(Error::validation(format!("concave table decreases at {t}")));
                    }
                    if t + 1 < table.len() && table[t + 1] - table[t] > table[t] - table[t - 1] + 1e-12 {
                        return Err(Error::validation(format!(
                            "concave table has increasing differences at {t}"
                        )));
                    }
                }
                Ok(())
            }
            CostSpec::ExplicitTable { values } => {
                if n >= 31 || values.len() != 1usize << n {
                    return Err(Error::validation(format!(
                        "table has {} values, expected 2^{n}",
                        values.len()
                    )));
                }
                nonneg("values", values)?;
                if values[0] != 0.0 {
                    return Err(Error::validation("table must be normalized: v(∅) = 0"));
                }
                for s in 0..values.len() {
                    for j in 0..n {
                        let t = s | (1 << j);
                        if values[t] < values[s] {
                            return Err(Error::validation(format!(
                                "table is not monotone: v({:?}) > v({:?})",
                                Subset::from_bits(s as u32),
                                Subset::from_bits(t as u32)
                            )));
                        }
                    }
                }
                Ok(())
            }
            CostSpec::XosClauses { clauses } => {
                if clauses.is_empty() {
                    return Err(Error::validation("xos cost needs at least one clause"));
                }
                for (l, c) in clauses.iter().enumerate() {
                    arity(&format!("clauses[{l}]"), c.len(), n)?;
                    nonneg(&format!("clauses[{l}]"), c)?;
                }
                Ok(())
            }
        }
    }

    /// Materializes any set function as an explicit table.
    pub fn table_from<F: SetFunction + ?Sized>(f: &F) -> Result<CostSpec> {
        let n = f.ground_size();
        if n > 20 {
            return Err(Error::SizeLimit(format!("cannot tabulate a set function with n = {n}")));
        }
        Ok(CostSpec::ExplicitTable { values: Subset::all(n).map(|s| f.value(s)).collect() })
    }
}

impl SetFunction for CostSpec {
    fn ground_size(&self) -> usize {
        self.implied_size()
    }

    fn value(&self, s: Subset) -> f64 {
        match self {
            CostSpec::Additive { weights } => s.iter().map(|j| weights[j]).sum(),
            CostSpec::BudgetAdditive { weights, cap } => {
                let total: f64 = s.iter().map(|j| weights[j]).sum();
                total.min(*cap)
            }
            CostSpec::WeightedCoverage { covers, element_weights } => {
                let mut covered = 0u64;
                for j in s.iter() {
                    for &e in &covers[j] {
                        covered |= 1 << e;
                    }
                }
                (0..element_weights.len())
                    .filter(|e| covered & (1 << e) != 0)
                    .map(|e| element_weights[e])
                    .sum()
            }
            CostSpec::ConcaveCardinality { table } => table[s.len()],
            CostSpec::ExplicitTable { values } => values[s.bits() as usize],
            CostSpec::XosClauses { clauses } => clauses
                .iter()
                .map(|c| s.iter().map(|j| c[j]).sum::<f64>())
                .fold(0.0, f64::max),
        }
    }

    fn spec(&self) -> Option<CostSpec> {
        Some(self.clone())
    }
}
