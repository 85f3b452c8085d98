//! JSON encodings of instances, cost functions and schemes.
//!
//! Actions are referred to by id everywhere in the files; weight maps may omit
//! actions, which then get weight 0. Objects serialize with sorted keys, so the
//! compact encoding of a [`serde_json::Value`] is canonical.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::costfn::{CostSpec, SetFunction};
use crate::error::{Error, Result};
use crate::model::{Action, Instance, InspectionScheme};
use crate::subset::Subset;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionJson {
    pub id: String,
    pub cost: f64,
    pub prob: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CostFnJson {
    Additive {
        weights: BTreeMap<String, f64>,
    },
    BudgetAdditive {
        weights: BTreeMap<String, f64>,
        cap: f64,
    },
    Coverage {
        universe: usize,
        covers: BTreeMap<String, Vec<usize>>,
        element_weights: Vec<f64>,
    },
    ConcaveCardinality {
        table: Vec<f64>,
    },
    /// `values[b]` is the cost of the set whose bitmask (bit `j` = `j`-th action) is `b`.
    Table {
        values: Vec<f64>,
    },
    Xos {
        clauses: Vec<BTreeMap<String, f64>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceJson {
    pub actions: Vec<ActionJson>,
    pub null_id: String,
    pub cost_fn: CostFnJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetProbJson {
    pub set: Vec<String>,
    pub prob: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeJson {
    pub suggested: String,
    pub alpha: f64,
    pub distribution: Vec<SetProbJson>,
}

fn index_map(actions: &[ActionJson]) -> BTreeMap<&str, usize> {
    actions.iter().enumerate().map(|(j, a)| (a.id.as_str(), j)).collect()
}

fn weights_vec(map: &BTreeMap<String, f64>, index: &BTreeMap<&str, usize>) -> Result<Vec<f64>> {
    let mut w = vec![0.0; index.len()];
    for (id, x) in map {
        let j = index.get(id.as_str()).ok_or_else(|| Error::input(format!("unknown action id {id:?} in weights")))?;
        w[*j] = *x;
    }
    Ok(w)
}

fn weights_map(w: &[f64], ids: &[String]) -> BTreeMap<String, f64> {
    ids.iter().cloned().zip(w.iter().copied()).collect()
}

impl CostFnJson {
    pub fn to_spec(&self, actions: &[ActionJson]) -> Result<CostSpec> {
        let index = index_map(actions);
        let n = actions.len();
        let spec = match self {
            CostFnJson::Additive { weights } => CostSpec::Additive { weights: weights_vec(weights, &index)? },
            CostFnJson::BudgetAdditive { weights, cap } => {
                CostSpec::BudgetAdditive { weights: weights_vec(weights, &index)?, cap: *cap }
            }
            CostFnJson::Coverage { universe, covers, element_weights } => {
                if element_weights.len() != *universe {
                    return Err(Error::validation(format!(
                        "coverage universe is {universe} but {} element weights were given",
                        element_weights.len()
                    )));
                }
                let mut c = vec![Vec::new(); n];
                for (id, elems) in covers {
                    let j = index.get(id.as_str()).ok_or_else(|| Error::input(format!("unknown action id {id:?} in covers")))?;
                    c[*j] = elems.clone();
                }
                CostSpec::WeightedCoverage { covers: c, element_weights: element_weights.clone() }
            }
            CostFnJson::ConcaveCardinality { table } => CostSpec::ConcaveCardinality { table: table.clone() },
            CostFnJson::Table { values } => CostSpec::ExplicitTable { values: values.clone() },
            CostFnJson::Xos { clauses } => CostSpec::XosClauses {
                clauses: clauses.iter().map(|c| weights_vec(c, &index)).collect::<Result<_>>()?,
            },
        };
        spec.validate(n)?;
        Ok(spec)
    }

    pub fn from_spec(spec: &CostSpec, ids: &[String]) -> CostFnJson {
        match spec {
            CostSpec::Additive { weights } => CostFnJson::Additive { weights: weights_map(weights, ids) },
            CostSpec::BudgetAdditive { weights, cap } => {
                CostFnJson::BudgetAdditive { weights: weights_map(weights, ids), cap: *cap }
            }
            CostSpec::WeightedCoverage { covers, element_weights } => CostFnJson::Coverage {
                universe: element_weights.len(),
                covers: ids.iter().cloned().zip(covers.iter().cloned()).collect(),
                element_weights: element_weights.clone(),
            },
            CostSpec::ConcaveCardinality { table } => CostFnJson::ConcaveCardinality { table: table.clone() },
            CostSpec::ExplicitTable { values } => CostFnJson::Table { values: values.clone() },
            CostSpec::XosClauses { clauses } => {
                CostFnJson::Xos { clauses: clauses.iter().map(|c| weights_map(c, ids)).collect() }
            }
        }
    }
}

impl InstanceJson {
    pub fn into_instance(self) -> Result<Instance> {
        let spec = self.cost_fn.to_spec(&self.actions)?;
        let actions = self.actions.into_iter().map(|a| Action::new(a.id, a.cost, a.prob)).collect();
        Instance::new(actions, &self.null_id, Arc::new(spec))
    }

    /// Encodes an instance; cost functions without a compact form are written as a table.
    pub fn from_instance(inst: &Instance) -> Result<Self> {
        let ids: Vec<String> = inst.actions().iter().map(|a| a.id.clone()).collect();
        let spec = match inst.cost_fn().spec() {
            Some(s) => s,
            None => CostSpec::table_from(inst.cost_fn())?,
        };
        Ok(InstanceJson {
            actions: inst
                .actions()
                .iter()
                .map(|a| ActionJson { id: a.id.clone(), cost: a.cost, prob: a.prob })
                .collect(),
            null_id: inst.id(inst.null_index()).to_string(),
            cost_fn: CostFnJson::from_spec(&spec, &ids),
        })
    }
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    serde_json::from_str::<InstanceJson>(text)?.into_instance()
}

pub fn instance_to_value(inst: &Instance) -> Result<Value> {
    Ok(serde_json::to_value(InstanceJson::from_instance(inst)?)?)
}

impl SchemeJson {
    pub fn from_scheme(inst: &Instance, s: &InspectionScheme) -> Self {
        SchemeJson {
            suggested: inst.id(s.suggested).to_string(),
            alpha: s.alpha,
            distribution: s
                .distribution
                .iter()
                .map(|(set, p)| SetProbJson { set: inst.ids_of(*set), prob: *p })
                .collect(),
        }
    }

    pub fn to_scheme(&self, inst: &Instance) -> Result<InspectionScheme> {
        let dist = self
            .distribution
            .iter()
            .map(|e| Ok((inst.subset_of_ids(&e.set)?, e.prob)))
            .collect::<Result<Vec<(Subset, f64)>>>()?;
        Ok(InspectionScheme::new(inst.index_of(&self.suggested)?, self.alpha, dist))
    }
}

/// Parses and validates a scheme against an instance.
pub fn parse_scheme(inst: &Instance, text: &str) -> Result<InspectionScheme> {
    let scheme = serde_json::from_str::<SchemeJson>(text)?.to_scheme(inst)?;
    scheme.validate(inst)?;
    Ok(scheme)
}

/// Compact JSON with sorted object keys.
pub fn canonical_json(v: &Value) -> String {
    v.to_string()
}

/// Hex SHA-256 of the canonical instance encoding.
pub fn instance_digest(inst: &Instance) -> Result<String> {
    let text = canonical_json(&instance_to_value(inst)?);
    Ok(Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect())
}
