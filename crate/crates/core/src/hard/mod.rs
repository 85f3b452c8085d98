//! Fixture instances: the introductory three-action example, the gap family,
//! the instance where a non-IC scheme beats every IC one, and the XOS family
//! used for the query lower bound.

mod experiment;
mod xos;

use serde::Serialize;

pub use experiment::{query_experiment, random_hidden_set, rotation_classes, seeded_params, QueryStats};
pub use xos::{
    canonical_rotation, cyclic, default_threshold, demand_vt, gen_xos_hard, is_prime, unique_optimal_scheme, HardParams,
    XosHardCertificate, XosHardCost, BOT, FIRST, G, X,
};

use crate::costfn::CostSpec;
use crate::error::{Error, Result};
use crate::model::{cost_handle, principal_favored_response, Action, Instance, InspectionScheme};
use crate::subset::Subset;

/// `bot (c 0, f 1/10)`, `b (1/10, 1/2)`, `g (7/20, 1)` with additive costs `1, 1, 1/10`.
pub fn intro_instance() -> Instance {
    let actions = vec![
        Action::new("bot", 0.0, 0.1),
        Action::new("b", 0.1, 0.5),
        Action::new("g", 0.35, 1.0),
    ];
    Instance::new(actions, "bot", cost_handle(CostSpec::Additive { weights: vec![1.0, 1.0, 0.1] }))
        .expect("fixture is valid")
}

/// `bot (0, 0)`, `1 (1/10, 2/5)`, `2 (1/2, 1)` with additive costs `0, 3/10, 2`,
/// together with the scheme `(bot, 1, {{bot}: 1/2, {1}: 1/4, ∅: 1/4})`.
pub fn nonic_instance() -> (Instance, InspectionScheme) {
    let actions = vec![
        Action::new("bot", 0.0, 0.0),
        Action::new("1", 0.1, 0.4),
        Action::new("2", 0.5, 1.0),
    ];
    let inst = Instance::new(actions, "bot", cost_handle(CostSpec::Additive { weights: vec![0.0, 0.3, 2.0] }))
        .expect("fixture is valid");
    let scheme = InspectionScheme::new(
        0,
        1.0,
        vec![(Subset::singleton(0), 0.5), (Subset::singleton(1), 0.25), (Subset::EMPTY, 0.25)],
    );
    (inst, scheme)
}

#[derive(Clone, Debug)]
pub struct NonIcExample {
    pub instance: Instance,
    pub scheme: InspectionScheme,
    /// Principal utility when the agent breaks the tie toward action `2`.
    pub non_ic_utility: f64,
    /// `1.45 - 2√0.3`, the best IC randomized utility.
    pub ic_optimum: f64,
}

pub fn gen_nonic_example() -> NonIcExample {
    let (instance, scheme) = nonic_instance();
    NonIcExample { instance, scheme, non_ic_utility: 0.425, ic_optimum: 1.45 - 2.0 * 0.3f64.sqrt() }
}

/// `bot` plus actions `1..n-1` with `f(i) = 2^(i+1)/2^n`, `c(i) = (2^(i+1) - i - 1)/2^n`,
/// and cost `|S| n / 2^n`.
pub fn gap_instance(n: usize) -> Result<Instance> {
    if !(3..=30).contains(&n) {
        return Err(Error::input(format!("gap instance needs 3 <= n <= 30, got {n}")));
    }
    let scale = (n as f64).exp2();
    let mut actions = vec![Action::new("bot", 0.0, 0.0)];
    for i in 1..n {
        let two = ((i + 1) as f64).exp2();
        actions.push(Action::new(i.to_string(), (two - i as f64 - 1.0) / scale, two / scale));
    }
    Instance::new(actions, "bot", cost_handle(CostSpec::Additive { weights: vec![n as f64 / scale; n] }))
}

/// `(n-1, 1 - n/2^n, {∅: 1/2, {n-1}: 1/2})`, which earns `n / 2^(n+1)`.
pub fn gap_reference_scheme(n: usize) -> InspectionScheme {
    let alpha = 1.0 - n as f64 / (n as f64).exp2();
    InspectionScheme::new(n - 1, alpha, vec![(Subset::EMPTY, 0.5), (Subset::singleton(n - 1), 0.5)])
}

/// Best deterministic scheme when the agent may deviate and ties go the principal's way.
#[derive(Clone, Debug, Serialize)]
pub struct NonIcSearch {
    pub suggested: usize,
    pub alpha: f64,
    pub inspected: Subset,
    pub response: usize,
    pub utility: f64,
    pub schemes_checked: usize,
}

/// Enumerates deterministic schemes without the IC requirement.
///
/// For fixed `(i, S)` the principal's utility under a fixed response falls in
/// `α`, so only payments where two agent-utility lines cross (or the ends of
/// `[0, 1]`) need to be tried.
pub fn best_non_ic_deterministic(inst: &Instance) -> Result<NonIcSearch> {
    let n = inst.n();
    if n > 12 {
        return Err(Error::SizeLimit(format!("non-IC enumeration supports n <= 12, got {n}")));
    }
    let mut alphas = vec![0.0, 1.0];
    for a in 0..n {
        for b in 0..n {
            let (fa, fb, ca, cb) = (inst.f(a), inst.f(b), inst.c(a), inst.c(b));
            if fa > 0.0 {
                alphas.push((ca - cb) / fa);
            }
            if fa != fb {
                alphas.push((ca - cb) / (fa - fb));
            }
        }
    }
    alphas.retain(|a| (0.0..=1.0).contains(a));
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();

    let mut best: Option<NonIcSearch> = None;
    let mut checked = 0;
    for i in 0..n {
        for s in Subset::all(n) {
            for &alpha in &alphas {
                checked += 1;
                let scheme = InspectionScheme::deterministic(i, alpha, s);
                let (response, utility) = principal_favored_response(inst, &scheme, 1e-12);
                if best.as_ref().is_none_or(|b| utility > b.utility) {
                    best = Some(NonIcSearch { suggested: i, alpha, inspected: s, response, utility, schemes_checked: 0 });
                }
            }
        }
    }
    let mut best = best.expect("at least one scheme is checked");
    best.schemes_checked = checked;
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::det::solve_deterministic;
    use crate::model::{agent_utility, best_responses, is_ic, principal_utility};

    #[test]
    fn nonic_scheme_ties_everything() {
        let ex = gen_nonic_example();
        for j in 0..3 {
            assert!(agent_utility(&ex.instance, &ex.scheme, j).abs() < 1e-15);
        }
        assert_eq!(best_responses(&ex.instance, &ex.scheme, 1e-12), vec![0, 1, 2]);
        assert!((principal_utility(&ex.instance, &ex.scheme, 2) - 0.425).abs() < 1e-15);
        let (resp, u) = principal_favored_response(&ex.instance, &ex.scheme, 1e-12);
        assert_eq!(resp, 2);
        assert!((u - ex.non_ic_utility).abs() < 1e-15);
    }

    #[test]
    fn deterministic_deviation_never_helps_on_nonic_instance() {
        let ex = gen_nonic_example();
        let det = solve_deterministic(&ex.instance).unwrap();
        let free = best_non_ic_deterministic(&ex.instance).unwrap();
        assert!(free.utility <= det.best.utility + 1e-9);
    }

    #[test]
    fn gap_instance_rows() {
        let inst = gap_instance(10).unwrap();
        assert_eq!(inst.f(9), 1.0);
        assert_eq!(inst.c(9), (1024.0 - 10.0) / 1024.0);
        assert_eq!(inst.v(Subset::singleton(4)), 10.0 / 1024.0);
        let s = gap_reference_scheme(10);
        assert!(is_ic(&inst, &s, 0.0));
        assert_eq!(principal_utility(&inst, &s, 9), 10.0 / 2048.0);
    }
}
