#![allow(dead_code)]

use icx::{Instance, InspectionScheme, Subset};
use num_rational::Ratio;

pub type Q = Ratio<i128>;

/// Smallest-denominator fraction within `1e-12` of `x`.
pub fn rationalize(x: f64) -> Q {
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut r = x;
    for _ in 0..40 {
        let a = r.floor();
        let ai = a as i128;
        (h0, h1) = (h1, ai * h1 + h0);
        (k0, k1) = (k1, ai * k1 + k0);
        if ((h1 as f64) / (k1 as f64) - x).abs() < 1e-12 || k1 > 1_000_000_000 {
            break;
        }
        let frac = r - a;
        if frac == 0.0 {
            break;
        }
        r = 1.0 / frac;
    }
    Q::new(h1, k1)
}

/// Agent utilities with every number replaced by its rational reconstruction.
pub fn exact_agent_utilities(inst: &Instance, scheme: &InspectionScheme) -> Vec<Q> {
    let alpha = rationalize(scheme.alpha);
    let i = scheme.suggested;
    (0..inst.n())
        .map(|j| {
            let caught: Q = if j == i {
                Q::from_integer(0)
            } else {
                let watch = Subset::singleton(i).with(j);
                scheme
                    .distribution
                    .iter()
                    .filter(|(s, _)| s.intersects(watch))
                    .map(|(_, p)| rationalize(*p))
                    .sum()
            };
            alpha * rationalize(inst.f(j)) * (Q::from_integer(1) - caught) - rationalize(inst.c(j))
        })
        .collect()
}

pub fn exact_is_ic(inst: &Instance, scheme: &InspectionScheme) -> bool {
    let u = exact_agent_utilities(inst, scheme);
    let mass: Q = scheme.distribution.iter().map(|(_, p)| rationalize(*p)).sum();
    mass == Q::from_integer(1) && u.iter().all(|x| *x <= u[scheme.suggested])
}

/// Principal utility when the agent follows the suggestion, in exact arithmetic.
pub fn exact_principal_utility(inst: &Instance, scheme: &InspectionScheme, j: usize) -> Q {
    let alpha = rationalize(scheme.alpha);
    let one = Q::from_integer(1);
    let paid = if j == scheme.suggested {
        one
    } else {
        let watch = Subset::singleton(scheme.suggested).with(j);
        one - scheme
            .distribution
            .iter()
            .filter(|(s, _)| s.intersects(watch))
            .map(|(_, p)| rationalize(*p))
            .sum::<Q>()
    };
    let cost: Q = scheme.distribution.iter().map(|(s, p)| rationalize(*p) * rationalize(inst.v(*s))).sum();
    (one - alpha * paid) * rationalize(inst.f(j)) - cost
}

pub fn total_variation(a: &[(Subset, f64)], b: &[(Subset, f64)]) -> f64 {
    let mut sets: Vec<Subset> = a.iter().chain(b).map(|(s, _)| *s).collect();
    sets.sort();
    sets.dedup();
    let mass = |d: &[(Subset, f64)], s: Subset| d.iter().filter(|(t, _)| *t == s).map(|(_, p)| p).sum::<f64>();
    sets.iter().map(|&s| (mass(a, s) - mass(b, s)).abs()).sum::<f64>() / 2.0
}
