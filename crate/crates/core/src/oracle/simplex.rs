//! Dense two-phase tableau simplex with Bland's rule.
//!
//! Minimizes `c·x` subject to row constraints and `x >= 0`. Meant for the
//! verification LPs only: at most [`MAX_VARIABLES`] columns and
//! [`MAX_CONSTRAINTS`] rows.

use serde::Serialize;

use crate::error::{Error, Result};

pub const MAX_VARIABLES: usize = 1 << 12;
pub const MAX_CONSTRAINTS: usize = 128;
pub const LP_TOL: f64 = 1e-9;
const MAX_PIVOTS: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        LinearProgram { objective, constraints: Vec::new() }
    }

    pub fn add(&mut self, coeffs: Vec<f64>, sense: Sense, rhs: f64) -> &mut Self {
        self.constraints.push(Constraint { coeffs, sense, rhs });
        self
    }

    fn check(&self) -> Result<()> {
        let n = self.objective.len();
        if n > MAX_VARIABLES || self.constraints.len() > MAX_CONSTRAINTS {
            return Err(Error::SizeLimit(format!(
                "LP has {n} variables and {} constraints; limits are {MAX_VARIABLES} and {MAX_CONSTRAINTS}",
                self.constraints.len()
            )));
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&self.objective) {
            return Err(Error::input("LP objective has non-finite entries"));
        }
        for (r, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(Error::input(format!("LP row {r} has {} coefficients, expected {n}", c.coeffs.len())));
            }
            if !finite(&c.coeffs) || !c.rhs.is_finite() {
                return Err(Error::input(format!("LP row {r} has non-finite entries")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub value: f64,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    /// Reduced costs; the last entry is minus the objective value.
    cost: Vec<f64>,
    width: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, e: usize) {
        let p = self.rows[r][e];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        self.rhs[r] /= p;
        let (pivot_row, pivot_rhs) = (self.rows[r].clone(), self.rhs[r]);
        for s in 0..self.rows.len() {
            if s == r {
                continue;
            }
            let factor = self.rows[s][e];
            if factor != 0.0 {
                for (v, pv) in self.rows[s].iter_mut().zip(&pivot_row) {
                    *v -= factor * pv;
                }
                self.rhs[s] -= factor * pivot_rhs;
            }
        }
        let factor = self.cost[e];
        if factor != 0.0 {
            for (v, pv) in self.cost[..self.width].iter_mut().zip(&pivot_row) {
                *v -= factor * pv;
            }
            self.cost[self.width] -= factor * pivot_rhs;
        }
        self.basis[r] = e;
    }

    /// Runs Bland's rule over the allowed columns. Returns false on unboundedness.
    fn optimize(&mut self, allowed: usize) -> Result<bool> {
        for _ in 0..MAX_PIVOTS {
            let Some(e) = (0..allowed).find(|&j| self.cost[j] < -LP_TOL) else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][e];
                if a > LP_TOL {
                    let ratio = self.rhs[r] / a;
                    leave = match leave {
                        Some((lr, lv))
                            if lv < ratio - 1e-12
                                || (ratio - lv).abs() <= 1e-12 && self.basis[lr] < self.basis[r] =>
                        {
                            Some((lr, lv))
                        }
                        _ => Some((r, ratio)),
                    };
                }
            }
            match leave {
                None => return Ok(false),
                Some((r, _)) => self.pivot(r, e),
            }
        }
        Err(Error::Invariant("simplex exceeded its pivot budget".into()))
    }
}

pub fn simplex_solve(lp: &LinearProgram) -> Result<LpSolution> {
    lp.check()?;
    let n = lp.objective.len();
    let m = lp.constraints.len();

    // flip rows so every right-hand side is nonnegative
    let rows: Vec<(Vec<f64>, Sense, f64)> = lp
        .constraints
        .iter()
        .map(|c| {
            if c.rhs < 0.0 {
                let sense = match c.sense {
                    Sense::Le => Sense::Ge,
                    Sense::Ge => Sense::Le,
                    Sense::Eq => Sense::Eq,
                };
                (c.coeffs.iter().map(|x| -x).collect(), sense, -c.rhs)
            } else {
                (c.coeffs.clone(), c.sense, c.rhs)
            }
        })
        .collect();

    let n_slack = rows.iter().filter(|r| r.1 != Sense::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Sense::Le).count();
    let width = n + n_slack + n_art;
    let art_start = n + n_slack;

    let mut t = Tableau {
        rows: Vec::with_capacity(m),
        rhs: Vec::with_capacity(m),
        basis: Vec::with_capacity(m),
        cost: vec![0.0; width + 1],
        width,
    };
    let (mut next_slack, mut next_art) = (n, art_start);
    for (coeffs, sense, rhs) in rows {
        let mut row = coeffs;
        row.resize(width, 0.0);
        match sense {
            Sense::Le => {
                row[next_slack] = 1.0;
                t.basis.push(next_slack);
                next_slack += 1;
            }
            Sense::Ge => {
                row[next_slack] = -1.0;
                next_slack += 1;
                row[next_art] = 1.0;
                t.basis.push(next_art);
                next_art += 1;
            }
            Sense::Eq => {
                row[next_art] = 1.0;
                t.basis.push(next_art);
                next_art += 1;
            }
        }
        t.rows.push(row);
        t.rhs.push(rhs);
    }

    // phase one: minimize the sum of artificials
    for j in art_start..width {
        t.cost[j] = 1.0;
    }
    for r in 0..m {
        if t.basis[r] >= art_start {
            for j in 0..width {
                t.cost[j] -= t.rows[r][j];
            }
            t.cost[width] -= t.rhs[r];
        }
    }
    if n_art > 0 {
        t.optimize(width)?;
        let infeasibility = -t.cost[width];
        let scale = 1.0 + t.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if infeasibility > LP_TOL * scale {
            return Ok(LpSolution { status: LpStatus::Infeasible, x: vec![0.0; n], value: f64::NAN });
        }
        // drive artificials out of the basis or drop redundant rows
        let mut r = 0;
        while r < t.rows.len() {
            if t.basis[r] >= art_start {
                match (0..art_start).find(|&j| t.rows[r][j].abs() > LP_TOL) {
                    Some(e) => t.pivot(r, e),
                    None => {
                        t.rows.remove(r);
                        t.rhs.remove(r);
                        t.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }

    // phase two
    t.cost.iter_mut().for_each(|v| *v = 0.0);
    t.cost[..n].copy_from_slice(&lp.objective);
    for r in 0..t.rows.len() {
        let cb = if t.basis[r] < n { lp.objective[t.basis[r]] } else { 0.0 };
        if cb != 0.0 {
            for j in 0..width {
                t.cost[j] -= cb * t.rows[r][j];
            }
            t.cost[width] -= cb * t.rhs[r];
        }
    }
    if !t.optimize(art_start)? {
        return Ok(LpSolution { status: LpStatus::Unbounded, x: vec![0.0; n], value: f64::NEG_INFINITY });
    }
    let mut x = vec![0.0; n];
    for (r, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rhs[r].max(0.0);
        }
    }
    let value = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution { status: LpStatus::Optimal, x, value })
}
