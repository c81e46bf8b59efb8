//! Dense two-phase simplex over an exact ordered field.
//!
//! Every LP in the crate (per-profile prophet problems, the stagewise on-line
//! LP, implementability systems, the `h` capacity LP and the proof-lab family)
//! goes through [`LpProblem::solve`] or [`LpProblem::feasible`]. Pivoting uses
//! the smallest-index rule for both entering and leaving variables, so the
//! method terminates on degenerate problems without perturbation.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint<S> {
    pub coeffs: Vec<S>,
    pub relation: Relation,
    pub rhs: S,
}

impl<S: Scalar> Constraint<S> {
    pub fn lhs(&self, x: &[S]) -> S {
        self.coeffs
            .iter()
            .zip(x)
            .fold(S::zero(), |acc, (a, v)| acc + a.clone() * v)
    }

    pub fn is_satisfied_by(&self, x: &[S]) -> bool {
        let lhs = self.lhs(x);
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Eq => lhs == self.rhs,
            Relation::Ge => lhs >= self.rhs,
        }
    }
}

/// `maximize c·x` subject to linear rows; variables are nonnegative unless
/// marked free.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpProblem<S> {
    objective: Vec<S>,
    constraints: Vec<Constraint<S>>,
    nonneg: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpSolution<S> {
    Optimal { value: S, x: Vec<S> },
    Infeasible,
    Unbounded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

impl<S> LpSolution<S> {
    pub fn status(&self) -> LpStatus {
        match self {
            LpSolution::Optimal { .. } => LpStatus::Optimal,
            LpSolution::Infeasible => LpStatus::Infeasible,
            LpSolution::Unbounded => LpStatus::Unbounded,
        }
    }

    pub fn value(&self) -> Option<&S> {
        match self {
            LpSolution::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn primal(&self) -> Option<&[S]> {
        match self {
            LpSolution::Optimal { x, .. } => Some(x),
            _ => None,
        }
    }
}

impl<S: Scalar> LpProblem<S> {
    /// Problem with `num_vars` nonnegative variables, zero objective and no rows.
    pub fn new(num_vars: usize) -> Self {
        LpProblem {
            objective: vec![S::zero(); num_vars],
            constraints: Vec::new(),
            nonneg: vec![true; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn objective(&self) -> &[S] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint<S>] {
        &self.constraints
    }

    pub fn is_nonneg(&self, var: usize) -> bool {
        self.nonneg[var]
    }

    pub fn set_objective(&mut self, coeffs: Vec<S>) -> Result<()> {
        if coeffs.len() != self.num_vars() {
            return Err(Error::Structural(format!(
                "objective has {} coefficients, problem has {} variables",
                coeffs.len(),
                self.num_vars()
            )));
        }
        self.objective = coeffs;
        Ok(())
    }

    pub fn set_objective_coeff(&mut self, var: usize, coeff: S) {
        self.objective[var] = coeff;
    }

    pub fn set_free(&mut self, var: usize) {
        self.nonneg[var] = false;
    }

    pub fn add_constraint(&mut self, coeffs: Vec<S>, relation: Relation, rhs: S) -> Result<()> {
        if coeffs.len() != self.num_vars() {
            return Err(Error::Structural(format!(
                "row has {} coefficients, problem has {} variables",
                coeffs.len(),
                self.num_vars()
            )));
        }
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        Ok(())
    }

    /// Adds a row given as `(variable, coefficient)` pairs; repeated variables accumulate.
    pub fn add_sparse(&mut self, terms: &[(usize, S)], relation: Relation, rhs: S) -> Result<()> {
        let mut coeffs = vec![S::zero(); self.num_vars()];
        for (var, c) in terms {
            let slot = coeffs.get_mut(*var).ok_or_else(|| {
                Error::Structural(format!("variable {var} out of range in sparse row"))
            })?;
            *slot += c;
        }
        self.add_constraint(coeffs, relation, rhs)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if n == 0 {
            return Err(Error::Structural("LP needs at least one variable".into()));
        }
        if self.nonneg.len() != n {
            return Err(Error::Structural("nonnegativity flags mismatch".into()));
        }
        if let Some(i) = self.constraints.iter().position(|c| c.coeffs.len() != n) {
            return Err(Error::Structural(format!("row {i} has the wrong length")));
        }
        Ok(())
    }

    pub fn objective_at(&self, x: &[S]) -> S {
        self.objective
            .iter()
            .zip(x)
            .fold(S::zero(), |acc, (c, v)| acc + c.clone() * v)
    }

    /// Exact membership test: every row and every sign restriction holds.
    pub fn is_satisfied_by(&self, x: &[S]) -> bool {
        x.len() == self.num_vars()
            && x
                .iter()
                .zip(&self.nonneg)
                .all(|(v, nonneg)| !nonneg || !v.is_negative())
            && self.constraints.iter().all(|c| c.is_satisfied_by(x))
    }

    pub fn solve(&self) -> Result<LpSolution<S>> {
        self.validate()?;
        let mut tab = Tableau::build(self);
        if !tab.phase_one() {
            return Ok(LpSolution::Infeasible);
        }
        tab.drop_artificials();
        if !tab.phase_two(self) {
            return Ok(LpSolution::Unbounded);
        }
        let x = tab.primal(self);
        let value = self.objective_at(&x);
        debug_assert!(self.is_satisfied_by(&x));
        Ok(LpSolution::Optimal { value, x })
    }

    /// Phase one only: a feasible point when one exists.
    pub fn feasible(&self) -> Result<Option<Vec<S>>> {
        self.validate()?;
        let mut tab = Tableau::build(self);
        if !tab.phase_one() {
            return Ok(None);
        }
        let x = tab.primal(self);
        debug_assert!(self.is_satisfied_by(&x));
        Ok(Some(x))
    }
}

pub fn solve<S: Scalar>(problem: &LpProblem<S>) -> Result<LpSolution<S>> {
    problem.solve()
}

pub fn feasible<S: Scalar>(problem: &LpProblem<S>) -> Result<Option<Vec<S>>> {
    problem.feasible()
}

/// Standard-form tableau. Column layout: structural columns (free variables
/// split into a positive and a negative part), then slack/surplus columns,
/// then artificial columns; the right-hand side is stored as the last entry
/// of each row.
struct Tableau<S> {
    rows: Vec<Vec<S>>,
    /// Reduced costs `c_j - c_B B^-1 A_j`; the last entry holds `-value`.
    obj: Vec<S>,
    basis: Vec<usize>,
    /// First column of each original variable and whether it has a negative twin.
    var_cols: Vec<(usize, bool)>,
    structural: usize,
    artificial_start: usize,
}

impl<S: Scalar> Tableau<S> {
    fn build(p: &LpProblem<S>) -> Self {
        let mut var_cols = Vec::with_capacity(p.num_vars());
        let mut structural = 0;
        for &nonneg in &p.nonneg {
            var_cols.push((structural, !nonneg));
            structural += if nonneg { 1 } else { 2 };
        }

        // Normalize every row to a nonnegative right-hand side.
        let normalized: Vec<(Vec<S>, Relation, S)> = p
            .constraints
            .iter()
            .map(|c| {
                let mut coeffs = Vec::with_capacity(structural);
                for (j, a) in c.coeffs.iter().enumerate() {
                    coeffs.push(a.clone());
                    if var_cols[j].1 {
                        coeffs.push(-a.clone());
                    }
                }
                if c.rhs.is_negative() {
                    let flipped = match c.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Eq => Relation::Eq,
                        Relation::Ge => Relation::Le,
                    };
                    (coeffs.into_iter().map(|a| -a).collect(), flipped, -c.rhs.clone())
                } else {
                    (coeffs, c.relation, c.rhs.clone())
                }
            })
            .collect();

        let slack_count = normalized
            .iter()
            .filter(|(_, rel, _)| *rel != Relation::Eq)
            .count();
        let artificial_count = normalized
            .iter()
            .filter(|(_, rel, _)| *rel != Relation::Le)
            .count();
        let artificial_start = structural + slack_count;
        let width = artificial_start + artificial_count;

        let mut rows = Vec::with_capacity(normalized.len());
        let mut basis = Vec::with_capacity(normalized.len());
        let mut next_slack = structural;
        let mut next_art = artificial_start;
        for (coeffs, rel, rhs) in normalized {
            let mut row = coeffs;
            row.resize(width + 1, S::zero());
            match rel {
                Relation::Le => {
                    row[next_slack] = S::one();
                    basis.push(next_slack);
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = -S::one();
                    next_slack += 1;
                    row[next_art] = S::one();
                    basis.push(next_art);
                    next_art += 1;
                }
                Relation::Eq => {
                    row[next_art] = S::one();
                    basis.push(next_art);
                    next_art += 1;
                }
            }
            row[width] = rhs;
            rows.push(row);
        }

        Tableau {
            rows,
            obj: Vec::new(),
            basis,
            var_cols,
            structural,
            artificial_start,
        }
    }

    fn width(&self) -> usize {
        self.obj.len() - 1
    }

    /// Installs `costs` (one per column, rhs excluded) as the objective and
    /// prices out the current basis.
    fn install_objective(&mut self, costs: Vec<S>) {
        let mut obj = costs;
        obj.push(S::zero());
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = obj[b].clone();
            if cb.is_zero() {
                continue;
            }
            for (o, a) in obj.iter_mut().zip(row) {
                if !a.is_zero() {
                    *o -= cb.clone() * a;
                }
            }
        }
        self.obj = obj;
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let mut prow = std::mem::take(&mut self.rows[r]);
        let piv = prow[e].clone();
        if !piv.is_one() {
            for v in prow.iter_mut().filter(|v| !v.is_zero()) {
                *v /= &piv;
            }
        }
        let nz: Vec<usize> = (0..prow.len()).filter(|&k| !prow[k].is_zero()).collect();
        let eliminate = |row: &mut Vec<S>| {
            let f = row[e].clone();
            if f.is_zero() {
                return;
            }
            for &k in &nz {
                row[k] -= f.clone() * &prow[k];
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.obj);
        self.rows[r] = prow;
        self.basis[r] = e;
    }

    /// Runs smallest-index simplex iterations over columns `< eligible`.
    /// Returns `false` when the objective is unbounded.
    fn iterate(&mut self, eligible: usize) -> bool {
        let rhs = self.width();
        loop {
            let Some(e) = (0..eligible).find(|&j| self.obj[j].is_positive()) else {
                return true;
            };
            let mut best: Option<(usize, S)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[e].is_positive() {
                    continue;
                }
                let ratio = row[rhs].clone() / &row[e];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => {
                        ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, e),
                None => return false,
            }
        }
    }

    fn phase_one(&mut self) -> bool {
        let width = self.rows.first().map_or(self.artificial_start, |r| r.len() - 1);
        let mut costs = vec![S::zero(); width];
        for c in costs.iter_mut().skip(self.artificial_start) {
            *c = -S::one();
        }
        self.install_objective(costs);
        if width == self.artificial_start {
            return true;
        }
        // Phase one is bounded above by zero, so `iterate` cannot report unbounded.
        self.iterate(width);
        // value = -obj[rhs]; feasible iff the artificial sum reached zero.
        self.obj[width].is_zero()
    }

    /// Pivots basic artificials out (or deletes their redundant rows) and
    /// truncates the artificial columns.
    fn drop_artificials(&mut self) {
        let start = self.artificial_start;
        let mut r = 0;
        while r < self.rows.len() {
            if self.basis[r] < start {
                r += 1;
                continue;
            }
            match (0..start).find(|&k| !self.rows[r][k].is_zero()) {
                Some(k) => {
                    self.pivot(r, k);
                    r += 1;
                }
                None => {
                    self.rows.remove(r);
                    self.basis.remove(r);
                }
            }
        }
        for row in &mut self.rows {
            let rhs = row.pop().expect("row has rhs");
            row.truncate(start);
            row.push(rhs);
        }
    }

    fn phase_two(&mut self, p: &LpProblem<S>) -> bool {
        let width = self.artificial_start;
        let mut costs = vec![S::zero(); width];
        for (j, c) in p.objective.iter().enumerate() {
            let (col, split) = self.var_cols[j];
            costs[col] = c.clone();
            if split {
                costs[col + 1] = -c.clone();
            }
        }
        self.install_objective(costs);
        self.iterate(width)
    }

    fn primal(&self, p: &LpProblem<S>) -> Vec<S> {
        let rhs = self.rows.first().map_or(0, |r| r.len() - 1);
        let mut cols = vec![S::zero(); self.structural];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if b < self.structural {
                cols[b] = row[rhs].clone();
            }
        }
        (0..p.num_vars())
            .map(|j| {
                let (col, split) = self.var_cols[j];
                if split {
                    cols[col].clone() - &cols[col + 1]
                } else {
                    cols[col].clone()
                }
            })
            .collect()
    }
}
