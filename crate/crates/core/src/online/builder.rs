//! Column bookkeeping for LPs over history-indexed variables.

use std::collections::{HashMap, HashSet};

use num_traits::Zero;

use crate::constraints::LinRow;
use crate::error::Result;
use crate::lp::{LpProblem, Relation};
use crate::model::Budget;
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) enum Family {
    /// `q` (or `q′` in the split formulations).
    Q,
    /// `q″`.
    Q2,
    /// Placeholder column for LPs that would otherwise have none.
    Pad,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct ColKey {
    pub family: Family,
    pub path: Vec<u16>,
    pub coord: usize,
    /// History the variable is indexed by: `r^{coord+1}` for decisions,
    /// shorter for the look-ahead variable `z(r^i)`.
    pub history: Vec<usize>,
}

impl ColKey {
    pub fn new(family: Family, path: Vec<u16>, coord: usize, history: Vec<usize>) -> Self {
        ColKey {
            family,
            path,
            coord,
            history,
        }
    }
}

type Row = (Vec<(usize, Rational)>, Relation, Rational);

pub(crate) struct HistoryLp {
    budget: Budget,
    cols: HashMap<ColKey, usize>,
    keys: Vec<ColKey>,
    rows: Vec<Row>,
    seen: HashSet<Row>,
    objective: Vec<Rational>,
    fixed: HashMap<usize, Rational>,
}

fn holds(lhs: &Rational, relation: Relation, rhs: &Rational) -> bool {
    match relation {
        Relation::Le => lhs <= rhs,
        Relation::Eq => lhs == rhs,
        Relation::Ge => lhs >= rhs,
    }
}

impl HistoryLp {
    pub fn new(budget: Budget) -> Self {
        HistoryLp {
            budget,
            cols: HashMap::new(),
            keys: Vec::new(),
            rows: Vec::new(),
            seen: HashSet::new(),
            objective: Vec::new(),
            fixed: HashMap::new(),
        }
    }

    pub fn col(&mut self, key: ColKey) -> usize {
        if let Some(&c) = self.cols.get(&key) {
            return c;
        }
        let c = self.keys.len();
        self.cols.insert(key.clone(), c);
        self.keys.push(key);
        self.objective.push(Rational::zero());
        c
    }

    pub fn add_objective(&mut self, col: usize, coeff: Rational) {
        self.objective[col] += coeff;
    }

    /// Pins a column to a value; it is substituted out when the LP is built.
    pub fn fix(&mut self, key: ColKey, value: Rational) {
        let c = self.col(key);
        self.fixed.insert(c, value);
    }

    /// Adds a row after merging repeated columns; exact duplicates are dropped.
    pub fn add_row(
        &mut self,
        mut terms: Vec<(usize, Rational)>,
        relation: Relation,
        rhs: Rational,
    ) -> Result<()> {
        terms.sort_by_key(|(c, _)| *c);
        let mut merged: Vec<(usize, Rational)> = Vec::with_capacity(terms.len());
        for (c, a) in terms {
            match merged.last_mut() {
                Some((lc, la)) if *lc == c => *la += a,
                _ => merged.push((c, a)),
            }
        }
        merged.retain(|(_, a)| !a.is_zero());
        let row = (merged, relation, rhs);
        if self.seen.insert(row.clone()) {
            self.rows.push(row);
            self.budget.check("LP rows", self.rows.len() as u128)?;
        }
        Ok(())
    }

    /// Adds linearized rows evaluated along `history`; coordinate `ℓ` (and
    /// its Minkowski copies) is indexed by the first `ℓ+1` entries of
    /// `history`, or all of it when `history` is shorter.
    pub fn add_linearized(&mut self, family: Family, rows: Vec<LinRow>, history: &[usize]) -> Result<()> {
        for row in rows {
            let terms = row
                .terms
                .into_iter()
                .map(|(v, a)| {
                    let len = (v.coord + 1).min(history.len());
                    let key = ColKey::new(family, v.path, v.coord, history[..len].to_vec());
                    (self.col(key), a)
                })
                .collect();
            self.add_row(terms, row.relation, row.rhs)?;
        }
        Ok(())
    }

    /// Substitutes fixed columns and returns the LP with the keys of its
    /// columns. A row that became constant and fails is kept as an
    /// unsatisfiable zero row.
    pub fn build(self) -> Result<(LpProblem<Rational>, Vec<ColKey>)> {
        self.budget.check("LP columns", self.keys.len() as u128)?;
        let mut remap = vec![usize::MAX; self.keys.len()];
        let mut keys = Vec::new();
        for (c, key) in self.keys.into_iter().enumerate() {
            if !self.fixed.contains_key(&c) {
                remap[c] = keys.len();
                keys.push(key);
            }
        }
        if keys.is_empty() {
            keys.push(ColKey::new(Family::Pad, Vec::new(), 0, Vec::new()));
        }
        let mut lp = LpProblem::new(keys.len());
        for (c, v) in self.objective.into_iter().enumerate() {
            if remap[c] != usize::MAX {
                lp.set_objective_coeff(remap[c], v);
            }
        }
        for (terms, relation, mut rhs) in self.rows {
            let mut free = Vec::with_capacity(terms.len());
            for (c, a) in terms {
                match self.fixed.get(&c) {
                    Some(v) => rhs -= a * v,
                    None => free.push((remap[c], a)),
                }
            }
            if free.is_empty() && holds(&Rational::zero(), relation, &rhs) {
                continue;
            }
            lp.add_sparse(&free, relation, rhs)?;
        }
        Ok((lp, keys))
    }

    pub fn solve_feasibility(self) -> Result<bool> {
        let (lp, _) = self.build()?;
        if lp.constraints().is_empty() {
            return Ok(true);
        }
        Ok(lp.feasible()?.is_some())
    }
}
