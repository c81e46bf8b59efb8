//! The prophet's problem: per-profile optimization with full information.

use std::collections::BTreeMap;

use num_traits::Zero;
use rayon::prelude::*;

use crate::constraints::{linearize, validate_oracle, ConstraintSystem, IndexSet, SubmodularOracle, VarRef};
use crate::error::{Error, Result};
use crate::lp::{LpProblem, LpSolution};
use crate::model::{interim_of_offline, Instance, InterimAllocation, OfflineAllocation};
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OfflineResult {
    /// `Z_off`.
    pub value: Rational,
    pub allocation: OfflineAllocation,
    /// `W*`.
    pub interim: InterimAllocation,
}

/// Solves every positive-probability profile independently and aggregates.
/// Polymatroid systems go through [`greedy_polymatroid`] after validating the
/// oracle; matrix and Minkowski systems through [`profile_lp`].
pub fn solve_offline(instance: &Instance) -> Result<OfflineResult> {
    let model = &instance.rewards;
    let n = instance.n();
    instance.budget.check("profiles", model.profile_count())?;
    let oracle = match &instance.constraints {
        ConstraintSystem::Polymatroid(g) | ConstraintSystem::OnlinePolymatroid(g) => {
            validate_oracle(g, model, instance.budget)?.into_result()?;
            Some(g)
        }
        _ => None,
    };
    let profiles = model.profiles();
    let solved: Vec<(Rational, Vec<Rational>)> = profiles
        .par_iter()
        .map(|p| {
            let values = model.values(&p.index);
            match oracle {
                Some(g) => {
                    let w = greedy_unchecked(&values, g)?;
                    Ok((dot(&values, &w), w))
                }
                None => profile_lp(&instance.constraints, n, &values),
            }
        })
        .collect::<Result<_>>()?;

    let mut value = Rational::zero();
    let mut by_profile = BTreeMap::new();
    for (p, (v, w)) in profiles.into_iter().zip(solved) {
        value += p.prob * v;
        by_profile.insert(p.index, w);
    }
    let allocation = OfflineAllocation { by_profile };
    let interim = interim_of_offline(model, &allocation)?;
    Ok(OfflineResult {
        value,
        allocation,
        interim,
    })
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x.clone() * y).sum()
}

/// `max r·x` over the system at one profile. Returns the optimum and the
/// selection vector (auxiliary Minkowski copies are projected away).
pub fn profile_lp(
    cs: &ConstraintSystem,
    n: usize,
    rewards: &[Rational],
) -> Result<(Rational, Vec<Rational>)> {
    let rows = linearize(cs, n, rewards)?;
    let mut cols: BTreeMap<VarRef, usize> = (0..n).map(|l| (VarRef::root(l), l)).collect();
    for row in &rows {
        for (v, _) in &row.terms {
            let next = cols.len();
            cols.entry(v.clone()).or_insert(next);
        }
    }
    let mut lp = LpProblem::new(cols.len());
    for (l, r) in rewards.iter().enumerate() {
        lp.set_objective_coeff(l, r.clone());
    }
    for row in rows {
        let terms: Vec<(usize, Rational)> =
            row.terms.into_iter().map(|(v, c)| (cols[&v], c)).collect();
        lp.add_sparse(&terms, row.relation, row.rhs)?;
    }
    match lp.solve()? {
        LpSolution::Optimal { value, mut x } => {
            x.truncate(n);
            Ok((value, x))
        }
        LpSolution::Unbounded => Err(Error::Unbounded),
        LpSolution::Infeasible => Err(Error::Structural(
            "per-profile LP infeasible although zero is always feasible".into(),
        )),
    }
}

/// Visiting order: rewards strictly descending, ties to the smaller index.
pub fn greedy_order(rewards: &[Rational]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..rewards.len()).collect();
    order.sort_by(|&a, &b| rewards[b].cmp(&rewards[a]).then(a.cmp(&b)));
    order
}

/// Greedy vertex of the polymatroid of `g(·, rewards)`: each index in
/// [`greedy_order`] receives its marginal gain. The empty prefix counts as 0
/// whatever `g(∅)` is, since the polytope has no row for `∅`. Refuses oracles
/// that are not valid at this profile.
pub fn greedy_polymatroid(rewards: &[Rational], oracle: &SubmodularOracle) -> Result<Vec<Rational>> {
    let n = rewards.len();
    if let Some(v) = crate::constraints::check_profile(oracle, n, rewards)? {
        return Err(Error::InvalidOracle(v.to_string()));
    }
    greedy_unchecked(rewards, oracle)
}

fn greedy_unchecked(rewards: &[Rational], oracle: &SubmodularOracle) -> Result<Vec<Rational>> {
    let n = rewards.len();
    let mut w = vec![Rational::zero(); n];
    let mut prefix = IndexSet::EMPTY;
    let mut previous = Rational::zero();
    for l in greedy_order(rewards) {
        prefix = prefix.with(l);
        let current = oracle.eval(n, prefix, rewards)?;
        w[l] = current.clone() - &previous;
        previous = current;
    }
    Ok(w)
}
