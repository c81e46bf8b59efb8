//! Stagewise (on-line) problems over history-indexed variables `q_j(r^j)`.
//!
//! Indexing a decision by the history that precedes it makes every LP here
//! non-anticipative by construction. Minkowski copies of coordinate `ℓ` are
//! keyed by `r^ℓ` as well, so a decomposition is committed at the same time
//! as the decision it decomposes.

mod builder;
mod prooflab;

use num_traits::{Signed, Zero};

pub use prooflab::{prooflab_build, ProofLab, ProofLabValues};

use crate::error::{Error, Result};
use crate::lp::{LpSolution, Relation};
use crate::model::{enumerate_histories, Instance, InterimAllocation, OnlinePolicy};
use crate::Rational;
use builder::{ColKey, Family, HistoryLp};

/// `h_{i+1}(Q^i)`; `Infinite` when the stage LP is unbounded (for instance a
/// zero column for coordinate `i+1`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Capacity {
    Finite(Rational),
    Infinite,
}

impl Capacity {
    pub fn admits(&self, demand: &Rational) -> bool {
        match self {
            Capacity::Finite(h) => demand <= h,
            Capacity::Infinite => true,
        }
    }
}

/// The first stage where the sequential test fails: `demand > capacity`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageFailure {
    /// 1-based coordinate `i+1`.
    pub stage: usize,
    pub reward_index: usize,
    pub reward: Rational,
    pub demand: Rational,
    pub capacity: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ImplementabilityCertificate {
    Implementable(OnlinePolicy),
    NotImplementable(StageFailure),
}

impl ImplementabilityCertificate {
    pub fn is_implementable(&self) -> bool {
        matches!(self, ImplementabilityCertificate::Implementable(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OnlineResult {
    /// `Z_on`.
    pub value: Rational,
    pub policy: OnlinePolicy,
}

fn check_shape(instance: &Instance, q: &InterimAllocation) -> Result<()> {
    InterimAllocation::from_levels(&instance.rewards, q.levels().to_vec()).map(|_| ())
}

/// Root decision column `q_{coord+1}` along `history`.
fn root(coord: usize, history: &[usize]) -> ColKey {
    ColKey::new(Family::Q, Vec::new(), coord, history.to_vec())
}

/// Capacity rows for every history of stages `1..=upto`, with a column for
/// every root decision created up front in canonical order.
fn capacity_lp(instance: &Instance, upto: usize) -> Result<HistoryLp> {
    let model = &instance.rewards;
    let n = instance.n();
    let mut lp = HistoryLp::new(instance.budget);
    let mut stages = Vec::with_capacity(upto);
    for j in 1..=upto {
        let hs = enumerate_histories(model, j, instance.budget)?;
        for h in &hs {
            lp.col(root(j - 1, &h.index));
        }
        stages.push(hs);
    }
    for hs in &stages {
        for h in hs {
            let values = model.values(&h.index);
            let rows = crate::constraints::linearize(&instance.constraints, n, &values)?;
            lp.add_linearized(Family::Q, rows, &h.index)?;
        }
    }
    Ok(lp)
}

/// `Σ_{r^j: r_j = k} f(r^j) q_j(r^j)  (rel)  f_j(k) · target_j(k)` for `j ≤ upto`.
fn add_interim_rows(
    lp: &mut HistoryLp,
    instance: &Instance,
    target: &InterimAllocation,
    upto: usize,
    relation: Relation,
    families: &[Family],
) -> Result<()> {
    let model = &instance.rewards;
    for j in 1..=upto {
        let hs = enumerate_histories(model, j, instance.budget)?;
        for (k, level) in target.coordinate(j - 1).iter().enumerate() {
            let mut terms = Vec::new();
            for h in hs.iter().filter(|h| h.index[j - 1] == k) {
                for &fam in families {
                    let c = lp.col(ColKey::new(fam, Vec::new(), j - 1, h.index.clone()));
                    terms.push((c, h.prob.clone()));
                }
            }
            let rhs = model.marginal(j - 1)[k].clone() * level;
            lp.add_row(terms, relation, rhs)?;
        }
    }
    Ok(())
}

/// `h_{i+1}(Q^i)` for candidate reward `support(i)[candidate]` (0-based `i`
/// is the number of committed coordinates). Only the first `i` coordinates
/// of `q` are read. The candidate matters only for reward-dependent systems.
pub fn h_next(
    instance: &Instance,
    i: usize,
    q: &InterimAllocation,
    candidate: usize,
) -> Result<Capacity> {
    let model = &instance.rewards;
    let n = instance.n();
    if i >= n {
        return Err(Error::Structural(format!("stage {i} must be below n = {n}")));
    }
    check_shape(instance, q)?;
    let candidate_value = model
        .support(i)
        .get(candidate)
        .ok_or_else(|| {
            Error::Structural(format!(
                "candidate {candidate} outside support of coordinate {}",
                i + 1
            ))
        })?
        .clone();

    let mut lp = HistoryLp::new(instance.budget);
    for j in 1..=i {
        for h in enumerate_histories(model, j, instance.budget)? {
            lp.col(root(j - 1, &h.index));
        }
    }
    let prefixes = enumerate_histories(model, i, instance.budget)?;
    for h in &prefixes {
        let z = lp.col(root(i, &h.index));
        lp.add_objective(z, h.prob.clone());
        let mut values = model.values(&h.index);
        values.push(candidate_value.clone());
        let rows = crate::constraints::linearize(&instance.constraints, n, &values)?;
        lp.add_linearized(Family::Q, rows, &h.index)?;
    }
    add_interim_rows(&mut lp, instance, q, i, Relation::Ge, &[Family::Q])?;
    let (problem, _) = lp.build()?;
    match problem.solve()? {
        LpSolution::Optimal { value, .. } => Ok(Capacity::Finite(value)),
        LpSolution::Unbounded => Ok(Capacity::Infinite),
        LpSolution::Infeasible => Err(Error::PrefixInfeasible { stage: i }),
    }
}

/// [`h_next`] for every candidate reward of coordinate `i+1`; a single LP
/// serves all candidates when the system ignores rewards.
pub fn h_next_all(instance: &Instance, i: usize, q: &InterimAllocation) -> Result<Vec<Capacity>> {
    let count = instance
        .rewards
        .supports()
        .get(i)
        .map(Vec::len)
        .ok_or_else(|| Error::Structural(format!("stage {i} must be below n = {}", instance.n())))?;
    if instance.constraints.is_reward_dependent() {
        (0..count).map(|k| h_next(instance, i, q, k)).collect()
    } else {
        let h = h_next(instance, i, q, 0)?;
        Ok(vec![h; count])
    }
}

/// The sequential test alone: compares `Q_{i+1}(r)` with `h_{i+1}(Q^i)` stage
/// by stage and returns the first violation. Independent reward models only.
pub fn sequential_failure(instance: &Instance, q: &InterimAllocation) -> Result<Option<StageFailure>> {
    if !instance.rewards.is_independent() {
        return Err(Error::Unsupported(
            "the sequential check is defined for independent reward models".into(),
        ));
    }
    check_shape(instance, q)?;
    for i in 0..instance.n() {
        let caps = h_next_all(instance, i, q)?;
        for (k, cap) in caps.iter().enumerate() {
            let demand = q.level(i, k);
            if let Capacity::Finite(h) = cap {
                if demand > h {
                    return Ok(Some(StageFailure {
                        stage: i + 1,
                        reward_index: k,
                        reward: instance.rewards.value(i, k).clone(),
                        demand: demand.clone(),
                        capacity: h.clone(),
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// Sequential implementability test; on success the witness comes from
/// [`construct_policy`]. A pass without a witness is reported as a
/// structural error, since it would mean the two tests disagree.
pub fn check_implementable_sequential(
    instance: &Instance,
    q: &InterimAllocation,
) -> Result<ImplementabilityCertificate> {
    if let Some(failure) = sequential_failure(instance, q)? {
        return Ok(ImplementabilityCertificate::NotImplementable(failure));
    }
    match construct_policy(instance, q) {
        Ok(policy) => Ok(ImplementabilityCertificate::Implementable(policy)),
        Err(Error::NotImplementable) => Err(Error::Structural(
            "sequential test passed but the direct system is infeasible".into(),
        )),
        Err(e) => Err(e),
    }
}

/// A feasible point of the full system `FP^n`, if any.
pub fn direct_witness(instance: &Instance, q: &InterimAllocation) -> Result<Option<OnlinePolicy>> {
    check_shape(instance, q)?;
    let n = instance.n();
    let mut lp = capacity_lp(instance, n)?;
    add_interim_rows(&mut lp, instance, q, n, Relation::Ge, &[Family::Q])?;
    let (problem, keys) = lp.build()?;
    Ok(problem
        .feasible()?
        .map(|x| policy_from(instance, &keys, &x)))
}

pub fn check_implementable_direct(instance: &Instance, q: &InterimAllocation) -> Result<bool> {
    Ok(direct_witness(instance, q)?.is_some())
}

/// Whether the first `upto` coordinates of `q` are implementable on their own
/// (the system `FP^upto`). `upto = 0` is trivially true.
pub fn check_prefix_implementable(
    instance: &Instance,
    q: &InterimAllocation,
    upto: usize,
) -> Result<bool> {
    check_shape(instance, q)?;
    if upto > instance.n() {
        return Err(Error::Structural(format!(
            "prefix {upto} longer than n = {}",
            instance.n()
        )));
    }
    if upto == 0 {
        return Ok(true);
    }
    let mut lp = capacity_lp(instance, upto)?;
    add_interim_rows(&mut lp, instance, q, upto, Relation::Ge, &[Family::Q])?;
    lp.solve_feasibility()
}

/// A feasible on-line policy whose interim allocation dominates `q`.
pub fn construct_policy(instance: &Instance, q: &InterimAllocation) -> Result<OnlinePolicy> {
    direct_witness(instance, q)?.ok_or(Error::NotImplementable)
}

fn policy_from(instance: &Instance, keys: &[ColKey], x: &[Rational]) -> OnlinePolicy {
    let mut policy = OnlinePolicy::zeros(&instance.rewards);
    for (key, v) in keys.iter().zip(x) {
        if key.family == Family::Q && key.path.is_empty() && key.history.len() == key.coord + 1 {
            if let Some(slot) = policy.stages[key.coord].get_mut(&key.history) {
                *slot = v.clone();
            }
        }
    }
    policy
}

/// The exact on-line optimum: one LP over all history-indexed decisions.
pub fn solve_online(instance: &Instance) -> Result<OnlineResult> {
    let model = &instance.rewards;
    let n = instance.n();
    let mut lp = capacity_lp(instance, n)?;
    for j in 1..=n {
        for h in enumerate_histories(model, j, instance.budget)? {
            let c = lp.col(root(j - 1, &h.index));
            let r = model.value(j - 1, h.index[j - 1]);
            if !r.is_zero() {
                lp.add_objective(c, h.prob.clone() * r);
            }
        }
    }
    let (problem, keys) = lp.build()?;
    match problem.solve()? {
        LpSolution::Optimal { value, x } => Ok(OnlineResult {
            value,
            policy: policy_from(instance, &keys, &x),
        }),
        LpSolution::Unbounded => Err(Error::Unbounded),
        LpSolution::Infeasible => Err(Error::Structural(
            "on-line LP infeasible although the zero policy is feasible".into(),
        )),
    }
}

/// Whether `policy` keeps every prefix feasible along every history.
/// Minkowski systems need an LP for the non-anticipative decomposition.
pub fn policy_feasible(instance: &Instance, policy: &OnlinePolicy) -> Result<bool> {
    let model = &instance.rewards;
    let n = instance.n();
    let mut lp = capacity_lp(instance, n)?;
    for j in 1..=n {
        for h in enumerate_histories(model, j, instance.budget)? {
            let v = policy.get(&h.index).ok_or_else(|| {
                Error::Structural(format!("policy has no decision for history {:?}", h.index))
            })?;
            if v.is_negative() {
                return Ok(false);
            }
            lp.fix(root(j - 1, &h.index), v.clone());
        }
    }
    lp.solve_feasibility()
}

#[cfg(test)]
mod tests;
