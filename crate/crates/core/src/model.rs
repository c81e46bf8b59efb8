//! Reward models, histories, instances and the interim/ex-post conversions.
//!
//! Supports are stored per coordinate; histories and profiles are addressed by
//! support indices, so `vec![0, 2]` is the stage-2 history whose first reward
//! is the first support value of coordinate 1 and whose second reward is the
//! third support value of coordinate 2. Index vectors compare
//! lexicographically, which is the canonical enumeration order everywhere.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::constraints::ConstraintSystem;
use crate::error::{Error, Result};
use crate::Rational;

pub const DEFAULT_BUDGET: usize = 100_000;
pub const BUDGET_ENV: &str = "PROPHET_LP_BUDGET";

/// Upper bound on enumerated LP variables (profiles, histories, subset rows).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget(pub usize);

impl Default for Budget {
    fn default() -> Self {
        Budget(DEFAULT_BUDGET)
    }
}

impl Budget {
    /// Reads the override from `PROPHET_LP_BUDGET`, falling back to the default.
    pub fn from_env() -> Result<Self> {
        match std::env::var(BUDGET_ENV) {
            Ok(text) => text
                .trim()
                .parse()
                .map(Budget)
                .map_err(|_| Error::Parse(format!("{BUDGET_ENV}={text:?} is not a count"))),
            Err(_) => Ok(Budget::default()),
        }
    }

    pub fn check(&self, what: &str, count: u128) -> Result<()> {
        if count > self.0 as u128 {
            Err(Error::Budget {
                what: what.to_string(),
                count,
                limit: self.0,
            })
        } else {
            Ok(())
        }
    }
}

/// A truncated reward vector `r^j` (by support index) with its probability.
/// A full-length history is a profile.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct History {
    pub index: Vec<usize>,
    pub prob: Rational,
}

pub type Profile = History;

impl History {
    pub fn stage(&self) -> usize {
        self.index.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Law {
    Independent,
    /// Positive-mass profiles (support indices), sorted lexicographically.
    Joint(Vec<(Vec<usize>, Rational)>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewardModel {
    law: Law,
    supports: Vec<Vec<Rational>>,
    marginals: Vec<Vec<Rational>>,
}

fn check_prob_sum(probs: impl Iterator<Item = Rational>, what: &str) -> Result<()> {
    let total: Rational = probs.sum();
    if total != Rational::one() {
        return Err(Error::Domain(format!(
            "{what} probabilities sum to {total}, expected 1"
        )));
    }
    Ok(())
}

impl RewardModel {
    /// Independent rewards from per-coordinate `(value, prob)` lists.
    /// Zero-probability values are dropped.
    pub fn independent(marginals: Vec<Vec<(Rational, Rational)>>) -> Result<Self> {
        if marginals.is_empty() {
            return Err(Error::Structural("reward model needs n >= 1".into()));
        }
        let mut supports = Vec::with_capacity(marginals.len());
        let mut probs = Vec::with_capacity(marginals.len());
        for (j, marginal) in marginals.into_iter().enumerate() {
            let coord = j + 1;
            check_prob_sum(marginal.iter().map(|(_, p)| p.clone()), &format!("coordinate {coord}"))?;
            let mut values = Vec::new();
            let mut ps = Vec::new();
            for (v, p) in marginal {
                if v.is_negative() {
                    return Err(Error::Domain(format!("coordinate {coord}: negative reward {v}")));
                }
                if p.is_negative() {
                    return Err(Error::Domain(format!("coordinate {coord}: negative probability {p}")));
                }
                if values.contains(&v) {
                    return Err(Error::Structural(format!(
                        "coordinate {coord}: duplicate reward value {v}"
                    )));
                }
                if p.is_zero() {
                    continue;
                }
                values.push(v);
                ps.push(p);
            }
            supports.push(values);
            probs.push(ps);
        }
        Ok(RewardModel {
            law: Law::Independent,
            supports,
            marginals: probs,
        })
    }

    /// Correlated rewards from a joint table of `(profile, prob)` rows.
    /// Zero-probability rows are dropped; coordinate supports are the distinct
    /// values in order of first appearance.
    pub fn joint(table: Vec<(Vec<Rational>, Rational)>) -> Result<Self> {
        let n = table
            .first()
            .map(|(p, _)| p.len())
            .ok_or_else(|| Error::Structural("joint table is empty".into()))?;
        if n == 0 {
            return Err(Error::Structural("reward model needs n >= 1".into()));
        }
        check_prob_sum(table.iter().map(|(_, p)| p.clone()), "joint table")?;
        let mut supports: Vec<Vec<Rational>> = vec![Vec::new(); n];
        let mut rows: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
        for (profile, p) in table {
            if profile.len() != n {
                return Err(Error::Structural(format!(
                    "joint profile has length {}, expected {n}",
                    profile.len()
                )));
            }
            if p.is_negative() {
                return Err(Error::Domain(format!("negative probability {p}")));
            }
            if let Some(v) = profile.iter().find(|v| v.is_negative()) {
                return Err(Error::Domain(format!("negative reward {v}")));
            }
            if p.is_zero() {
                continue;
            }
            let index: Vec<usize> = profile
                .into_iter()
                .zip(supports.iter_mut())
                .map(|(v, support)| match support.iter().position(|s| *s == v) {
                    Some(k) => k,
                    None => {
                        support.push(v);
                        support.len() - 1
                    }
                })
                .collect();
            if rows.insert(index, p).is_some() {
                return Err(Error::Structural("duplicate profile in joint table".into()));
            }
        }
        let mut marginals: Vec<Vec<Rational>> = supports
            .iter()
            .map(|s| vec![Rational::zero(); s.len()])
            .collect();
        for (index, p) in &rows {
            for (j, &k) in index.iter().enumerate() {
                marginals[j][k] += p;
            }
        }
        Ok(RewardModel {
            law: Law::Joint(rows.into_iter().collect()),
            supports,
            marginals,
        })
    }

    pub fn n(&self) -> usize {
        self.supports.len()
    }

    pub fn is_independent(&self) -> bool {
        matches!(self.law, Law::Independent)
    }

    pub fn support(&self, j: usize) -> &[Rational] {
        &self.supports[j]
    }

    pub fn supports(&self) -> &[Vec<Rational>] {
        &self.supports
    }

    /// Marginal probabilities `f_j(r_j)`, aligned with [`support`](Self::support).
    pub fn marginal(&self, j: usize) -> &[Rational] {
        &self.marginals[j]
    }

    pub fn value(&self, j: usize, k: usize) -> &Rational {
        &self.supports[j][k]
    }

    pub fn values(&self, index: &[usize]) -> Vec<Rational> {
        index
            .iter()
            .enumerate()
            .map(|(j, &k)| self.supports[j][k].clone())
            .collect()
    }

    /// Number of positive-probability histories of stage `j` (0 ≤ j ≤ n).
    pub fn history_count(&self, j: usize) -> u128 {
        match &self.law {
            Law::Independent => self.supports[..j].iter().map(|s| s.len() as u128).product(),
            Law::Joint(rows) => {
                let mut seen: Vec<&[usize]> = rows.iter().map(|(idx, _)| &idx[..j]).collect();
                seen.dedup();
                seen.len() as u128
            }
        }
    }

    pub fn profile_count(&self) -> u128 {
        self.history_count(self.n())
    }

    /// Histories of stage `j` in canonical order; `j = 0` yields the single
    /// empty history with probability one.
    pub fn histories(&self, j: usize) -> Vec<History> {
        assert!(j <= self.n(), "stage {j} beyond n = {}", self.n());
        match &self.law {
            Law::Independent => {
                let mut out = vec![History {
                    index: Vec::new(),
                    prob: Rational::one(),
                }];
                for coord in 0..j {
                    let probs = &self.marginals[coord];
                    out = out
                        .into_iter()
                        .flat_map(|h| {
                            probs.iter().enumerate().map(move |(k, p)| {
                                let mut index = h.index.clone();
                                index.push(k);
                                History {
                                    index,
                                    prob: h.prob.clone() * p,
                                }
                            })
                        })
                        .collect();
                }
                out
            }
            Law::Joint(rows) => {
                let mut acc: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
                for (idx, p) in rows {
                    *acc.entry(idx[..j].to_vec()).or_insert_with(Rational::zero) += p;
                }
                acc.into_iter()
                    .map(|(index, prob)| History { index, prob })
                    .collect()
            }
        }
    }

    pub fn profiles(&self) -> Vec<Profile> {
        self.histories(self.n())
    }

    /// Marginal model of the first `i` coordinates.
    pub fn prefix_model(&self, i: usize) -> Result<RewardModel> {
        if i == 0 || i > self.n() {
            return Err(Error::Structural(format!(
                "prefix length {i} outside 1..={}",
                self.n()
            )));
        }
        let law = match &self.law {
            Law::Independent => Law::Independent,
            Law::Joint(_) => Law::Joint(
                self.histories(i)
                    .into_iter()
                    .map(|h| (h.index, h.prob))
                    .collect(),
            ),
        };
        // Every support value has positive mass, so marginalizing keeps the supports.
        Ok(RewardModel {
            law,
            supports: self.supports[..i].to_vec(),
            marginals: self.marginals[..i].to_vec(),
        })
    }

    /// For joint models: whether the table equals the product of its marginals.
    /// Independent models are products by definition.
    pub fn is_product(&self) -> bool {
        match &self.law {
            Law::Independent => true,
            Law::Joint(rows) => {
                let table: BTreeMap<&[usize], &Rational> =
                    rows.iter().map(|(i, p)| (i.as_slice(), p)).collect();
                let product = RewardModel {
                    law: Law::Independent,
                    supports: self.supports.clone(),
                    marginals: self.marginals.clone(),
                };
                product.profiles().iter().all(|h| {
                    let joint = table
                        .get(h.index.as_slice())
                        .map_or_else(Rational::zero, |p| (*p).clone());
                    joint == h.prob
                })
            }
        }
    }

    /// The raw joint table (support-index profiles and probabilities), if correlated.
    pub fn joint_rows(&self) -> Option<&[(Vec<usize>, Rational)]> {
        match &self.law {
            Law::Joint(rows) => Some(rows),
            Law::Independent => None,
        }
    }
}

/// Enumerates positive-probability histories of stage `j`, 0 ≤ j ≤ n
/// (stage 0 is the empty history).
pub fn enumerate_histories(model: &RewardModel, j: usize, budget: Budget) -> Result<Vec<History>> {
    if j > model.n() {
        return Err(Error::Structural(format!(
            "stage {j} outside 0..={}",
            model.n()
        )));
    }
    budget.check(&format!("stage-{j} histories"), model.history_count(j))?;
    Ok(model.histories(j))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub rewards: RewardModel,
    pub constraints: ConstraintSystem,
    pub budget: Budget,
}

impl Instance {
    pub fn new(rewards: RewardModel, constraints: ConstraintSystem) -> Result<Self> {
        Self::with_budget(rewards, constraints, Budget::default())
    }

    pub fn with_budget(
        rewards: RewardModel,
        constraints: ConstraintSystem,
        budget: Budget,
    ) -> Result<Self> {
        let n = rewards.n();
        constraints.validate(n)?;
        let instance = Instance {
            rewards,
            constraints,
            budget,
        };
        instance.check_budget()?;
        Ok(instance)
    }

    pub fn n(&self) -> usize {
        self.rewards.n()
    }

    fn check_budget(&self) -> Result<()> {
        let n = self.n();
        self.budget.check("profiles", self.rewards.profile_count())?;
        let histories: u128 = (1..=n).map(|j| self.rewards.history_count(j)).sum();
        let copies = 1 + self.constraints.coordinate_copies() as u128;
        self.budget.check("history-indexed LP variables", histories * copies)?;
        if self.constraints.has_polymatroid() {
            let subsets = 1u128.checked_shl(n as u32).unwrap_or(u128::MAX);
            self.budget.check(
                "polymatroid subset rows",
                self.rewards.profile_count().saturating_mul(subsets),
            )?;
        }
        Ok(())
    }
}

/// `Q_j(r_j)` for every coordinate and support value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InterimAllocation {
    levels: Vec<Vec<Rational>>,
}

impl InterimAllocation {
    pub fn zeros(model: &RewardModel) -> Self {
        InterimAllocation {
            levels: model
                .supports()
                .iter()
                .map(|s| vec![Rational::zero(); s.len()])
                .collect(),
        }
    }

    /// Levels indexed `[coordinate][support index]`; shape must match `model`.
    pub fn from_levels(model: &RewardModel, levels: Vec<Vec<Rational>>) -> Result<Self> {
        if levels.len() != model.n() {
            return Err(Error::Structural(format!(
                "interim allocation has {} coordinates, model has {}",
                levels.len(),
                model.n()
            )));
        }
        for (j, row) in levels.iter().enumerate() {
            if row.len() != model.support(j).len() {
                return Err(Error::Structural(format!(
                    "coordinate {}: {} levels for a support of size {}",
                    j + 1,
                    row.len(),
                    model.support(j).len()
                )));
            }
            if let Some(v) = row.iter().find(|v| v.is_negative()) {
                return Err(Error::Domain(format!(
                    "coordinate {}: negative interim level {v}",
                    j + 1
                )));
            }
        }
        Ok(InterimAllocation { levels })
    }

    pub fn n(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, j: usize, k: usize) -> &Rational {
        &self.levels[j][k]
    }

    pub fn coordinate(&self, j: usize) -> &[Rational] {
        &self.levels[j]
    }

    pub fn levels(&self) -> &[Vec<Rational>] {
        &self.levels
    }

    /// Pointwise `self ≥ other`.
    pub fn dominates(&self, other: &InterimAllocation) -> bool {
        self.levels.len() == other.levels.len()
            && self
                .levels
                .iter()
                .zip(&other.levels)
                .all(|(a, b)| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x >= y))
    }

    /// `Σ_j Σ_{r_j} f_j(r_j) · r_j · Q_j(r_j)`.
    pub fn expected_value(&self, model: &RewardModel) -> Rational {
        let mut total = Rational::zero();
        for j in 0..self.n() {
            for (k, q) in self.levels[j].iter().enumerate() {
                total += model.marginal(j)[k].clone() * model.value(j, k) * q;
            }
        }
        total
    }
}

/// Pointwise `λ·Q` for `λ ∈ [0, 1]`.
pub fn scale_interim(q: &InterimAllocation, lambda: &Rational) -> Result<InterimAllocation> {
    if lambda.is_negative() || *lambda > Rational::one() {
        return Err(Error::Domain(format!("scale {lambda} outside [0, 1]")));
    }
    Ok(InterimAllocation {
        levels: q
            .levels
            .iter()
            .map(|row| row.iter().map(|v| v.clone() * lambda).collect())
            .collect(),
    })
}

/// History-indexed on-line decisions `q_j(r^j)`; `stages[j]` holds the
/// decisions of coordinate `j + 1`, keyed by histories of length `j + 1`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OnlinePolicy {
    pub stages: Vec<BTreeMap<Vec<usize>, Rational>>,
}

impl OnlinePolicy {
    pub fn zeros(model: &RewardModel) -> Self {
        OnlinePolicy {
            stages: (1..=model.n())
                .map(|j| {
                    model
                        .histories(j)
                        .into_iter()
                        .map(|h| (h.index, Rational::zero()))
                        .collect()
                })
                .collect(),
        }
    }

    pub fn get(&self, history: &[usize]) -> Option<&Rational> {
        let j = history.len().checked_sub(1)?;
        self.stages.get(j)?.get(history)
    }

    fn lookup(&self, history: &[usize]) -> Result<&Rational> {
        self.get(history).ok_or_else(|| {
            Error::Structural(format!("policy has no decision for history {history:?}"))
        })
    }

    /// The decision vector `(q_1(r^1), …, q_j(r^j))` along `history`.
    pub fn prefix_vector(&self, history: &[usize]) -> Result<Vec<Rational>> {
        (1..=history.len())
            .map(|l| self.lookup(&history[..l]).cloned())
            .collect()
    }

    /// `Σ_j E[r_j q_j(r^j)]`.
    pub fn expected_value(&self, model: &RewardModel) -> Result<Rational> {
        let mut total = Rational::zero();
        for j in 1..=model.n() {
            for h in model.histories(j) {
                let q = self.lookup(&h.index)?;
                total += h.prob.clone() * model.value(j - 1, h.index[j - 1]) * q;
            }
        }
        Ok(total)
    }
}

/// Profile-indexed off-line decisions `w(r^n)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OfflineAllocation {
    pub by_profile: BTreeMap<Vec<usize>, Vec<Rational>>,
}

impl OfflineAllocation {
    pub fn get(&self, profile: &[usize]) -> Option<&[Rational]> {
        self.by_profile.get(profile).map(Vec::as_slice)
    }
}

fn divide_by_marginals(model: &RewardModel, mut sums: Vec<Vec<Rational>>) -> InterimAllocation {
    for (j, row) in sums.iter_mut().enumerate() {
        for (k, v) in row.iter_mut().enumerate() {
            *v = v.clone() / &model.marginal(j)[k];
        }
    }
    InterimAllocation { levels: sums }
}

/// `Q_j(r_j) = E[q_j(r^j) | r_j]`.
pub fn interim_of_policy(model: &RewardModel, policy: &OnlinePolicy) -> Result<InterimAllocation> {
    let mut sums = InterimAllocation::zeros(model).levels;
    for j in 1..=model.n() {
        for h in model.histories(j) {
            let q = policy.lookup(&h.index)?;
            sums[j - 1][h.index[j - 1]] += h.prob.clone() * q;
        }
    }
    Ok(divide_by_marginals(model, sums))
}

/// `W_i(r_i) = E[w_i(r^n) | r_i]`.
pub fn interim_of_offline(model: &RewardModel, w: &OfflineAllocation) -> Result<InterimAllocation> {
    let n = model.n();
    let mut sums = InterimAllocation::zeros(model).levels;
    for p in model.profiles() {
        let alloc = w.get(&p.index).ok_or_else(|| {
            Error::Structural(format!("off-line allocation missing profile {:?}", p.index))
        })?;
        if alloc.len() != n {
            return Err(Error::Structural(format!(
                "allocation for profile {:?} has length {}",
                p.index,
                alloc.len()
            )));
        }
        for (i, wi) in alloc.iter().enumerate() {
            sums[i][p.index[i]] += p.prob.clone() * wi;
        }
    }
    Ok(divide_by_marginals(model, sums))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{int, rat};

    pub(crate) fn e1_rewards() -> RewardModel {
        RewardModel::independent(vec![
            vec![(int(1), int(1))],
            vec![(int(0), rat(1, 2)), (int(2), rat(1, 2))],
        ])
        .unwrap()
    }

    fn e3_rewards() -> RewardModel {
        RewardModel::joint(vec![
            (vec![int(1), int(2)], rat(1, 2)),
            (vec![int(1), int(0)], rat(1, 2)),
        ])
        .unwrap()
    }

    #[test]
    fn product_history_count() {
        let m = RewardModel::independent(vec![
            vec![(int(0), rat(1, 2)), (int(1), rat(1, 2))],
            vec![(int(0), rat(1, 3)), (int(1), rat(1, 3)), (int(2), rat(1, 3))],
        ])
        .unwrap();
        let hs = enumerate_histories(&m, 2, Budget::default()).unwrap();
        assert_eq!(hs.len(), 6);
        assert_eq!(hs.iter().map(|h| h.prob.clone()).sum::<Rational>(), int(1));
        assert_eq!(hs[0].index, vec![0, 0]);
        assert_eq!(hs[5].index, vec![1, 2]);
    }

    #[test]
    fn singleton_support() {
        let m = RewardModel::independent(vec![vec![(int(5), int(1))]]).unwrap();
        let hs = enumerate_histories(&m, 1, Budget::default()).unwrap();
        assert_eq!(hs, vec![History { index: vec![0], prob: int(1) }]);
    }

    #[test]
    fn joint_marginalization() {
        let m = e3_rewards();
        let hs = enumerate_histories(&m, 1, Budget::default()).unwrap();
        assert_eq!(hs.len(), 1);
        assert_eq!(hs[0].prob, int(1));
        assert_eq!(m.support(1), &[int(2), int(0)]);
        // profiles sorted by support index: (1,2) before (1,0)
        let ps = m.profiles();
        assert_eq!(ps[0].index, vec![0, 0]);
        assert_eq!(m.values(&ps[1].index), vec![int(1), int(0)]);
    }

    #[test]
    fn enumeration_is_deterministic() {
        let m = e3_rewards();
        assert_eq!(m.histories(2), m.histories(2));
        let e = e1_rewards();
        assert_eq!(e.histories(2), e.histories(2));
    }

    #[test]
    fn budget_refusal_names_count() {
        let m = RewardModel::independent(vec![vec![(int(0), rat(1, 2)), (int(1), rat(1, 2))]; 4])
            .unwrap();
        match enumerate_histories(&m, 4, Budget(10)) {
            Err(Error::Budget { count, limit, .. }) => {
                assert_eq!(count, 16);
                assert_eq!(limit, 10);
            }
            other => panic!("expected budget refusal, got {other:?}"),
        }
    }

    #[test]
    fn ingestion_rejects_bad_distributions() {
        assert!(RewardModel::independent(vec![vec![(int(1), rat(1, 2))]]).is_err());
        assert!(RewardModel::independent(vec![vec![(int(-1), int(1))]]).is_err());
        assert!(
            RewardModel::independent(vec![vec![(int(1), rat(1, 2)), (int(1), rat(1, 2))]])
                .is_err()
        );
        assert!(RewardModel::joint(vec![(vec![int(1)], rat(1, 3))]).is_err());
        assert!(RewardModel::joint(vec![
            (vec![int(1)], rat(1, 2)),
            (vec![int(1)], rat(1, 2))
        ])
        .is_err());
    }

    #[test]
    fn zero_mass_outcomes_are_dropped() {
        let m = RewardModel::independent(vec![vec![(int(1), int(1)), (int(7), int(0))]]).unwrap();
        assert_eq!(m.support(0), &[int(1)]);
        let j = RewardModel::joint(vec![
            (vec![int(1), int(2)], int(1)),
            (vec![int(3), int(4)], int(0)),
        ])
        .unwrap();
        assert_eq!(j.profile_count(), 1);
        assert_eq!(j.support(0), &[int(1)]);
    }

    #[test]
    fn constant_policy_has_constant_interim() {
        let m = e1_rewards();
        let c = rat(2, 7);
        let mut policy = OnlinePolicy::zeros(&m);
        for stage in &mut policy.stages {
            for v in stage.values_mut() {
                *v = c.clone();
            }
        }
        let q = interim_of_policy(&m, &policy).unwrap();
        assert!(q.levels().iter().flatten().all(|v| *v == c));
        let zero = interim_of_policy(&m, &OnlinePolicy::zeros(&m)).unwrap();
        assert_eq!(zero, InterimAllocation::zeros(&m));
    }

    #[test]
    fn e1_parametric_policy_interim() {
        let m = e1_rewards();
        let t = rat(1, 3);
        let mut policy = OnlinePolicy::zeros(&m);
        policy.stages[0].insert(vec![0], t.clone());
        policy.stages[1].insert(vec![0, 0], int(0));
        policy.stages[1].insert(vec![0, 1], int(1) - &t);
        let q = interim_of_policy(&m, &policy).unwrap();
        assert_eq!(q.level(0, 0), &t);
        assert_eq!(q.level(1, 1), &(int(1) - &t));
        assert_eq!(q.level(1, 0), &int(0));
    }

    #[test]
    fn missing_history_is_structural() {
        let m = e1_rewards();
        let mut policy = OnlinePolicy::zeros(&m);
        policy.stages[1].remove(&vec![0, 1]);
        assert!(matches!(interim_of_policy(&m, &policy), Err(Error::Structural(_))));
    }

    #[test]
    fn offline_interim_on_e1_and_e3() {
        // E1 off-line optimum: w(1,0) = (1,0), w(1,2) = (0,1).
        let m = e1_rewards();
        let mut w = OfflineAllocation::default();
        w.by_profile.insert(vec![0, 0], vec![int(1), int(0)]);
        w.by_profile.insert(vec![0, 1], vec![int(0), int(1)]);
        let big_w = interim_of_offline(&m, &w).unwrap();
        assert_eq!(big_w.level(0, 0), &rat(1, 2));
        assert_eq!(big_w.level(1, 1), &int(1));
        assert_eq!(big_w.level(1, 0), &int(0));

        // E3: profiles (1,2) and (1,0), support of coordinate 2 is [2, 0].
        let j = e3_rewards();
        let mut w = OfflineAllocation::default();
        w.by_profile.insert(vec![0, 0], vec![int(0), int(1)]);
        w.by_profile.insert(vec![0, 1], vec![int(1), int(0)]);
        let big_w = interim_of_offline(&j, &w).unwrap();
        assert_eq!(big_w.level(0, 0), &rat(1, 2));
        assert_eq!(big_w.level(1, 0), &int(1));
    }

    #[test]
    fn deterministic_model_offline_interim_is_identity() {
        let m = RewardModel::independent(vec![vec![(int(3), int(1))], vec![(int(4), int(1))]])
            .unwrap();
        let mut w = OfflineAllocation::default();
        w.by_profile.insert(vec![0, 0], vec![rat(1, 3), rat(2, 3)]);
        let big_w = interim_of_offline(&m, &w).unwrap();
        assert_eq!(big_w.levels(), &[vec![rat(1, 3)], vec![rat(2, 3)]]);
    }

    #[test]
    fn scaling_interim() {
        let m = e1_rewards();
        let w = InterimAllocation::from_levels(&m, vec![vec![rat(1, 2)], vec![int(0), int(1)]])
            .unwrap();
        assert_eq!(scale_interim(&w, &int(0)).unwrap(), InterimAllocation::zeros(&m));
        assert_eq!(scale_interim(&w, &int(1)).unwrap(), w);
        let half = scale_interim(&w, &rat(1, 2)).unwrap();
        assert_eq!(half.level(0, 0), &rat(1, 4));
        assert_eq!(half.level(1, 1), &rat(1, 2));
        assert!(matches!(scale_interim(&w, &rat(3, 2)), Err(Error::Domain(_))));
        assert!(matches!(scale_interim(&w, &rat(-1, 2)), Err(Error::Domain(_))));
    }

    #[test]
    fn product_detection() {
        // r1 is deterministic in E3, so its table factorizes.
        assert!(e3_rewards().is_product());
        let correlated = RewardModel::joint(vec![
            (vec![int(1), int(2)], rat(1, 2)),
            (vec![int(2), int(0)], rat(1, 2)),
        ])
        .unwrap();
        assert!(!correlated.is_product());
        let product = RewardModel::joint(vec![
            (vec![int(0), int(0)], rat(1, 4)),
            (vec![int(0), int(1)], rat(1, 4)),
            (vec![int(1), int(0)], rat(1, 4)),
            (vec![int(1), int(1)], rat(1, 4)),
        ])
        .unwrap();
        assert!(product.is_product());
    }
}
