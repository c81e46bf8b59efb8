//! Set functions `g(I, r^I)` and their brute-force validity checks.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::model::{Budget, RewardModel};
use crate::Rational;

/// Subset of `{0, …, n-1}` as a bit mask (bit `ℓ` is coordinate `ℓ + 1`).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSet(u32);

pub const MAX_GROUND: usize = 31;

impl IndexSet {
    pub const EMPTY: IndexSet = IndexSet(0);

    pub fn from_bits(bits: u32) -> Self {
        IndexSet(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    /// `{0, …, n-1}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_GROUND, "ground set too large");
        IndexSet(((1u64 << n) - 1) as u32)
    }

    pub fn singleton(i: usize) -> Self {
        IndexSet(1 << i)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(it: I) -> Self {
        IndexSet(it.into_iter().fold(0, |acc, i| acc | (1 << i)))
    }

    pub fn contains(self, i: usize) -> bool {
        i < 32 && self.0 & (1 << i) != 0
    }

    pub fn with(self, i: usize) -> Self {
        IndexSet(self.0 | (1 << i))
    }

    pub fn without(self, i: usize) -> Self {
        IndexSet(self.0 & !(1 << i))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: Self) -> Self {
        IndexSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        IndexSet(self.0 & other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    /// One past the largest member (0 for the empty set).
    pub fn span(self) -> usize {
        32 - self.0.leading_zeros() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&i| self.0 & (1 << i) != 0)
    }

    /// All subsets of `{0, …, n-1}` in increasing mask order.
    pub fn all_subsets(n: usize) -> impl Iterator<Item = IndexSet> {
        assert!(n <= MAX_GROUND, "ground set too large");
        (0..(1u64 << n)).map(|b| IndexSet(b as u32))
    }

    /// All subsets of `self`, the empty set first.
    pub fn subsets(self) -> impl Iterator<Item = IndexSet> {
        let full = self.0;
        let mut next = Some(0u32);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == full {
                None
            } else {
                Some((cur.wrapping_sub(full)) & full)
            };
            Some(IndexSet(cur))
        })
    }
}

impl fmt::Display for IndexSet {
    /// 1-based, e.g. `{1,3}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.iter().map(|i| (i + 1).to_string()).collect();
        write!(f, "{{{}}}", items.join(","))
    }
}

/// What an explicit table's reward key ranges over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TableKeying {
    /// Reward-independent: key is `(I, [])`.
    Static,
    /// On-line: key is `(I, r^I)` with the rewards of `I` in increasing index order.
    OnSubset,
    /// Keyed on the full profile `(I, r^n)`; only usable for validation, since
    /// nothing guarantees the value ignores rewards outside `I`.
    OnProfile,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleTable {
    pub keying: TableKeying,
    pub entries: BTreeMap<(IndexSet, Vec<Rational>), Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubmodularOracle {
    Table(OracleTable),
    /// `min(1 + Σ_{ℓ∈I} r_ℓ, B)`.
    G1 { cap: Rational },
    /// `n` if some `r_ℓ ≥ T` in `I`, else `|I|`.
    G2 { threshold: Rational },
    /// `|I|` if every `r_ℓ ≥ T` in `I`, else `n`.
    G3 { threshold: Rational },
    /// `min(|I|, rank)`.
    UniformRank { rank: Rational },
    /// `g(I ∪ {e}, r^I, r̂_e) − g({e}, r̂_e)` over the ground set `{0, …, e-1}`.
    Contraction {
        base: Box<SubmodularOracle>,
        base_dim: usize,
        element: usize,
        reward: Rational,
    },
}

impl SubmodularOracle {
    /// Whether the value can change with rewards.
    pub fn reward_dependent(&self) -> bool {
        match self {
            SubmodularOracle::Table(t) => t.keying != TableKeying::Static,
            SubmodularOracle::UniformRank { .. } => false,
            SubmodularOracle::Contraction { base, .. } => base.reward_dependent(),
            SubmodularOracle::G1 { .. }
            | SubmodularOracle::G2 { .. }
            | SubmodularOracle::G3 { .. } => true,
        }
    }

    /// `g(I, r)` where `rewards` is a prefix or full reward vector covering every
    /// member of `set`; entries outside `set` are ignored except by
    /// profile-keyed tables, which need the full length-`n` profile.
    pub fn eval(&self, n: usize, set: IndexSet, rewards: &[Rational]) -> Result<Rational> {
        if set.span() > n {
            return Err(Error::Structural(format!("set {set} outside ground set of size {n}")));
        }
        let needs_rewards = self.reward_dependent();
        if needs_rewards && rewards.len() < set.span() {
            return Err(Error::Structural(format!(
                "rewards of length {} do not cover set {set}",
                rewards.len()
            )));
        }
        let card = || Rational::from_integer(set.len().into());
        let ground = || Rational::from_integer(n.into());
        Ok(match self {
            SubmodularOracle::G1 { cap } => {
                let total = set
                    .iter()
                    .fold(Rational::one(), |acc, l| acc + &rewards[l]);
                total.min(cap.clone())
            }
            SubmodularOracle::G2 { threshold } => {
                if set.iter().any(|l| rewards[l] >= *threshold) {
                    ground()
                } else {
                    card()
                }
            }
            SubmodularOracle::G3 { threshold } => {
                if set.iter().all(|l| rewards[l] >= *threshold) {
                    card()
                } else {
                    ground()
                }
            }
            SubmodularOracle::UniformRank { rank } => card().min(rank.clone()),
            SubmodularOracle::Table(table) => {
                let key_rewards = match table.keying {
                    TableKeying::Static => Vec::new(),
                    TableKeying::OnSubset => set.iter().map(|l| rewards[l].clone()).collect(),
                    TableKeying::OnProfile => {
                        if rewards.len() != n {
                            return Err(Error::Structural(format!(
                                "profile-keyed table needs a full profile of length {n}"
                            )));
                        }
                        rewards.to_vec()
                    }
                };
                table
                    .entries
                    .get(&(set, key_rewards))
                    .cloned()
                    .ok_or_else(|| {
                        Error::Structural(format!("oracle table has no entry for set {set}"))
                    })?
            }
            SubmodularOracle::Contraction {
                base,
                base_dim,
                element,
                reward,
            } => {
                if set.span() > *element {
                    return Err(Error::Structural(format!(
                        "contracted oracle lives on the first {element} coordinates"
                    )));
                }
                let mut ext = vec![Rational::zero(); (*element + 1).max(rewards.len())];
                for (slot, r) in ext.iter_mut().zip(rewards) {
                    *slot = r.clone();
                }
                ext[*element] = reward.clone();
                let with = base.eval(*base_dim, set.with(*element), &ext)?;
                let alone = base.eval(*base_dim, IndexSet::singleton(*element), &ext)?;
                with - alone
            }
        })
    }

    /// `g(I, r^I)` from an explicit assignment on exactly the members of `set`
    /// (empty for reward-independent oracles).
    pub fn eval_assignment(
        &self,
        n: usize,
        set: IndexSet,
        assignment: &[(usize, Rational)],
    ) -> Result<Rational> {
        let keys = IndexSet::from_indices(assignment.iter().map(|(i, _)| *i));
        let expected = if self.reward_dependent() { set } else { IndexSet::EMPTY };
        if keys != expected || assignment.len() != expected.len() {
            return Err(Error::Structural(format!(
                "assignment keys {keys} do not match {expected}"
            )));
        }
        if let SubmodularOracle::Table(t) = self {
            if t.keying == TableKeying::OnProfile {
                return Err(Error::Structural(
                    "profile-keyed table cannot be evaluated on a partial assignment".into(),
                ));
            }
        }
        let mut rewards = vec![Rational::zero(); set.span()];
        for (i, v) in assignment {
            rewards[*i] = v.clone();
        }
        self.eval(n, set, &rewards)
    }
}

/// The first property violation found by [`validate_oracle`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Negative {
        set: IndexSet,
        profile: Vec<Rational>,
        value: Rational,
    },
    NotMonotone {
        smaller: IndexSet,
        larger: IndexSet,
        profile: Vec<Rational>,
        smaller_value: Rational,
        larger_value: Rational,
    },
    /// `g(I) + g(J) < g(I ∪ J) + g(I ∩ J)`.
    NotSubmodular {
        first: IndexSet,
        second: IndexSet,
        profile: Vec<Rational>,
        lhs: Rational,
        rhs: Rational,
    },
    /// Two profiles agreeing on `set` give different values.
    NotOnline {
        set: IndexSet,
        profile: Vec<Rational>,
        other_profile: Vec<Rational>,
        value: Rational,
        other_value: Rational,
    },
}

fn show(profile: &[Rational]) -> String {
    let items: Vec<String> = profile.iter().map(ToString::to_string).collect();
    format!("({})", items.join(","))
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Negative { set, profile, value } => {
                write!(f, "g({set}) = {value} < 0 at profile {}", show(profile))
            }
            Violation::NotMonotone {
                smaller,
                larger,
                profile,
                smaller_value,
                larger_value,
            } => write!(
                f,
                "g({smaller}) = {smaller_value} > g({larger}) = {larger_value} at profile {}",
                show(profile)
            ),
            Violation::NotSubmodular {
                first,
                second,
                profile,
                lhs,
                rhs,
            } => write!(
                f,
                "g({first}) + g({second}) = {lhs} < {rhs} = g(union) + g(intersection) at profile {}",
                show(profile)
            ),
            Violation::NotOnline {
                set,
                profile,
                other_profile,
                value,
                other_value,
            } => write!(
                f,
                "g({set}) differs between profiles {} ({value}) and {} ({other_value}) that agree on the set",
                show(profile),
                show(other_profile)
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidityReport {
    pub violation: Option<Violation>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.violation.is_none()
    }

    /// `Ok(())` when valid, otherwise [`Error::InvalidOracle`] with the counterexample.
    pub fn into_result(self) -> Result<()> {
        match self.violation {
            None => Ok(()),
            Some(v) => Err(Error::InvalidOracle(v.to_string())),
        }
    }
}

/// Checks nonnegativity, monotonicity and submodularity of `g(·, r)` on the
/// given profile (a full reward vector of length `n`).
pub fn check_profile(
    oracle: &SubmodularOracle,
    n: usize,
    profile: &[Rational],
) -> Result<Option<Violation>> {
    let values: Vec<Rational> = IndexSet::all_subsets(n)
        .map(|s| oracle.eval(n, s, profile))
        .collect::<Result<_>>()?;
    let g = |s: IndexSet| &values[s.bits() as usize];
    for s in IndexSet::all_subsets(n) {
        if g(s).is_negative() {
            return Ok(Some(Violation::Negative {
                set: s,
                profile: profile.to_vec(),
                value: g(s).clone(),
            }));
        }
    }
    for larger in IndexSet::all_subsets(n) {
        for smaller in larger.subsets() {
            if g(smaller) > g(larger) {
                return Ok(Some(Violation::NotMonotone {
                    smaller,
                    larger,
                    profile: profile.to_vec(),
                    smaller_value: g(smaller).clone(),
                    larger_value: g(larger).clone(),
                }));
            }
        }
    }
    for first in IndexSet::all_subsets(n) {
        for second in IndexSet::all_subsets(n) {
            let lhs = g(first).clone() + g(second);
            let rhs = g(first.union(second)).clone() + g(first.intersection(second));
            if lhs < rhs {
                return Ok(Some(Violation::NotSubmodular {
                    first,
                    second,
                    profile: profile.to_vec(),
                    lhs,
                    rhs,
                }));
            }
        }
    }
    Ok(None)
}

/// Brute-force validity over every positive-probability profile of `model`,
/// including the on-line property (the value of `g(I, ·)` depends only on `r^I`).
pub fn validate_oracle(
    oracle: &SubmodularOracle,
    model: &RewardModel,
    budget: Budget,
) -> Result<ValidityReport> {
    let n = model.n();
    if n > MAX_GROUND {
        return Err(Error::Budget {
            what: "oracle ground set".into(),
            count: n as u128,
            limit: MAX_GROUND,
        });
    }
    let subsets = 1u128 << n;
    budget.check(
        "oracle validation (profiles x subset pairs)",
        model.profile_count().saturating_mul(subsets * subsets),
    )?;
    let profiles: Vec<Vec<Rational>> = model
        .profiles()
        .iter()
        .map(|p| model.values(&p.index))
        .collect();
    for profile in &profiles {
        if let Some(v) = check_profile(oracle, n, profile)? {
            return Ok(ValidityReport { violation: Some(v) });
        }
    }
    for set in IndexSet::all_subsets(n) {
        let mut seen: HashMap<Vec<Rational>, (Rational, &Vec<Rational>)> = HashMap::new();
        for profile in &profiles {
            let key: Vec<Rational> = set.iter().map(|l| profile[l].clone()).collect();
            let value = oracle.eval(n, set, profile)?;
            match seen.get(&key) {
                Some((v0, p0)) if *v0 != value => {
                    return Ok(ValidityReport {
                        violation: Some(Violation::NotOnline {
                            set,
                            profile: (*p0).clone(),
                            other_profile: profile.clone(),
                            value: v0.clone(),
                            other_value: value,
                        }),
                    })
                }
                Some(_) => {}
                None => {
                    seen.insert(key, (value, profile));
                }
            }
        }
    }
    Ok(ValidityReport { violation: None })
}

/// `ĝ(I, r^I) = g(I ∪ {i+1}, r^I, r̂_{i+1}) − g({i+1}, r̂_{i+1})` on the ground
/// set of the first `element` coordinates (`element` is the 0-based index of
/// coordinate `i+1`).
pub fn hat_g(
    oracle: &SubmodularOracle,
    n: usize,
    element: usize,
    reward: Rational,
) -> Result<SubmodularOracle> {
    if element >= n {
        return Err(Error::Structural(format!(
            "contraction element {} outside ground set of size {n}",
            element + 1
        )));
    }
    Ok(SubmodularOracle::Contraction {
        base: Box::new(oracle.clone()),
        base_dim: n,
        element,
        reward,
    })
}
