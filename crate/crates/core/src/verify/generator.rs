//! Seeded random instances on rational grids.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constraints::{
    validate_oracle, ConstraintSystem, IndexSet, OracleTable, SubmodularOracle, TableKeying,
};
use crate::error::{Error, Result};
use crate::model::{Budget, Instance, RewardModel};
use crate::{int, rat, Rational};

/// Constraint families the generator can draw.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindChoice {
    Matrix,
    Polymatroid,
    OnlinePolymatroid,
    Minkowski,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorParams {
    pub n_min: usize,
    pub n_max: usize,
    pub support_min: usize,
    pub support_max: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub kinds: Vec<KindChoice>,
    /// Joint (correlated) rewards instead of independent ones.
    pub joint: bool,
    /// Rewards are drawn from `{0, 1/2, 1, …, bound}`.
    pub reward_bound: u32,
    /// Probabilities are multiples of `1/grid`.
    pub grid: u32,
    pub seed: u64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            n_min: 1,
            n_max: 4,
            support_min: 1,
            support_max: 3,
            k_min: 1,
            k_max: 3,
            kinds: vec![KindChoice::Matrix],
            joint: false,
            reward_bound: 4,
            grid: 12,
            seed: 0,
        }
    }
}

impl GeneratorParams {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Domain(msg));
        if self.n_min == 0 || self.n_min > self.n_max {
            return fail(format!("n range {}..={} is empty or starts at 0", self.n_min, self.n_max));
        }
        if self.support_min == 0 || self.support_min > self.support_max {
            return fail(format!(
                "support range {}..={} is empty or starts at 0",
                self.support_min, self.support_max
            ));
        }
        if self.k_min == 0 || self.k_min > self.k_max {
            return fail(format!("K range {}..={} is empty or starts at 0", self.k_min, self.k_max));
        }
        if self.kinds.is_empty() {
            return fail("no constraint kinds to draw from".into());
        }
        if (2 * self.reward_bound + 1) < self.support_max as u32 {
            return fail(format!(
                "reward grid up to {} cannot hold {} distinct values",
                self.reward_bound, self.support_max
            ));
        }
        if (self.grid as usize) < self.support_max {
            return fail(format!(
                "probability grid 1/{} cannot split mass over {} values",
                self.grid, self.support_max
            ));
        }
        if self.joint && self.n_max < 2 {
            return fail("correlated instances need n ≥ 2".into());
        }
        Ok(())
    }
}

/// Deterministic stream of sub-seeds for a campaign.
pub fn sub_seeds(seed: u64, stream: u64, count: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..count).map(|_| rng.gen()).collect()
}

pub(crate) fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `parts` positive multiples of `1/grid` summing to one.
fn composition(rng: &mut ChaCha8Rng, grid: u32, parts: usize) -> Vec<Rational> {
    let mut cuts: Vec<u32> = (1..grid).collect();
    cuts.shuffle(rng);
    let mut chosen: Vec<u32> = cuts[..parts - 1].to_vec();
    chosen.sort_unstable();
    let mut out = Vec::with_capacity(parts);
    let mut last = 0;
    for c in chosen.into_iter().chain(std::iter::once(grid)) {
        out.push(rat((c - last) as i64, grid as i64));
        last = c;
    }
    out
}

fn reward_values(rng: &mut ChaCha8Rng, bound: u32, count: usize) -> Vec<Rational> {
    let mut halves: Vec<u32> = (0..=2 * bound).collect();
    halves.shuffle(rng);
    let mut chosen: Vec<u32> = halves[..count].to_vec();
    chosen.sort_unstable();
    chosen.into_iter().map(|h| rat(h as i64, 2)).collect()
}

fn independent_rewards(rng: &mut ChaCha8Rng, p: &GeneratorParams, n: usize) -> Result<RewardModel> {
    let marginals = (0..n)
        .map(|_| {
            let s = rng.gen_range(p.support_min..=p.support_max);
            let values = reward_values(rng, p.reward_bound, s);
            let probs = composition(rng, p.grid, s);
            values.into_iter().zip(probs).collect()
        })
        .collect();
    RewardModel::independent(marginals)
}

/// A joint table that is not the product of its marginals: a random subset
/// of a product grid with random masses, redrawn until correlated.
fn joint_rewards(rng: &mut ChaCha8Rng, p: &GeneratorParams, n: usize) -> Result<RewardModel> {
    for _ in 0..64 {
        let supports: Vec<Vec<Rational>> = (0..n)
            .map(|_| {
                let s = rng.gen_range(p.support_min.max(2)..=p.support_max.max(2));
                reward_values(rng, p.reward_bound, s)
            })
            .collect();
        let mut grid_profiles: Vec<Vec<Rational>> = vec![Vec::new()];
        for s in &supports {
            grid_profiles = grid_profiles
                .into_iter()
                .flat_map(|prefix| {
                    s.iter().map(move |v| {
                        let mut next = prefix.clone();
                        next.push(v.clone());
                        next
                    })
                })
                .collect();
        }
        grid_profiles.shuffle(rng);
        let max_rows = grid_profiles.len().min(p.grid as usize).min(8);
        let rows = rng.gen_range(2..=max_rows.max(2));
        let probs = composition(rng, p.grid.max(rows as u32), rows);
        let table: Vec<(Vec<Rational>, Rational)> =
            grid_profiles.into_iter().take(rows).zip(probs).collect();
        let model = RewardModel::joint(table)?;
        if !model.is_product() {
            return Ok(model);
        }
    }
    Err(Error::Domain("could not draw a correlated table with these parameters".into()))
}

fn grid_value(rng: &mut ChaCha8Rng, choices: &[(i64, i64)]) -> Rational {
    let (p, q) = choices[rng.gen_range(0..choices.len())];
    rat(p, q)
}

pub(crate) fn random_matrix(rng: &mut ChaCha8Rng, n: usize, k: usize) -> ConstraintSystem {
    let entries = [(0, 1), (0, 1), (1, 2), (1, 1), (1, 1), (3, 2), (2, 1), (3, 1)];
    let mut a: Vec<Vec<Rational>> = (0..k)
        .map(|_| (0..n).map(|_| grid_value(rng, &entries)).collect())
        .collect();
    // Every coordinate must be capped by some row, otherwise the LPs are unbounded.
    for col in 0..n {
        if a.iter().all(|row| row[col] == int(0)) {
            let r = rng.gen_range(0..k);
            a[r][col] = int(1);
        }
    }
    let b = (0..k)
        .map(|_| grid_value(rng, &[(1, 2), (1, 1), (3, 2), (2, 1), (3, 1)]))
        .collect();
    ConstraintSystem::Matrix { a, b }
}

/// Weighted coverage: `g(I) = w(∪_{ℓ∈I} S_ℓ)`; `sets` is keyed by whatever
/// the caller indexes coverage sets by.
fn coverage_value(weights: &[Rational], sets: &[u32]) -> Rational {
    let union = sets.iter().fold(0u32, |acc, s| acc | s);
    weights
        .iter()
        .enumerate()
        .filter(|(e, _)| union & (1 << e) != 0)
        .map(|(_, w)| w.clone())
        .sum()
}

fn coverage_ground(rng: &mut ChaCha8Rng) -> (Vec<Rational>, usize) {
    let m = rng.gen_range(2..=5);
    let weights = (0..m)
        .map(|_| grid_value(rng, &[(1, 2), (1, 1), (3, 2), (2, 1)]))
        .collect();
    (weights, m)
}

fn random_subset_mask(rng: &mut ChaCha8Rng, m: usize) -> u32 {
    (0..m).fold(0u32, |acc, e| if rng.gen_bool(0.5) { acc | (1 << e) } else { acc })
}

/// A static submodular oracle: coverage, truncated modular, or uniform rank.
pub(crate) fn random_static_oracle(rng: &mut ChaCha8Rng, n: usize) -> SubmodularOracle {
    match rng.gen_range(0..3) {
        0 => {
            let (weights, m) = coverage_ground(rng);
            let sets: Vec<u32> = (0..n).map(|_| random_subset_mask(rng, m)).collect();
            let entries = IndexSet::all_subsets(n)
                .map(|s| {
                    let chosen: Vec<u32> = s.iter().map(|l| sets[l]).collect();
                    ((s, Vec::new()), coverage_value(&weights, &chosen))
                })
                .collect();
            SubmodularOracle::Table(OracleTable {
                keying: TableKeying::Static,
                entries,
            })
        }
        1 => {
            let c: Vec<Rational> = (0..n)
                .map(|_| grid_value(rng, &[(1, 2), (1, 1), (3, 2), (2, 1)]))
                .collect();
            let cap = grid_value(rng, &[(1, 1), (3, 2), (2, 1), (3, 1)]);
            let entries = IndexSet::all_subsets(n)
                .map(|s| {
                    let total: Rational = s.iter().map(|l| c[l].clone()).sum();
                    ((s, Vec::new()), total.min(cap.clone()))
                })
                .collect();
            SubmodularOracle::Table(OracleTable {
                keying: TableKeying::Static,
                entries,
            })
        }
        _ => SubmodularOracle::UniformRank {
            rank: int(rng.gen_range(1..=n.max(1)) as i64),
        },
    }
}

/// A reward-dependent on-line submodular oracle: a builtin with sampled
/// parameter, on-line coverage, or on-line truncated modular.
pub(crate) fn random_online_oracle(
    rng: &mut ChaCha8Rng,
    model: &RewardModel,
    bound: u32,
) -> SubmodularOracle {
    let n = model.n();
    match rng.gen_range(0..5) {
        0 => SubmodularOracle::G1 {
            cap: grid_value(rng, &[(1, 1), (3, 2), (2, 1), (3, 1), (4, 1), (6, 1)]),
        },
        1 => SubmodularOracle::G2 {
            threshold: rat(rng.gen_range(0..=2 * bound as i64), 2),
        },
        2 => SubmodularOracle::G3 {
            threshold: rat(rng.gen_range(0..=2 * bound as i64), 2),
        },
        3 => {
            let (weights, m) = coverage_ground(rng);
            let sets: Vec<Vec<u32>> = (0..n)
                .map(|l| {
                    (0..model.support(l).len())
                        .map(|_| random_subset_mask(rng, m))
                        .collect()
                })
                .collect();
            subset_table(model, |set, idx| {
                let chosen: Vec<u32> = set.iter().zip(idx).map(|(l, &k)| sets[l][k]).collect();
                coverage_value(&weights, &chosen)
            })
        }
        _ => {
            let c: Vec<Vec<Rational>> = (0..n)
                .map(|l| {
                    (0..model.support(l).len())
                        .map(|_| grid_value(rng, &[(0, 1), (1, 2), (1, 1), (3, 2), (2, 1)]))
                        .collect()
                })
                .collect();
            let cap = grid_value(rng, &[(1, 1), (3, 2), (2, 1), (3, 1)]);
            subset_table(model, |set, idx| {
                let total: Rational = set.iter().zip(idx).map(|(l, &k)| c[l][k].clone()).sum();
                total.min(cap.clone())
            })
        }
    }
}

/// Table keyed by `(I, r^I)` for every subset and every support combination on it.
fn subset_table(model: &RewardModel, f: impl Fn(IndexSet, &[usize]) -> Rational) -> SubmodularOracle {
    let mut entries = BTreeMap::new();
    for set in IndexSet::all_subsets(model.n()) {
        let members: Vec<usize> = set.iter().collect();
        let mut combos: Vec<Vec<usize>> = vec![Vec::new()];
        for &l in &members {
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    (0..model.support(l).len()).map(move |k| {
                        let mut next = c.clone();
                        next.push(k);
                        next
                    })
                })
                .collect();
        }
        for idx in combos {
            let rewards: Vec<Rational> = members
                .iter()
                .zip(&idx)
                .map(|(&l, &k)| model.value(l, k).clone())
                .collect();
            entries.insert((set, rewards), f(set, &idx));
        }
    }
    SubmodularOracle::Table(OracleTable {
        keying: TableKeying::OnSubset,
        entries,
    })
}

fn random_system(
    rng: &mut ChaCha8Rng,
    p: &GeneratorParams,
    model: &RewardModel,
    kind: KindChoice,
    depth: usize,
) -> Result<ConstraintSystem> {
    let n = model.n();
    Ok(match kind {
        KindChoice::Matrix => {
            let k = rng.gen_range(p.k_min..=p.k_max);
            random_matrix(rng, n, k)
        }
        KindChoice::Polymatroid => ConstraintSystem::Polymatroid(random_static_oracle(rng, n)),
        KindChoice::OnlinePolymatroid => {
            ConstraintSystem::OnlinePolymatroid(random_online_oracle(rng, model, p.reward_bound))
        }
        KindChoice::Minkowski if depth == 0 => {
            let terms = rng.gen_range(2..=3);
            let leaf = [
                KindChoice::Matrix,
                KindChoice::Polymatroid,
                KindChoice::OnlinePolymatroid,
            ];
            let mut kinds: Vec<KindChoice> =
                (0..terms).map(|_| leaf[rng.gen_range(0..leaf.len())]).collect();
            // Mixed kinds: force at least two different families.
            if kinds.iter().all(|k| *k == kinds[0]) {
                let other = leaf.iter().find(|k| **k != kinds[0]).copied().expect("three leaves");
                kinds[terms - 1] = other;
            }
            let coeffs = (0..terms)
                .map(|_| grid_value(rng, &[(0, 1), (1, 2), (1, 1), (1, 1), (2, 1)]))
                .collect();
            let terms = kinds
                .into_iter()
                .map(|k| random_system(rng, p, model, k, depth + 1))
                .collect::<Result<_>>()?;
            ConstraintSystem::Minkowski { coeffs, terms }
        }
        KindChoice::Minkowski => random_matrix(rng, n, 1),
    })
}

fn oracles_valid(cs: &ConstraintSystem, model: &RewardModel, budget: Budget) -> Result<bool> {
    Ok(match cs {
        ConstraintSystem::Matrix { .. } => true,
        ConstraintSystem::Polymatroid(g) | ConstraintSystem::OnlinePolymatroid(g) => {
            validate_oracle(g, model, budget)?.is_valid()
        }
        ConstraintSystem::Minkowski { terms, .. } => {
            for t in terms {
                if !oracles_valid(t, model, budget)? {
                    return Ok(false);
                }
            }
            true
        }
    })
}

/// Draws one instance. Oracles are valid by construction and re-validated;
/// a draw that fails validation is discarded and redrawn from the same stream.
pub fn generate_instance(params: &GeneratorParams) -> Result<Instance> {
    params.validate()?;
    let mut rng = rng_for(params.seed);
    for _ in 0..32 {
        let n = rng.gen_range(params.n_min..=params.n_max);
        let n = if params.joint { n.max(2) } else { n };
        let model = if params.joint {
            joint_rewards(&mut rng, params, n)?
        } else {
            independent_rewards(&mut rng, params, n)?
        };
        let kind = params.kinds[rng.gen_range(0..params.kinds.len())];
        let cs = random_system(&mut rng, params, &model, kind, 0)?;
        let budget = Budget::default();
        if oracles_valid(&cs, &model, budget)? {
            return Instance::with_budget(model, cs, budget);
        }
    }
    Err(Error::Domain("generator produced no valid oracle in 32 draws".into()))
}

/// Random rewards for a fixed dimension (used where the constraint system is fixed).
pub fn generate_rewards(params: &GeneratorParams, n: usize) -> Result<RewardModel> {
    params.validate()?;
    let mut rng = rng_for(params.seed);
    if params.joint {
        joint_rewards(&mut rng, params, n)
    } else {
        independent_rewards(&mut rng, params, n)
    }
}
