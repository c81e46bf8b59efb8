//! Small instances with hand-checkable values.

use std::collections::BTreeMap;

use crate::constraints::{ConstraintSystem, IndexSet, OracleTable, SubmodularOracle, TableKeying};
use crate::error::{Error, Result};
use crate::model::{Instance, RewardModel};
use crate::{int, rat, Rational};

fn single_knapsack() -> ConstraintSystem {
    ConstraintSystem::Matrix {
        a: vec![vec![int(1), int(1)]],
        b: vec![int(1)],
    }
}

/// `r1 ≡ 1`, `r2 ∈ {0, 1/ε}` with `P(r2 = 1/ε) = ε`, one knapsack row
/// `q1 + q2 ≤ 1`. `Z_on = 1`, `Z_off = 2 − ε`.
pub fn epsilon_family(eps: Rational) -> Result<Instance> {
    if eps <= int(0) || eps >= int(1) {
        return Err(Error::Domain(format!("ε = {eps} must lie strictly between 0 and 1")));
    }
    let high = int(1) / &eps;
    Instance::new(
        RewardModel::independent(vec![
            vec![(int(1), int(1))],
            vec![(int(0), int(1) - &eps), (high, eps)],
        ])?,
        single_knapsack(),
    )
}

/// The ε-family at `ε = 1/2`.
pub fn e1() -> Instance {
    epsilon_family(rat(1, 2)).expect("ε = 1/2 is admissible")
}

/// `r1 ∈ {1, 3}`, `r2 ≡ 2`, a single unit of capacity shared by both.
pub fn e2() -> Instance {
    Instance::new(
        RewardModel::independent(vec![
            vec![(int(1), rat(1, 2)), (int(3), rat(1, 2))],
            vec![(int(2), int(1))],
        ])
        .expect("valid marginals"),
        ConstraintSystem::Polymatroid(SubmodularOracle::UniformRank { rank: int(1) }),
    )
    .expect("valid instance")
}

/// Joint table `{(1,2): 1/2, (1,0): 1/2}` with the E1 knapsack row.
pub fn e3() -> Instance {
    Instance::new(
        RewardModel::joint(vec![
            (vec![int(1), int(2)], rat(1, 2)),
            (vec![int(1), int(0)], rat(1, 2)),
        ])
        .expect("valid table"),
        single_knapsack(),
    )
    .expect("valid instance")
}

/// Joint table `{(1,2): 1/2, (2,0): 1/2}`: the first reward reveals the second.
pub fn revealing_joint() -> Instance {
    Instance::new(
        RewardModel::joint(vec![
            (vec![int(1), int(2)], rat(1, 2)),
            (vec![int(2), int(0)], rat(1, 2)),
        ])
        .expect("valid table"),
        single_knapsack(),
    )
    .expect("valid instance")
}

/// The simplex `{x ≥ 0 : Σ_{ℓ∈S} x_ℓ ≤ 1, x_ℓ = 0 for ℓ ∉ S}` as the static
/// polymatroid `g(I) = [I ∩ S ≠ ∅]`.
pub fn face_simplex(n: usize, face: IndexSet) -> ConstraintSystem {
    let entries: BTreeMap<(IndexSet, Vec<Rational>), Rational> = IndexSet::all_subsets(n)
        .map(|s| {
            let v = if s.intersection(face).is_empty() { int(0) } else { int(1) };
            ((s, Vec::new()), v)
        })
        .collect();
    ConstraintSystem::Polymatroid(SubmodularOracle::Table(OracleTable {
        keying: TableKeying::Static,
        entries,
    }))
}

/// Permutahedron on three coordinates as the sum of the three edge simplices.
pub fn permutahedron3() -> ConstraintSystem {
    let edges = [(0, 1), (0, 2), (1, 2)];
    ConstraintSystem::Minkowski {
        coeffs: vec![int(1); 3],
        terms: edges
            .iter()
            .map(|&(a, b)| face_simplex(3, IndexSet::from_indices([a, b])))
            .collect(),
    }
}

/// The same permutahedron as a polymatroid: `g = 2, 3, 3` for `|I| = 1, 2, 3`.
pub fn permutahedron3_polymatroid() -> ConstraintSystem {
    let entries = IndexSet::all_subsets(3)
        .map(|s| {
            let v = match s.len() {
                0 => 0,
                1 => 2,
                _ => 3,
            };
            ((s, Vec::new()), int(v))
        })
        .collect();
    ConstraintSystem::Polymatroid(SubmodularOracle::Table(OracleTable {
        keying: TableKeying::Static,
        entries,
    }))
}
