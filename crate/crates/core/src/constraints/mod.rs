//! Feasible regions for the selection vector and their LP rows.
//!
//! [`linearize`] turns a system into rows over the stage-`j` prefix
//! `x_1..x_j`. Minkowski sums are written as an extended formulation: each
//! term `m` gets its own copy `x^m` of the coordinates, linked by
//! `x_ℓ = Σ_m α_m x^m_ℓ`. Every variable (including copies) is identified by a
//! [`VarRef`] so stagewise LP builders can key copies of coordinate `ℓ` by the
//! history `r^ℓ`, exactly like the selection variables themselves.

mod oracle;

use num_traits::{One, Signed, Zero};

pub use oracle::{
    check_profile, hat_g, validate_oracle, IndexSet, OracleTable, SubmodularOracle, TableKeying,
    ValidityReport, Violation, MAX_GROUND,
};

use crate::error::{Error, Result};
use crate::lp::{LpProblem, Relation};
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConstraintSystem {
    /// `{x ≥ 0 : A x ≤ b}` with `A, b ≥ 0`.
    Matrix {
        a: Vec<Vec<Rational>>,
        b: Vec<Rational>,
    },
    /// Reward-independent polymatroid.
    Polymatroid(SubmodularOracle),
    /// Polymatroid whose rank function may depend on the rewards of its argument set.
    OnlinePolymatroid(SubmodularOracle),
    /// `Σ_m α_m P_m`.
    Minkowski {
        coeffs: Vec<Rational>,
        terms: Vec<ConstraintSystem>,
    },
}

/// A column of a linearization: coordinate `coord` of the Minkowski term
/// reached by `path` (empty path = the selection vector itself).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarRef {
    pub path: Vec<u16>,
    pub coord: usize,
}

impl VarRef {
    pub fn root(coord: usize) -> Self {
        VarRef {
            path: Vec::new(),
            coord,
        }
    }

    pub fn is_root(&self) -> bool {
        self.path.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinRow {
    pub terms: Vec<(VarRef, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl ConstraintSystem {
    /// Structural and sign checks against dimension `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        if n > MAX_GROUND {
            return Err(Error::Structural(format!("dimension {n} exceeds {MAX_GROUND}")));
        }
        match self {
            ConstraintSystem::Matrix { a, b } => {
                if a.len() != b.len() {
                    return Err(Error::Structural(format!(
                        "matrix has {} rows but b has {} entries",
                        a.len(),
                        b.len()
                    )));
                }
                for (k, row) in a.iter().enumerate() {
                    if row.len() != n {
                        return Err(Error::Structural(format!(
                            "matrix row {} has {} columns, expected {n}",
                            k + 1,
                            row.len()
                        )));
                    }
                    if let Some(v) = row.iter().find(|v| v.is_negative()) {
                        return Err(Error::Domain(format!(
                            "matrix row {} has negative entry {v}",
                            k + 1
                        )));
                    }
                }
                if let Some(v) = b.iter().find(|v| v.is_negative()) {
                    return Err(Error::Domain(format!("capacity {v} is negative")));
                }
                Ok(())
            }
            ConstraintSystem::Polymatroid(g) => {
                if g.reward_dependent() {
                    return Err(Error::Structural(
                        "static polymatroid needs a reward-independent oracle".into(),
                    ));
                }
                check_oracle_shape(g, n)
            }
            ConstraintSystem::OnlinePolymatroid(g) => check_oracle_shape(g, n),
            ConstraintSystem::Minkowski { coeffs, terms } => {
                if terms.is_empty() || coeffs.len() != terms.len() {
                    return Err(Error::Structural(format!(
                        "Minkowski sum has {} coefficients for {} terms",
                        coeffs.len(),
                        terms.len()
                    )));
                }
                if let Some(a) = coeffs.iter().find(|a| a.is_negative()) {
                    return Err(Error::Domain(format!("Minkowski coefficient {a} is negative")));
                }
                terms.iter().try_for_each(|t| t.validate(n))
            }
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ConstraintSystem::Matrix { .. } => "matrix",
            ConstraintSystem::Polymatroid(_) => "polymatroid",
            ConstraintSystem::OnlinePolymatroid(_) => "online_polymatroid",
            ConstraintSystem::Minkowski { .. } => "minkowski",
        }
    }

    /// Number of matrix rows `K` (None for other kinds).
    pub fn row_count(&self) -> Option<usize> {
        match self {
            ConstraintSystem::Matrix { b, .. } => Some(b.len()),
            _ => None,
        }
    }

    /// The prophet-inequality factor the theory certifies for this system under
    /// independent rewards: `1/(K+1)` for matrices, `1/2` for (on-line)
    /// polymatroids, the smallest term factor for Minkowski sums.
    pub fn certified_factor(&self) -> Rational {
        match self {
            ConstraintSystem::Matrix { b, .. } => {
                Rational::one() / Rational::from_integer((b.len() + 1).into())
            }
            ConstraintSystem::Polymatroid(_) | ConstraintSystem::OnlinePolymatroid(_) => {
                Rational::new(1.into(), 2.into())
            }
            ConstraintSystem::Minkowski { terms, .. } => terms
                .iter()
                .map(ConstraintSystem::certified_factor)
                .min()
                .unwrap_or_else(Rational::one),
        }
    }

    pub fn is_reward_dependent(&self) -> bool {
        match self {
            ConstraintSystem::Matrix { .. } => false,
            ConstraintSystem::Polymatroid(g) | ConstraintSystem::OnlinePolymatroid(g) => {
                g.reward_dependent()
            }
            ConstraintSystem::Minkowski { terms, .. } => {
                terms.iter().any(ConstraintSystem::is_reward_dependent)
            }
        }
    }

    pub fn has_polymatroid(&self) -> bool {
        match self {
            ConstraintSystem::Matrix { .. } => false,
            ConstraintSystem::Polymatroid(_) | ConstraintSystem::OnlinePolymatroid(_) => true,
            ConstraintSystem::Minkowski { terms, .. } => {
                terms.iter().any(ConstraintSystem::has_polymatroid)
            }
        }
    }

    /// How many auxiliary copies of each coordinate the extended formulation uses.
    pub fn coordinate_copies(&self) -> usize {
        match self {
            ConstraintSystem::Minkowski { terms, .. } => terms
                .iter()
                .map(|t| 1 + t.coordinate_copies())
                .sum(),
            _ => 0,
        }
    }

    /// The oracle of a (static or on-line) polymatroid.
    pub fn oracle(&self) -> Option<&SubmodularOracle> {
        match self {
            ConstraintSystem::Polymatroid(g) | ConstraintSystem::OnlinePolymatroid(g) => Some(g),
            _ => None,
        }
    }
}

fn check_oracle_shape(g: &SubmodularOracle, n: usize) -> Result<()> {
    match g {
        SubmodularOracle::Table(t) => {
            if let Some(((set, _), _)) = t.entries.iter().find(|((s, _), _)| s.span() > n) {
                return Err(Error::Structural(format!(
                    "oracle table mentions {set} outside ground set of size {n}"
                )));
            }
            if t.keying == TableKeying::OnProfile {
                return Err(Error::Structural(
                    "profile-keyed oracle tables are not on-line and cannot define a constraint"
                        .into(),
                ));
            }
            Ok(())
        }
        SubmodularOracle::Contraction { element, .. } if *element != n => Err(Error::Structural(
            format!("contracted oracle has ground set {element}, expected {n}"),
        )),
        _ => Ok(()),
    }
}

/// Rows describing `(x_1, …, x_j, 0, …, 0) ∈ P` where `history` holds the
/// rewards `r_1..r_j` (`j = history.len()`), over [`VarRef`] columns. All
/// columns are implicitly nonnegative.
pub fn linearize(cs: &ConstraintSystem, n: usize, history: &[Rational]) -> Result<Vec<LinRow>> {
    if history.len() > n {
        return Err(Error::Structural(format!(
            "history of length {} exceeds dimension {n}",
            history.len()
        )));
    }
    let mut rows = Vec::new();
    linearize_into(cs, n, history, &[], &mut rows)?;
    Ok(rows)
}

fn var(path: &[u16], coord: usize) -> VarRef {
    VarRef {
        path: path.to_vec(),
        coord,
    }
}

fn linearize_into(
    cs: &ConstraintSystem,
    n: usize,
    history: &[Rational],
    path: &[u16],
    out: &mut Vec<LinRow>,
) -> Result<()> {
    let j = history.len();
    match cs {
        ConstraintSystem::Matrix { a, b } => {
            if a.iter().any(|row| row.len() != n) {
                return Err(Error::Structural("matrix width differs from dimension".into()));
            }
            for (row, bk) in a.iter().zip(b) {
                let terms: Vec<(VarRef, Rational)> = row[..j]
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(l, c)| (var(path, l), c.clone()))
                    .collect();
                if !terms.is_empty() {
                    out.push(LinRow {
                        terms,
                        relation: Relation::Le,
                        rhs: bk.clone(),
                    });
                }
            }
        }
        ConstraintSystem::Polymatroid(g) | ConstraintSystem::OnlinePolymatroid(g) => {
            for set in IndexSet::all_subsets(j).skip(1) {
                out.push(LinRow {
                    terms: set.iter().map(|l| (var(path, l), Rational::one())).collect(),
                    relation: Relation::Le,
                    rhs: g.eval(n, set, history)?,
                });
            }
        }
        ConstraintSystem::Minkowski { coeffs, terms } => {
            let active: Vec<usize> = (0..terms.len()).filter(|&m| !coeffs[m].is_zero()).collect();
            for l in 0..j {
                let mut row = vec![(var(path, l), Rational::one())];
                for &m in &active {
                    let mut child = path.to_vec();
                    child.push(m as u16);
                    row.push((var(&child, l), -coeffs[m].clone()));
                }
                out.push(LinRow {
                    terms: row,
                    relation: Relation::Eq,
                    rhs: Rational::zero(),
                });
            }
            for &m in &active {
                let mut child = path.to_vec();
                child.push(m as u16);
                linearize_into(&terms[m], n, history, &child, out)?;
            }
        }
    }
    Ok(())
}

/// Whether `x` (nonnegative, length `n`) lies in the system at `profile`.
/// Minkowski sums are decided by an LP over the extended formulation.
pub fn membership(
    cs: &ConstraintSystem,
    n: usize,
    x: &[Rational],
    profile: &[Rational],
) -> Result<bool> {
    if x.len() != n || profile.len() != n {
        return Err(Error::Structural(format!(
            "membership needs vectors of length {n}"
        )));
    }
    if x.iter().any(Signed::is_negative) {
        return Ok(false);
    }
    let rows = linearize(cs, n, profile)?;
    let mut aux: Vec<VarRef> = rows
        .iter()
        .flat_map(|r| r.terms.iter().map(|(v, _)| v))
        .filter(|v| !v.is_root())
        .cloned()
        .collect();
    aux.sort();
    aux.dedup();
    if aux.is_empty() {
        return Ok(rows.iter().all(|r| {
            let lhs: Rational = r
                .terms
                .iter()
                .map(|(v, c)| c.clone() * &x[v.coord])
                .sum();
            match r.relation {
                Relation::Le => lhs <= r.rhs,
                Relation::Eq => lhs == r.rhs,
                Relation::Ge => lhs >= r.rhs,
            }
        }));
    }
    let mut lp: LpProblem<Rational> = LpProblem::new(aux.len());
    for r in &rows {
        let mut rhs = r.rhs.clone();
        let mut terms = Vec::new();
        for (v, c) in &r.terms {
            if v.is_root() {
                rhs -= c.clone() * &x[v.coord];
            } else {
                let col = aux.binary_search(v).expect("aux collected above");
                terms.push((col, c.clone()));
            }
        }
        lp.add_sparse(&terms, r.relation, rhs)?;
    }
    Ok(lp.feasible()?.is_some())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{int, rat};

    fn simplex() -> ConstraintSystem {
        ConstraintSystem::Polymatroid(SubmodularOracle::UniformRank { rank: int(1) })
    }

    fn simplex_sum() -> ConstraintSystem {
        ConstraintSystem::Minkowski {
            coeffs: vec![int(1), int(1)],
            terms: vec![simplex(), simplex()],
        }
    }

    #[test]
    fn matrix_rows_at_stage_one() {
        let cs = ConstraintSystem::Matrix {
            a: vec![vec![int(1), int(1)]],
            b: vec![int(1)],
        };
        let rows = linearize(&cs, 2, &[int(1)]).unwrap();
        assert_eq!(
            rows,
            vec![LinRow {
                terms: vec![(VarRef::root(0), int(1))],
                relation: Relation::Le,
                rhs: int(1)
            }]
        );
    }

    #[test]
    fn uniform_rank_rows() {
        let rows = linearize(&simplex(), 2, &[int(0), int(0)]).unwrap();
        let described: Vec<(Vec<usize>, Rational)> = rows
            .iter()
            .map(|r| (r.terms.iter().map(|(v, _)| v.coord).collect(), r.rhs.clone()))
            .collect();
        assert_eq!(
            described,
            vec![(vec![0], int(1)), (vec![1], int(1)), (vec![0, 1], int(1))]
        );
    }

    #[test]
    fn minkowski_extended_rows_project_to_doubled_simplex() {
        let cs = simplex_sum();
        let rows = linearize(&cs, 2, &[int(0), int(0)]).unwrap();
        assert_eq!(rows.len(), 2 + 3 + 3);
        // Projection is {x1 <= 2, x2 <= 2, x1 + x2 <= 2}: probe boundary and just outside.
        let prof = [int(0), int(0)];
        for (x, inside) in [
            ([int(2), int(0)], true),
            ([int(0), int(2)], true),
            ([int(1), int(1)], true),
            ([rat(3, 2), rat(1, 2)], true),
            ([rat(3, 2), rat(3, 4)], false),
            ([rat(21, 10), int(0)], false),
        ] {
            assert_eq!(membership(&cs, 2, &x, &prof).unwrap(), inside, "{x:?}");
        }
    }

    #[test]
    fn membership_basics() {
        let prof = [int(0), int(0)];
        assert!(membership(&simplex(), 2, &[int(0), int(0)], &prof).unwrap());
        assert!(!membership(&simplex(), 2, &[int(1), int(1)], &prof).unwrap());
        assert!(membership(&simplex_sum(), 2, &[int(1), int(1)], &prof).unwrap());
        let m = ConstraintSystem::Matrix {
            a: vec![vec![int(1), int(2)]],
            b: vec![int(0)],
        };
        assert!(membership(&m, 2, &[int(0), int(0)], &prof).unwrap());
    }

    #[test]
    fn validation_rejects_bad_systems() {
        let neg = ConstraintSystem::Matrix {
            a: vec![vec![int(-1), int(1)]],
            b: vec![int(1)],
        };
        assert!(matches!(neg.validate(2), Err(Error::Domain(_))));
        let wide = ConstraintSystem::Matrix {
            a: vec![vec![int(1)]],
            b: vec![int(1)],
        };
        assert!(wide.validate(2).is_err());
        let dyn_static = ConstraintSystem::Polymatroid(SubmodularOracle::G1 { cap: int(2) });
        assert!(dyn_static.validate(2).is_err());
        let neg_alpha = ConstraintSystem::Minkowski {
            coeffs: vec![int(-1)],
            terms: vec![simplex()],
        };
        assert!(neg_alpha.validate(2).is_err());
    }

    #[test]
    fn certified_factors() {
        let m = ConstraintSystem::Matrix {
            a: vec![vec![int(1)], vec![int(2)]],
            b: vec![int(1), int(1)],
        };
        assert_eq!(m.certified_factor(), rat(1, 3));
        assert_eq!(simplex().certified_factor(), rat(1, 2));
        let mix = ConstraintSystem::Minkowski {
            coeffs: vec![int(1), int(1)],
            terms: vec![m, simplex()],
        };
        assert_eq!(mix.certified_factor(), rat(1, 3));
    }
}
