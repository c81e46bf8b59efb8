//! The four stage-`i+1` LPs used to bound `h_{i+1}(½W*)` from below for
//! on-line polymatroids, built explicitly so their optima can be compared.
//!
//! All four share the interim rows `E[q_j | r_j] = ½W*_j(r_j)` (at equality)
//! and evaluate `g` with the candidate reward `r̂_{i+1}` fixed.
//!
//! * `p`: `max E[z]` s.t. `Σ_I q + z ≤ g(I+{i+1})` (all `I ⊆ [i]`), `Σ_I q ≤ g(I)`.
//! * `p_prime`: `q = q′ + q″`, plus `Σ_I q″ ≤ g(I+{i+1}) − g({i+1})`.
//! * `p_ell`: `p_prime` without `z`, objective `g({i+1}) − E[Σ_j q′_j]`.
//! * `p_r`: `p_ell` without the `Σ_I q ≤ g(I)` family.

use num_traits::Zero;

use super::builder::{ColKey, Family, HistoryLp};
use super::add_interim_rows;
use crate::constraints::{ConstraintSystem, IndexSet};
use crate::error::{Error, Result};
use crate::lp::{LpProblem, LpSolution, Relation};
use crate::model::{enumerate_histories, scale_interim, Instance, InterimAllocation};
use crate::{rat, Rational};

#[derive(Clone, Debug)]
pub struct ProofLab {
    pub p: LpProblem<Rational>,
    pub p_prime: LpProblem<Rational>,
    pub p_ell: LpProblem<Rational>,
    pub p_r: LpProblem<Rational>,
    /// `g({i+1}, r̂_{i+1})`, the constant term of the `p_ell`/`p_r` objectives.
    pub offset: Rational,
}

/// Optimal values (`None` when infeasible), offsets already added.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofLabValues {
    pub p: Option<Rational>,
    pub p_prime: Option<Rational>,
    pub p_ell: Option<Rational>,
    pub p_r: Option<Rational>,
    /// `½ g({i+1}, r̂_{i+1})`.
    pub half_g: Rational,
}

impl ProofLab {
    pub fn solve(&self) -> Result<ProofLabValues> {
        let value = |lp: &LpProblem<Rational>, offset: &Rational| -> Result<Option<Rational>> {
            match lp.solve()? {
                LpSolution::Optimal { value, .. } => Ok(Some(value + offset)),
                LpSolution::Infeasible => Ok(None),
                LpSolution::Unbounded => Err(Error::Unbounded),
            }
        };
        let zero = Rational::zero();
        Ok(ProofLabValues {
            p: value(&self.p, &zero)?,
            p_prime: value(&self.p_prime, &zero)?,
            p_ell: value(&self.p_ell, &self.offset)?,
            p_r: value(&self.p_r, &self.offset)?,
            half_g: self.offset.clone() * rat(1, 2),
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Variant {
    P,
    PPrime,
    PEll,
    PR,
}

impl Variant {
    fn split(self) -> bool {
        self != Variant::P
    }

    fn has_z(self) -> bool {
        matches!(self, Variant::P | Variant::PPrime)
    }
}

/// Builds the four LPs at stage `i` (0-based count of committed coordinates)
/// for candidate `support(i)[candidate]`.
pub fn prooflab_build(
    instance: &Instance,
    i: usize,
    candidate: usize,
    w_star: &InterimAllocation,
) -> Result<ProofLab> {
    let g = match &instance.constraints {
        ConstraintSystem::Polymatroid(g) | ConstraintSystem::OnlinePolymatroid(g) => g,
        other => {
            return Err(Error::Unsupported(format!(
                "proof-lab LPs need a polymatroid system, got {}",
                other.kind()
            )))
        }
    };
    if !instance.rewards.is_independent() {
        return Err(Error::Unsupported(
            "proof-lab LPs are defined for independent reward models".into(),
        ));
    }
    let model = &instance.rewards;
    let n = instance.n();
    if i >= n {
        return Err(Error::Structural(format!("stage {i} must be below n = {n}")));
    }
    let r_hat = model
        .support(i)
        .get(candidate)
        .ok_or_else(|| Error::Structural(format!("candidate {candidate} outside support")))?
        .clone();
    let target = scale_interim(w_star, &rat(1, 2))?;
    let mut singleton_values = vec![Rational::zero(); i + 1];
    singleton_values[i] = r_hat.clone();
    let offset = g.eval(n, IndexSet::singleton(i), &singleton_values)?;

    // Right-hand sides per stage-i history and subset, shared by all four LPs.
    let prefixes = enumerate_histories(model, i, instance.budget)?;
    let mut table = Vec::with_capacity(prefixes.len());
    for h in &prefixes {
        let mut values = model.values(&h.index);
        values.push(r_hat.clone());
        let mut per_set = Vec::new();
        for set in IndexSet::all_subsets(i) {
            let with = g.eval(n, set.with(i), &values)?;
            let alone = if set.is_empty() {
                Rational::zero()
            } else {
                g.eval(n, set, &values)?
            };
            per_set.push((set, with, alone));
        }
        table.push(per_set);
    }

    let build = |variant: Variant| -> Result<LpProblem<Rational>> {
        let mut lp = HistoryLp::new(instance.budget);
        let families: &[Family] = if variant.split() {
            &[Family::Q, Family::Q2]
        } else {
            &[Family::Q]
        };
        for j in 1..=i {
            for h in enumerate_histories(model, j, instance.budget)? {
                for &fam in families {
                    let c = lp.col(ColKey::new(fam, Vec::new(), j - 1, h.index.clone()));
                    if !variant.has_z() && fam == Family::Q {
                        lp.add_objective(c, -h.prob.clone());
                    }
                }
            }
        }
        for (h, per_set) in prefixes.iter().zip(&table) {
            let z = if variant.has_z() {
                let c = lp.col(ColKey::new(Family::Q, Vec::new(), i, h.index.clone()));
                lp.add_objective(c, h.prob.clone());
                Some(c)
            } else {
                None
            };
            for (set, with, alone) in per_set {
                let mut terms = Vec::new();
                let mut second = Vec::new();
                for j in set.iter() {
                    let hist = h.index[..=j].to_vec();
                    for &fam in families {
                        let c = lp.col(ColKey::new(fam, Vec::new(), j, hist.clone()));
                        terms.push((c, Rational::from_integer(1.into())));
                        if fam == Family::Q2 {
                            second.push((c, Rational::from_integer(1.into())));
                        }
                    }
                }
                let mut capacity = terms.clone();
                if let Some(z) = z {
                    capacity.push((z, Rational::from_integer(1.into())));
                }
                lp.add_row(capacity, Relation::Le, with.clone())?;
                if set.is_empty() {
                    continue;
                }
                if variant.split() {
                    lp.add_row(second, Relation::Le, with.clone() - &offset)?;
                }
                if variant != Variant::PR {
                    lp.add_row(terms, Relation::Le, alone.clone())?;
                }
            }
        }
        add_interim_rows(&mut lp, instance, &target, i, Relation::Eq, families)?;
        Ok(lp.build()?.0)
    };

    Ok(ProofLab {
        p: build(Variant::P)?,
        p_prime: build(Variant::PPrime)?,
        p_ell: build(Variant::PEll)?,
        p_r: build(Variant::PR)?,
        offset,
    })
}
