//! Exact-rational laboratory for prophet inequalities on polyhedral on-line
//! selection problems.
//!
//! Requests `1..n` arrive in order; after seeing reward `r_j` the decision
//! maker fixes a service level `q_j`, and every prefix of service levels must
//! stay inside a polyhedron (a nonnegative matrix system, a polymatroid, an
//! on-line polymatroid whose rank function depends on realized rewards, or a
//! Minkowski sum of those). The crate solves the on-line and off-line (prophet)
//! optima as exact linear programs, decides implementability of interim
//! allocations two independent ways, and runs randomized campaigns that check
//! the scaled-prophet bounds with zero tolerance.
//!
//! The LP engine in [`lp`] is generic over [`Scalar`]; everything above it is
//! fixed to [`Rational`].

pub mod constraints;
pub mod error;
pub mod format;
pub mod lp;
pub mod model;
pub mod offline;
pub mod online;
pub mod scalar;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::{int, parse_rational, rat, Scalar};

/// Arbitrary-precision exact fraction; the scalar of every model-level value.
pub type Rational = num_rational::BigRational;
/// LP over [`Rational`].
pub type Lp = lp::LpProblem<Rational>;
/// LP outcome over [`Rational`].
pub type LpOutcome = lp::LpSolution<Rational>;

pub use constraints::{ConstraintSystem, IndexSet, SubmodularOracle};
pub use model::{
    Budget, History, Instance, InterimAllocation, OfflineAllocation, OnlinePolicy, RewardModel,
};
