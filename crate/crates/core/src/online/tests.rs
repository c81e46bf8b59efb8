use super::*;
use crate::constraints::{ConstraintSystem, SubmodularOracle};
use crate::model::{interim_of_policy, scale_interim, RewardModel};
use crate::offline::solve_offline;
use crate::{int, rat};

fn knapsack(a: Vec<Rational>, b: Rational) -> ConstraintSystem {
    ConstraintSystem::Matrix { a: vec![a], b: vec![b] }
}

fn e1() -> Instance {
    epsilon_family(rat(1, 2))
}

fn epsilon_family(eps: Rational) -> Instance {
    let high = Rational::from_integer(1.into()) / &eps;
    Instance::new(
        RewardModel::independent(vec![
            vec![(int(1), int(1))],
            vec![(int(0), int(1) - &eps), (high, eps)],
        ])
        .unwrap(),
        knapsack(vec![int(1), int(1)], int(1)),
    )
    .unwrap()
}

fn e2() -> Instance {
    Instance::new(
        RewardModel::independent(vec![
            vec![(int(1), rat(1, 2)), (int(3), rat(1, 2))],
            vec![(int(2), int(1))],
        ])
        .unwrap(),
        ConstraintSystem::Polymatroid(SubmodularOracle::UniformRank { rank: int(1) }),
    )
    .unwrap()
}

fn interim(instance: &Instance, levels: Vec<Vec<Rational>>) -> InterimAllocation {
    InterimAllocation::from_levels(&instance.rewards, levels).unwrap()
}

#[test]
fn e1_stage_two_capacity() {
    let inst = e1();
    let w = solve_offline(&inst).unwrap().interim;
    let half = scale_interim(&w, &rat(1, 2)).unwrap();
    assert_eq!(half.coordinate(0), &[rat(1, 4)]);
    let h = h_next(&inst, 1, &half, 0).unwrap();
    assert_eq!(h, Capacity::Finite(rat(3, 4)));
    // Lower bound 0.5 b / a_2 from the single-row argument.
    assert!(Capacity::Finite(rat(1, 2)) != h && h.admits(&rat(1, 2)));
}

#[test]
fn empty_prefix_capacity() {
    let inst = Instance::new(
        RewardModel::independent(vec![vec![(int(1), int(1))]]).unwrap(),
        knapsack(vec![int(1)], int(1)),
    )
    .unwrap();
    let q = InterimAllocation::zeros(&inst.rewards);
    assert_eq!(h_next(&inst, 0, &q, 0).unwrap(), Capacity::Finite(int(1)));
}

#[test]
fn zero_column_gives_infinite_capacity() {
    let inst = Instance::new(
        RewardModel::independent(vec![vec![(int(1), int(1))]; 2]).unwrap(),
        knapsack(vec![int(1), int(0)], int(1)),
    )
    .unwrap();
    let q = interim(&inst, vec![vec![int(1)], vec![int(5)]]);
    assert_eq!(h_next(&inst, 1, &q, 0).unwrap(), Capacity::Infinite);
    assert!(sequential_failure(&inst, &q).unwrap().is_none());
    assert!(check_implementable_direct(&inst, &q).unwrap());
}

#[test]
fn capacity_is_monotone_in_commitments() {
    let inst = e1();
    let low = interim(&inst, vec![vec![rat(1, 4)], vec![int(0), int(0)]]);
    let high = interim(&inst, vec![vec![rat(1, 2)], vec![int(0), int(0)]]);
    let h_low = h_next(&inst, 1, &low, 0).unwrap();
    let h_high = h_next(&inst, 1, &high, 0).unwrap();
    assert_eq!(h_low, Capacity::Finite(rat(3, 4)));
    assert_eq!(h_high, Capacity::Finite(rat(1, 2)));
}

#[test]
fn e1_half_prophet_is_implementable() {
    let inst = e1();
    let w = solve_offline(&inst).unwrap().interim;
    let half = scale_interim(&w, &rat(1, 2)).unwrap();
    let cert = check_implementable_sequential(&inst, &half).unwrap();
    let ImplementabilityCertificate::Implementable(policy) = cert else {
        panic!("expected implementable");
    };
    assert!(interim_of_policy(&inst.rewards, &policy).unwrap().dominates(&half));
    assert!(policy_feasible(&inst, &policy).unwrap());
    assert!(check_implementable_direct(&inst, &half).unwrap());
}

#[test]
fn e1_full_prophet_fails_at_stage_two() {
    let inst = e1();
    let w = solve_offline(&inst).unwrap().interim;
    let cert = check_implementable_sequential(&inst, &w).unwrap();
    assert_eq!(
        cert,
        ImplementabilityCertificate::NotImplementable(StageFailure {
            stage: 2,
            reward_index: 1,
            reward: int(2),
            demand: int(1),
            capacity: rat(1, 2),
        })
    );
    assert!(!check_implementable_direct(&inst, &w).unwrap());
    assert!(matches!(construct_policy(&inst, &w), Err(Error::NotImplementable)));
}

#[test]
fn exhausted_capacity() {
    let inst = e1();
    let q = interim(&inst, vec![vec![int(1)], vec![int(0), rat(1, 10)]]);
    let Some(f) = sequential_failure(&inst, &q).unwrap() else {
        panic!("expected a failure");
    };
    assert_eq!((f.stage, f.capacity), (2, int(0)));
    assert!(!check_implementable_direct(&inst, &q).unwrap());
}

#[test]
fn zero_interim_is_implementable() {
    let inst = e1();
    let q = InterimAllocation::zeros(&inst.rewards);
    let cert = check_implementable_sequential(&inst, &q).unwrap();
    assert!(cert.is_implementable());
    assert!(check_implementable_direct(&inst, &q).unwrap());
}

#[test]
fn e2_half_prophet_policy() {
    let inst = e2();
    let w = solve_offline(&inst).unwrap().interim;
    let half = scale_interim(&w, &rat(1, 2)).unwrap();
    assert_eq!(half.coordinate(0), &[int(0), rat(1, 2)]);
    let policy = construct_policy(&inst, &half).unwrap();
    assert!(interim_of_policy(&inst.rewards, &policy).unwrap().dominates(&half));
    assert!(policy.get(&[1]).unwrap() >= &rat(1, 2));
}

#[test]
fn on_line_optima() {
    let e1 = solve_online(&e1()).unwrap();
    assert_eq!(e1.value, int(1));
    assert_eq!(e1.policy.expected_value(&self::e1().rewards).unwrap(), int(1));
    assert_eq!(solve_online(&e2()).unwrap().value, rat(5, 2));
    let eps = epsilon_family(rat(1, 4));
    assert_eq!(solve_online(&eps).unwrap().value, int(1));
    assert_eq!(solve_offline(&eps).unwrap().value, rat(7, 4));
}

#[test]
fn joint_models_use_direct_check_only() {
    let inst = Instance::new(
        RewardModel::joint(vec![
            (vec![int(1), int(2)], rat(1, 2)),
            (vec![int(1), int(0)], rat(1, 2)),
        ])
        .unwrap(),
        knapsack(vec![int(1), int(1)], int(1)),
    )
    .unwrap();
    let w = solve_offline(&inst).unwrap().interim;
    let half = scale_interim(&w, &rat(1, 2)).unwrap();
    assert!(matches!(
        sequential_failure(&inst, &half),
        Err(Error::Unsupported(_))
    ));
    assert!(check_implementable_direct(&inst, &half).unwrap());
    assert_eq!(solve_online(&inst).unwrap().value, int(1));
}

#[test]
fn infeasible_policy_detected() {
    let inst = e1();
    let mut policy = OnlinePolicy::zeros(&inst.rewards);
    policy.stages[0].insert(vec![0], int(1));
    policy.stages[1].insert(vec![0, 1], rat(1, 2));
    assert!(!policy_feasible(&inst, &policy).unwrap());
    policy.stages[1].insert(vec![0, 1], int(0));
    assert!(policy_feasible(&inst, &policy).unwrap());
}

#[test]
fn minkowski_on_line_value_is_additive_on_e1_rewards() {
    let simplex = ConstraintSystem::Polymatroid(SubmodularOracle::UniformRank { rank: int(1) });
    let rewards = e1().rewards;
    let single = Instance::new(rewards.clone(), simplex.clone()).unwrap();
    let sum = Instance::new(
        rewards,
        ConstraintSystem::Minkowski {
            coeffs: vec![int(1), int(1)],
            terms: vec![simplex.clone(), simplex],
        },
    )
    .unwrap();
    let one = solve_online(&single).unwrap().value;
    assert_eq!(solve_online(&sum).unwrap().value, one * int(2));
    assert_eq!(
        solve_offline(&sum).unwrap().value,
        solve_offline(&single).unwrap().value * int(2)
    );
}

#[test]
fn prooflab_chain_on_rank_two() {
    let inst = Instance::new(
        RewardModel::independent(vec![
            vec![(int(0), rat(1, 2)), (int(2), rat(1, 2))],
            vec![(int(1), rat(1, 3)), (int(3), rat(2, 3))],
            vec![(int(1), int(1))],
        ])
        .unwrap(),
        ConstraintSystem::OnlinePolymatroid(SubmodularOracle::G1 { cap: int(3) }),
    )
    .unwrap();
    let w = solve_offline(&inst).unwrap().interim;
    for i in 0..3 {
        for k in 0..inst.rewards.support(i).len() {
            let v = prooflab_build(&inst, i, k, &w).unwrap().solve().unwrap();
            let (p, pp, pl, pr) = (
                v.p.clone().unwrap(),
                v.p_prime.clone().unwrap(),
                v.p_ell.clone().unwrap(),
                v.p_r.clone().unwrap(),
            );
            assert_eq!(p, pp, "stage {i} candidate {k}");
            assert!(pl <= pp);
            assert_eq!(pl, pr);
            assert!(pr >= v.half_g);
        }
    }
}

#[test]
fn prooflab_refuses_matrix_systems() {
    let inst = e1();
    let w = solve_offline(&inst).unwrap().interim;
    assert!(matches!(
        prooflab_build(&inst, 0, 0, &w),
        Err(Error::Unsupported(_))
    ));
}
