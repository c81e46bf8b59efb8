use proptest::prelude::*;

use prophet_core::format::{emit_instance, instance_value, parse_instance};
use prophet_core::model::{scale_interim, Budget};
use prophet_core::offline::solve_offline;
use prophet_core::online::{check_implementable_direct, solve_online};
use prophet_core::verify::{
    check_ratio, default_params, evaluate, generate_instance, recheck, run_campaign, run_trial,
    worked, Counterexample, GeneratorParams, KindChoice, Law, TrialSpec, Verdict,
    VerificationReport,
};
use prophet_core::{int, rat, ConstraintSystem, Instance, SubmodularOracle};

fn simplex() -> ConstraintSystem {
    ConstraintSystem::Polymatroid(SubmodularOracle::UniformRank { rank: int(1) })
}

#[test]
fn forced_failure_ships_a_replayable_counterexample() {
    let rec = check_ratio(&worked::e1(), int(1)).unwrap();
    assert_eq!(rec.verdict, Verdict::Fail);
    let cx = rec.counterexample.clone().unwrap();
    assert!(recheck(&cx).unwrap());

    // Through JSON and back, the payload still replays.
    let text = serde_json::to_string(&cx).unwrap();
    let back: Counterexample = serde_json::from_str(&text).unwrap();
    assert!(recheck(&back).unwrap());

    // A tampered payload is not confirmed.
    let mut forged = cx.clone();
    forged.violated.rhs = rat(5, 4);
    assert!(!recheck(&forged).unwrap());
}

#[test]
fn passing_trials_carry_no_counterexample() {
    let rec = check_ratio(&worked::e1(), rat(2, 3)).unwrap();
    assert_eq!(rec.verdict, Verdict::Pass);
    assert_eq!(rec.margin, Some(int(0)));
    assert!(rec.counterexample.is_none());
}

#[test]
fn reports_are_byte_identical_per_seed() {
    for law in Law::ALL {
        let p = default_params(law);
        let a = run_campaign(law, 8, 99, &p).unwrap();
        let b = run_campaign(law, 8, 99, &p).unwrap();
        assert_eq!(a.to_json(), b.to_json(), "{}", law.name());
        assert_eq!(a.to_table(), b.to_table());
        assert_eq!(VerificationReport::from_json(&a.to_json()).unwrap(), a);
        let c = run_campaign(law, 8, 100, &p).unwrap();
        assert_ne!(a.to_json(), c.to_json());
    }
}

#[test]
fn table_rows_mirror_records() {
    let r = run_campaign(Law::Correlated, 5, 4, &default_params(Law::Correlated)).unwrap();
    let table = r.to_table();
    for (line, t) in table.lines().skip(1).zip(&r.trials) {
        let cols: Vec<&str> = line.split('\t').collect();
        assert_eq!(cols.len(), 10);
        assert_eq!(cols[1], t.seed.to_string());
        assert_eq!(cols[5], t.z_off.as_ref().unwrap().to_string());
        assert_eq!(cols[9], "PASS");
        assert!(!line.contains('.'));
    }
}

#[test]
fn k_law_on_two_rows() {
    let inst = Instance::new(
        worked::e1().rewards,
        ConstraintSystem::Matrix {
            a: vec![vec![int(1), int(0)], vec![int(0), int(1)]],
            b: vec![int(1), int(1)],
        },
    )
    .unwrap();
    let rec = run_trial(0, 0, &inst, &TrialSpec::new(Law::K)).unwrap();
    assert_eq!(rec.factor, rat(1, 3));
    assert_eq!(rec.verdict, Verdict::Pass);
}

#[test]
fn zero_rewards_pass_trivially() {
    let inst = Instance::new(
        prophet_core::RewardModel::independent(vec![vec![(int(0), int(1))]; 2]).unwrap(),
        ConstraintSystem::Matrix {
            a: vec![vec![int(1), int(1)]],
            b: vec![int(1)],
        },
    )
    .unwrap();
    let rec = run_trial(0, 0, &inst, &TrialSpec::new(Law::K)).unwrap();
    assert_eq!((rec.z_off, rec.z_on), (Some(int(0)), Some(int(0))));
    assert_eq!(rec.verdict, Verdict::Pass);
}

#[test]
fn minkowski_of_two_simplices_doubles() {
    let rewards = worked::e1().rewards;
    let single = Instance::new(rewards.clone(), simplex()).unwrap();
    let double = Instance::new(
        rewards.clone(),
        ConstraintSystem::Minkowski {
            coeffs: vec![int(1), int(1)],
            terms: vec![simplex(), simplex()],
        },
    )
    .unwrap();
    let one = solve_offline(&single).unwrap().value;
    assert_eq!(solve_offline(&double).unwrap().value, one * int(2));
    let rec = run_trial(0, 0, &double, &TrialSpec::new(Law::Minkowski)).unwrap();
    assert_eq!(rec.verdict, Verdict::Pass);

    // α = (1, 0) is the first term alone.
    let degenerate = Instance::new(
        rewards,
        ConstraintSystem::Minkowski {
            coeffs: vec![int(1), int(0)],
            terms: vec![simplex(), worked::e1().constraints],
        },
    )
    .unwrap();
    assert_eq!(solve_offline(&degenerate).unwrap().value, solve_offline(&single).unwrap().value);
    assert_eq!(solve_online(&degenerate).unwrap().value, solve_online(&single).unwrap().value);
}

#[test]
fn polymatroid_trivial_oracle() {
    let inst = Instance::new(
        worked::e1().rewards,
        ConstraintSystem::Polymatroid(SubmodularOracle::UniformRank { rank: int(0) }),
    )
    .unwrap();
    let rec = run_trial(0, 0, &inst, &TrialSpec::new(Law::Polymatroid)).unwrap();
    assert_eq!(rec.z_off, Some(int(0)));
    assert_eq!(rec.verdict, Verdict::Pass);
}

#[test]
fn single_coordinate_joint_model_is_exact() {
    let inst = Instance::new(
        prophet_core::RewardModel::joint(vec![(vec![int(1)], rat(1, 3)), (vec![int(2)], rat(2, 3))])
            .unwrap(),
        ConstraintSystem::Matrix {
            a: vec![vec![int(1)]],
            b: vec![int(1)],
        },
    )
    .unwrap();
    let rec = run_trial(0, 0, &inst, &TrialSpec::new(Law::Correlated)).unwrap();
    assert_eq!(rec.factor, int(1));
    assert_eq!(rec.z_on, rec.z_off);
}

#[test]
fn lemmas_refuse_matrix_systems() {
    let spec = TrialSpec {
        stage: Some(0),
        candidate: Some(0),
        ..TrialSpec::new(Law::Lemmas234)
    };
    assert!(evaluate(&worked::e1(), &spec).is_err());
}

fn any_params() -> impl Strategy<Value = GeneratorParams> {
    (
        any::<u64>(),
        prop::sample::select(vec![
            KindChoice::Matrix,
            KindChoice::Polymatroid,
            KindChoice::OnlinePolymatroid,
            KindChoice::Minkowski,
        ]),
        1usize..=3,
    )
        .prop_map(|(seed, kind, n_max)| GeneratorParams {
            seed,
            kinds: vec![kind],
            n_max,
            ..GeneratorParams::default()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn instances_round_trip(params in any_params()) {
        let inst = generate_instance(&params).unwrap();
        let again = parse_instance(&emit_instance(&inst), Budget::default()).unwrap();
        prop_assert_eq!(&again, &inst);
        let value = prophet_core::format::instance_from_value(instance_value(&inst), Budget::default()).unwrap();
        prop_assert_eq!(value, inst);
    }

    #[test]
    fn prophet_dominates_online(params in any_params()) {
        let inst = generate_instance(&params).unwrap();
        let off = solve_offline(&inst).unwrap();
        let on = solve_online(&inst).unwrap();
        prop_assert!(on.value <= off.value);
        prop_assert!(on.value >= inst.constraints.certified_factor() * off.value.clone());
        prop_assert_eq!(off.interim.expected_value(&inst.rewards), off.value);
    }

    #[test]
    fn implementability_is_downward_closed(params in any_params(), a in 0i64..=4, b in 0i64..=4) {
        let inst = generate_instance(&params).unwrap();
        let w = solve_offline(&inst).unwrap().interim;
        let (lo, hi) = (a.min(b), a.max(b));
        let hi_ok = check_implementable_direct(&inst, &scale_interim(&w, &rat(hi, 4)).unwrap()).unwrap();
        let lo_ok = check_implementable_direct(&inst, &scale_interim(&w, &rat(lo, 4)).unwrap()).unwrap();
        prop_assert!(!hi_ok || lo_ok);
    }

    #[test]
    fn scaling_rewards_scales_values(params in any_params(), c in 1i64..=3) {
        let inst = generate_instance(&params).unwrap();
        prop_assume!(!inst.constraints.is_reward_dependent());
        let scaled = prophet_core::RewardModel::independent(
            (0..inst.n())
                .map(|j| {
                    inst.rewards.support(j).iter().zip(inst.rewards.marginal(j))
                        .map(|(v, p)| (v.clone() * int(c), p.clone()))
                        .collect()
                })
                .collect(),
        ).unwrap();
        let other = Instance::new(scaled, inst.constraints.clone()).unwrap();
        prop_assert_eq!(solve_offline(&other).unwrap().value, solve_offline(&inst).unwrap().value * int(c));
        prop_assert_eq!(solve_online(&other).unwrap().value, solve_online(&inst).unwrap().value * int(c));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// One knapsack row `a·x ≤ b`: the stage capacity left by `½ W*` is at
    /// least `b / (2 a_{i+1})` (only the inequality is asserted).
    #[test]
    fn single_row_capacity_floor(seed in any::<u64>()) {
        let params = GeneratorParams { seed, k_min: 1, k_max: 1, ..GeneratorParams::default() };
        let inst = generate_instance(&params).unwrap();
        let (a, b) = match &inst.constraints {
            ConstraintSystem::Matrix { a, b } => (a[0].clone(), b[0].clone()),
            _ => unreachable!(),
        };
        let w = solve_offline(&inst).unwrap().interim;
        let q = scale_interim(&w, &rat(1, 2)).unwrap();
        for i in 0..inst.n() {
            match prophet_core::online::h_next(&inst, i, &q, 0).unwrap() {
                prophet_core::online::Capacity::Finite(h) => {
                    prop_assert!(a[i] > int(0));
                    prop_assert!(h >= b.clone() / (a[i].clone() * int(2)), "stage {}: h = {}", i, h);
                }
                prophet_core::online::Capacity::Infinite => prop_assert_eq!(a[i].clone(), int(0)),
            }
        }
    }
}
