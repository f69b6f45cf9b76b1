mod common;

use autobid_poa::auction::{
    eta_gaps, normalize_targets, opt_representatives, optimal_allocation, optimal_allocation_with_limit, rightful_winners,
    run_auctions, Instance, TieBreak,
};
use autobid_poa::equilibrium::check_feasible;
use autobid_poa::error::Error;
use autobid_poa::profile::Profile;
use autobid_poa::valuation::{bundle_mask, Valuation};
use autobid_poa::welfare::{liquid_welfare, proxy_instance};
use proptest::prelude::*;

fn value() -> impl Strategy<Value = f64> {
    (0u32..=20).prop_map(|k| k as f64 * 0.05)
}

fn valuation(m: usize) -> impl Strategy<Value = Valuation> {
    prop_oneof![
        prop::collection::vec(value(), m).prop_map(Valuation::additive),
        prop::collection::vec(prop::collection::vec(value(), m), 1..=3).prop_map(Valuation::xos),
    ]
}

fn instance(max_n: usize, max_m: usize) -> impl Strategy<Value = Instance> {
    (1..=max_n, 1..=max_m).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(valuation(m), n),
            prop::collection::vec(prop_oneof![Just(0.0), Just(1.0), 0.0..=1.0f64], n),
            prop::collection::vec(prop_oneof![Just(1.0), 0.5..2.0f64], n),
            prop::collection::vec(prop_oneof![Just(f64::INFINITY), 0.05..2.0f64], n),
            prop::collection::vec(prop_oneof![Just(0.0), 0.0..0.5f64], m),
        )
            .prop_map(|(vals, sigmas, taus, budgets, reserves)| {
                let taus: Vec<f64> = taus.iter().zip(&sigmas).map(|(t, s)| if s * t > 1.0 { 1.0 } else { *t }).collect();
                Instance::simple(vals, sigmas)
                    .unwrap()
                    .with_taus(taus)
                    .unwrap()
                    .with_budgets(budgets)
                    .unwrap()
                    .with_reserves(reserves)
                    .unwrap()
            })
    })
}

fn bids_for(n: usize, m: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(value(), m), n)
}

#[test]
fn three_by_three_opt_matches_oracle() {
    let inst = Instance::simple(
        vec![
            Valuation::additive(vec![0.3, 0.9, 0.1]),
            Valuation::additive(vec![0.5, 0.2, 0.6]),
            Valuation::additive(vec![0.4, 0.4, 0.4]),
        ],
        vec![1.0, 0.0, 0.5],
    )
    .unwrap();
    assert!((optimal_allocation(&inst).unwrap().value - common::brute_opt(&inst)).abs() < 1e-12);
    assert!((optimal_allocation(&inst).unwrap().value - 2.0).abs() < 1e-12);
}

#[test]
fn budgets_cap_liquid_welfare() {
    let inst = Instance::simple(vec![Valuation::additive(vec![1.0, 1.0])], vec![1.0]).unwrap().with_budgets(vec![0.5]).unwrap();
    assert_eq!(optimal_allocation(&inst).unwrap().value, 0.5);
    let lw = liquid_welfare(&inst, &Profile::pure(vec![vec![0.2, 0.2]])).unwrap();
    assert_eq!(lw, 0.5);
}

#[test]
fn enumeration_limit_is_reported() {
    let inst = Instance::simple(vec![Valuation::additive(vec![1.0; 6]); 3], vec![1.0; 3]).unwrap();
    match optimal_allocation_with_limit(&inst, 100) {
        Err(Error::EnumerationLimit { needed, limit }) => {
            assert_eq!(needed, 4096.0);
            assert_eq!(limit, 100);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn invalid_inputs_are_rejected() {
    assert!(Instance::simple(vec![Valuation::additive(vec![1.0])], vec![1.5]).is_err());
    assert!(Instance::simple(vec![Valuation::additive(vec![1.0]), Valuation::additive(vec![1.0, 2.0])], vec![1.0, 1.0]).is_err());
    assert!(Instance::simple(vec![Valuation::additive(vec![-1.0])], vec![1.0]).is_err());
    assert!(bundle_mask(&[3], 2).is_err());
    let inst = Instance::simple(vec![Valuation::additive(vec![1.0])], vec![1.0]).unwrap();
    assert!(inst.with_reserves(vec![-0.1]).is_err());
}

#[test]
fn reserve_at_value_is_infeasible_gap() {
    let inst = Instance::simple(vec![Valuation::additive(vec![0.5])], vec![1.0]).unwrap().with_reserves(vec![0.5]).unwrap();
    assert!(matches!(eta_gaps(&inst), Err(Error::InfeasibleReserve { .. })));
    let ok = Instance::simple(vec![Valuation::additive(vec![0.5])], vec![1.0]).unwrap().with_reserves(vec![0.2]).unwrap();
    assert!((eta_gaps(&ok).unwrap().eta - 0.4).abs() < 1e-12);
}

#[test]
fn representatives_of_xos_example() {
    let v = Valuation::xos(vec![vec![0.01, 0.0], vec![0.0, 1.0], vec![0.005, 1.0]]);
    let inst = Instance::simple(vec![v, Valuation::xos(vec![vec![0.0025, 0.0], vec![0.0, 0.0025]])], vec![1.0, 1.0]).unwrap();
    let alloc = optimal_allocation(&inst).unwrap();
    assert!((alloc.value - 1.005).abs() < 1e-12);
    let reps = opt_representatives(&inst, &alloc).unwrap();
    assert_eq!(reps[0], vec![0.005, 1.0]);
    assert_eq!(rightful_winners(&inst).unwrap(), vec![0, 0]);
}

#[test]
fn tie_rules_pick_winners() {
    let inst = Instance::simple(vec![Valuation::additive(vec![1.0]); 2], vec![1.0; 2])
        .unwrap()
        .with_tiebreak(TieBreak { default: vec![vec![1, 0]], ..TieBreak::default() })
        .unwrap();
    assert_eq!(run_auctions(&inst, &[vec![0.4], vec![0.4]]).winner, vec![Some(1)]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn auction_outcomes_follow_the_rules((inst, bids) in instance(3, 3).prop_flat_map(|i| { let (n, m) = (i.n, i.m); (Just(i), bids_for(n, m)) })) {
        let out = run_auctions(&inst, &bids);
        let oracle = common::brute_fpa(&inst, &bids);
        for j in 0..inst.m {
            let top = (0..inst.n).map(|i| bids[i][j]).filter(|b| *b >= inst.reserves[j]).fold(f64::NEG_INFINITY, f64::max);
            match out.winner[j] {
                None => {
                    prop_assert!(top == f64::NEG_INFINITY);
                    prop_assert_eq!(out.price[j], 0.0);
                }
                Some(w) => {
                    prop_assert_eq!(bids[w][j], top);
                    prop_assert_eq!(out.price[j], bids[w][j]);
                }
            }
            prop_assert_eq!(out.winner[j].map(|w| (w, out.price[j])), oracle[j]);
        }
    }

    #[test]
    fn valuations_are_monotone(v in valuation(4)) {
        for s in 0u64..16 {
            for t in 0u64..16 {
                if s & !t == 0 {
                    prop_assert!(v.value(s) <= v.value(t) + 1e-12);
                }
            }
            prop_assert!((v.value(s) - common::value_of(&v, &common::items_of(s, 4))).abs() < 1e-12);
        }
    }

    #[test]
    fn opt_matches_oracle_and_dominates_pure_profiles(
        (inst, bids) in instance(3, 3).prop_flat_map(|i| { let (n, m) = (i.n, i.m); (Just(i), bids_for(n, m)) })
    ) {
        let opt = optimal_allocation(&inst).unwrap().value;
        prop_assert!((opt - common::brute_opt(&inst)).abs() < 1e-12);
        let lw = liquid_welfare(&inst, &Profile::pure(bids.clone())).unwrap();
        prop_assert!(opt >= lw - 1e-12);
        prop_assert!((lw - common::brute_lw(&inst, &bids)).abs() < 1e-12);
    }

    #[test]
    fn representatives_are_exact_and_supporting(inst in instance(3, 4)) {
        let alloc = optimal_allocation(&inst).unwrap();
        let reps = opt_representatives(&inst, &alloc).unwrap();
        for i in 0..inst.n {
            let v = &inst.valuations[i];
            let b = alloc.bundle(i);
            let on: f64 = common::items_of(b, inst.m).iter().map(|&j| reps[i][j]).sum();
            prop_assert!((on - v.value(b)).abs() <= 1e-9);
            for s in 0u64..1 << inst.m {
                let sum: f64 = common::items_of(s, inst.m).iter().map(|&j| reps[i][j]).sum();
                prop_assert!(sum <= common::value_of(v, &common::items_of(s, inst.m)) + 1e-9);
            }
        }
    }

    #[test]
    fn proxy_preserves_opt_and_is_idempotent(
        (inst, bids) in instance(3, 3).prop_flat_map(|i| { let (n, m) = (i.n, i.m); (Just(i), bids_for(n, m)) })
    ) {
        let inst = normalize_targets(&inst).unwrap();
        let prof = Profile::pure(bids);
        let proxy = proxy_instance(&inst, &prof).unwrap();
        prop_assert!(!proxy.budgeted());
        prop_assert!((common::brute_opt(&proxy) - common::brute_opt(&inst)).abs() <= 1e-12);
        let twice = proxy_instance(&proxy, &prof).unwrap();
        prop_assert_eq!(&twice, &proxy);
    }

    #[test]
    fn normalized_targets_keep_opt_and_lw(
        (inst, bids) in instance(3, 3).prop_flat_map(|i| { let (n, m) = (i.n, i.m); (Just(i), bids_for(n, m)) })
    ) {
        let norm = normalize_targets(&inst).unwrap();
        prop_assert!(norm.taus.iter().all(|t| *t == 1.0));
        prop_assert!((optimal_allocation(&norm).unwrap().value - optimal_allocation(&inst).unwrap().value).abs() <= 1e-12);
        let prof = Profile::pure(bids);
        prop_assert!((liquid_welfare(&norm, &prof).unwrap() - liquid_welfare(&inst, &prof).unwrap()).abs() <= 1e-12);
        // feasibility is unchanged too
        prop_assert_eq!(check_feasible(&norm, &prof).unwrap().feasible, check_feasible(&inst, &prof).unwrap().feasible);
    }

    #[test]
    fn capped_xos_stays_fractionally_subadditive(v in valuation(4), cap in 0.05..3.0f64) {
        let c = v.budget_cap(cap).unwrap();
        prop_assert!(c.is_fractionally_subadditive(4));
        for t in 1u64..16 {
            let vt = common::value_of(&c, &common::items_of(t, 4));
            for cover in common::covers(t) {
                let sum: f64 = cover.iter().map(|(s, w)| w * common::value_of(&c, &common::items_of(*s, 4))).sum();
                prop_assert!(vt <= sum + 1e-12, "t={t:b} cover={cover:?}");
            }
        }
    }

    #[test]
    fn json_round_trips(inst in instance(3, 3)) {
        let back = Instance::from_json(&inst.to_json()).unwrap();
        prop_assert_eq!(back, inst);
    }
}
