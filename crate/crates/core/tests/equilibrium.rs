mod common;

use autobid_poa::auction::Instance;
use autobid_poa::constructions::{build, Params, NAMES};
use autobid_poa::dynamics::best_response_dynamics;
use autobid_poa::equilibrium::{
    check_feasible, lw_lower_bound_check, pure_product, verify_ce_finite, verify_cce, verify_mne, well_supported, Basis,
    DeviationSet, Verdict, VerifyConfig,
};
use autobid_poa::error::Error;
use autobid_poa::profile::{deviation_stats, Atom, Component, Deviation, FiniteProfile, Profile, RowAtom};
use autobid_poa::valuation::Valuation;
use proptest::prelude::*;

const DELTAS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

fn grid(step: f64, top: f64) -> Vec<f64> {
    (0..=(top / step).round() as usize).map(|k| k as f64 * step).collect()
}

/// Every bid vector on `g^m`.
fn joint(g: &[f64], m: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..m {
        out = out.into_iter().flat_map(|p| g.iter().map(move |b| { let mut q = p.clone(); q.push(*b); q })).collect();
    }
    out
}

/// Whether agent `i` stays within ROI and budget after deviating to `dev`.
fn deviation_feasible(inst: &Instance, profile: &Profile, i: usize, dev: &Deviation) -> bool {
    let s = deviation_stats(inst, &profile.scenarios().unwrap(), i, dev).unwrap();
    inst.taus[i] * s.value[i] - s.payment[i] >= -1e-12 && inst.budgets[i] - s.payment[i] >= -1e-12
}

/// Zero, feasible pure grid deviations and feasible 50/50 mixtures of neighbours.
fn feasible_deviations(inst: &Instance, profile: &Profile, i: usize, g: &[f64]) -> Vec<Deviation> {
    let pures = joint(g, inst.m);
    let mut out = vec![Deviation::Pure { bids: vec![0.0; inst.m] }];
    for w in pures.windows(2) {
        out.push(Deviation::Pure { bids: w[1].clone() });
        out.push(Deviation::Mixed {
            atoms: vec![RowAtom { bids: w[0].clone(), prob: 0.5 }, RowAtom { bids: w[1].clone(), prob: 0.5 }],
        });
    }
    out.retain(|d| deviation_feasible(inst, profile, i, d));
    out
}

fn lw_residuals_hold(inst: &Instance, profile: &Profile, g: &[f64]) -> usize {
    let mut checked = 0;
    for i in 0..inst.n {
        for dev in feasible_deviations(inst, profile, i, g) {
            for delta in DELTAS {
                let r = lw_lower_bound_check(inst, profile, i, &dev, delta).unwrap();
                assert!(r >= -1e-9, "agent {i} delta {delta} dev {dev:?}: residual {r}");
                checked += 1;
            }
        }
    }
    checked
}

#[test]
fn constructions_are_feasible_verified_equilibria() {
    for name in NAMES {
        let c = build(name, &Params::new()).unwrap();
        assert!(check_feasible(&c.instance, &c.profile).unwrap().feasible, "{name}");
        let dev = DeviationSet::for_profile(&c.instance, &c.profile, 1e-3, &[]).unwrap();
        let r = verify_cce(&c.instance, &c.profile, &dev, &VerifyConfig::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Verified, "{name}: {}", r.note);
        let (ws, _) = well_supported(&c.instance, &c.profile).unwrap();
        assert_eq!(ws, c.well_supported_claim, "{name}");
    }
}

#[test]
fn individual_lw_bound_on_constructions() {
    let g = grid(0.05, 1.5);
    for name in NAMES {
        let c = build(name, &Params::new()).unwrap();
        let n = lw_residuals_hold(&c.instance, &c.profile, &g);
        assert!(n > 0, "{name}");
    }
}

#[test]
fn individual_lw_bound_with_own_strategy_on_mne() {
    let mut checked = 0;
    for name in NAMES {
        let c = build(name, &Params::new()).unwrap();
        let Profile::Product(p) = &c.profile else { continue };
        for (i, comp) in p.components.iter().enumerate() {
            let dev = match comp.clone() {
                Component::Finite { atoms } => Deviation::Mixed { atoms },
                Component::Parametric { draw, bids } => Deviation::Parametric { draw, bids },
            };
            let r = lw_lower_bound_check(&c.instance, &c.profile, i, &dev, 1.0).unwrap();
            assert!(r >= -1e-9, "{name} agent {i}: {r}");
            checked += 1;
        }
    }
    assert!(checked >= 4);
}

#[test]
fn individual_lw_bound_on_verified_dynamics_fixed_points() {
    let mut verified = 0;
    for seed in 0..80u64 {
        let k = seed as f64;
        let inst = Instance::simple(
            vec![
                Valuation::additive(vec![0.2 + 0.1 * (k % 5.0), 0.3]),
                Valuation::xos(vec![vec![0.5, 0.0], vec![0.1 * (k % 7.0), 0.4]]),
            ],
            vec![(k % 3.0) / 2.0, 1.0 - (k % 2.0)],
        )
        .unwrap()
        .with_budgets(vec![if seed % 2 == 0 { f64::INFINITY } else { 0.3 }, f64::INFINITY])
        .unwrap();
        let d = best_response_dynamics(&inst, 0.1, 40, seed).unwrap();
        if !d.converged {
            continue;
        }
        let prof = pure_product(d.profile.clone());
        let dev = DeviationSet::uniform(inst.n, inst.m, &d.grid);
        let r = verify_mne(&inst, &prof, &dev, &VerifyConfig::default()).unwrap();
        if r.verdict != Verdict::Verified {
            continue;
        }
        verified += 1;
        lw_residuals_hold(&inst, &prof, &d.grid);
    }
    assert!(verified >= 10, "only {verified} verified fixed points");
}

#[test]
fn non_product_profiles_are_not_mne_candidates() {
    let inst = Instance::simple(vec![Valuation::additive(vec![1.0]); 2], vec![1.0; 2]).unwrap();
    let prof = Profile::Finite(FiniteProfile {
        atoms: vec![Atom { bids: vec![vec![0.1], vec![0.0]], prob: 0.5 }, Atom { bids: vec![vec![0.0], vec![0.1]], prob: 0.5 }],
    });
    let dev = DeviationSet::uniform(2, 1, &[0.0, 0.1]);
    assert!(matches!(verify_mne(&inst, &prof, &dev, &VerifyConfig::default()), Err(Error::NotProduct)));
    assert!(verify_cce(&inst, &prof, &dev, &VerifyConfig::default()).is_ok());
}

#[test]
fn zero_reserve_profiles_are_well_supported() {
    let inst = Instance::simple(vec![Valuation::additive(vec![1.0, 0.5]); 2], vec![1.0; 2]).unwrap();
    let (ws, unsold) = well_supported(&inst, &Profile::pure(vec![vec![0.0, 0.0], vec![0.0, 0.0]])).unwrap();
    assert!(ws);
    assert_eq!(unsold, vec![0.0, 0.0]);
}

fn value() -> impl Strategy<Value = f64> {
    (1u32..=10).prop_map(|k| k as f64 * 0.1)
}

/// Budget-free additive instance with strictly positive reserves below the top value.
fn reserve_instance() -> impl Strategy<Value = Instance> {
    (2usize..=3, 1usize..=2).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(prop::collection::vec(value(), m), n),
            prop::collection::vec(prop_oneof![Just(0.0), Just(1.0), 0.0..=1.0f64], n),
            prop::collection::vec(0.1..0.99f64, m),
        )
            .prop_map(move |(vals, sigmas, etas)| {
                let reserves: Vec<f64> = (0..m)
                    .map(|j| {
                        let top = vals.iter().map(|r| r[j]).fold(0.0, f64::max);
                        ((etas[j] * top) / 0.1).floor() * 0.1
                    })
                    .collect();
                Instance::simple(vals.into_iter().map(Valuation::additive).collect(), sigmas)
                    .unwrap()
                    .with_reserves(reserves)
                    .unwrap()
            })
    })
}

fn finite_profile(n: usize, m: usize) -> impl Strategy<Value = FiniteProfile> {
    prop::collection::vec((prop::collection::vec(prop::collection::vec(0u32..=10, m), n), 1u32..4), 1..=3).prop_map(|atoms| {
        let total: u32 = atoms.iter().map(|a| a.1).sum();
        FiniteProfile {
            atoms: atoms
                .into_iter()
                .map(|(b, w)| Atom {
                    bids: b.into_iter().map(|r| r.into_iter().map(|k| k as f64 * 0.1).collect()).collect(),
                    prob: w as f64 / total as f64,
                })
                .collect(),
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ce_check_refutes_profiles_that_leave_items_unsold(
        (inst, prof) in reserve_instance().prop_flat_map(|i| { let (n, m) = (i.n, i.m); (Just(i), finite_profile(n, m)) })
    ) {
        let wrapped = Profile::Finite(prof.clone());
        let (ws, _) = well_supported(&inst, &wrapped).unwrap();
        let dev = DeviationSet::uniform(inst.n, inst.m, &grid(0.1, 1.0));
        let r = verify_ce_finite(&inst, &prof, &dev, &VerifyConfig::default()).unwrap();
        if !ws {
            prop_assert_eq!(r.verdict, Verdict::Refuted);
            if check_feasible(&inst, &wrapped).unwrap().feasible {
                prop_assert_eq!(r.basis, Basis::ImprovingDeviation);
                prop_assert!(r.witness.is_some());
            }
        }
    }

    #[test]
    fn refutations_are_confirmed_by_recomputation(
        (inst, bids) in reserve_instance().prop_flat_map(|i| {
            let (n, m) = (i.n, i.m);
            (Just(i), prop::collection::vec(prop::collection::vec((0u32..=10).prop_map(|k| k as f64 * 0.1), m), n))
        }),
        budget in prop_oneof![Just(f64::INFINITY), 0.05..1.0f64],
    ) {
        let mut budgets = vec![f64::INFINITY; inst.n];
        budgets[0] = budget;
        let inst = inst.with_budgets(budgets).unwrap();
        let prof = pure_product(bids);
        let dev = DeviationSet::uniform(inst.n, inst.m, &grid(0.1, 1.0));
        let cfg = VerifyConfig::default();
        let r = verify_cce(&inst, &prof, &dev, &cfg).unwrap();
        if r.verdict == Verdict::Refuted && r.basis == Basis::ImprovingDeviation {
            let w = r.witness.clone().unwrap();
            let s = deviation_stats(&inst, &prof.scenarios().unwrap(), w.agent, &w.deviation).unwrap();
            let i = w.agent;
            let gain = s.gain(&inst, i);
            prop_assert!((gain - w.gain).abs() <= 1e-9);
            prop_assert!(gain > r.eq_gain[i] + cfg.tol);
            prop_assert!(inst.taus[i] * s.value[i] - s.payment[i] >= -1e-9);
            prop_assert!(inst.budgets[i] - s.payment[i] >= -1e-9);
        }
        if r.verdict == Verdict::Verified {
            // no pure grid deviation that respects the constraints does better
            for i in 0..inst.n {
                for b in joint(&grid(0.1, 1.0), inst.m) {
                    let d = Deviation::Pure { bids: b };
                    let s = deviation_stats(&inst, &prof.scenarios().unwrap(), i, &d).unwrap();
                    let ok = inst.taus[i] * s.value[i] - s.payment[i] >= -1e-9 && inst.budgets[i] - s.payment[i] >= -1e-9;
                    if ok {
                        prop_assert!(s.gain(&inst, i) <= r.eq_gain[i] + cfg.tol);
                    }
                }
            }
        }
    }
}
