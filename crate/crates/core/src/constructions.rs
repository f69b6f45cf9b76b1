//! Registry of lower-bound instances with their claimed equilibria.
//!
//! Each entry builds an instance and a bid profile, states the ratio
//! `OPT / LW` it should reach, and can be run through the verifier. Where a
//! matching upper bound is known it is reported next to the achieved ratio.

use crate::auction::{Instance, TieBreak, TieOverride, TieThreshold, TypeSet};
use crate::bounds::{bound_p, bound_pt_eta};
use crate::equilibrium::{verify_cce, verify_mne, DeviationSet, EquilibriumReport, Verdict, VerifyConfig};
use crate::error::{Error, Result};
use crate::profile::{Component, CoupledProfile, Entry, ParametricBid, ProductProfile, Profile};
use crate::smoothness::poa_upper_bound;
use crate::special::{lambert_w0, theta_threshold};
use crate::valuation::Valuation;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::E;

pub const NAMES: [&str; 7] = [
    "universal_budget",
    "budget_commontype",
    "budgetfree_hybrid",
    "reserve_valuemax",
    "reserve_hightype",
    "cce_not_well_supported",
    "submod_mne",
];

pub type Params = BTreeMap<String, f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumClass {
    Mne,
    Cce,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Construction {
    pub name: String,
    /// Parameters after defaults were filled in.
    pub params: Params,
    pub instance: Instance,
    pub profile: Profile,
    pub claimed_ratio: f64,
    pub class: EquilibriumClass,
    pub well_supported_claim: bool,
    /// Matching upper bound, when one applies to the instance class.
    pub upper_bound: Option<f64>,
}

/// `a* = -W0(-e^{-t-1})`.
pub fn a_star(t: f64) -> f64 {
    -lambert_w0(-(-t - 1.0).exp()).expect("argument inside the domain")
}

/// `(1 - a + a ln a + t) / (1 - a + a ln a + a t)`.
pub fn commontype_ratio(t: f64, a: f64) -> f64 {
    let k = 1.0 - a + a * a.ln();
    (k + t) / (k + a * t)
}

fn defaults(name: &str) -> Result<Params> {
    let list: &[(&str, f64)] = match name {
        "universal_budget" => &[("t1", 0.0), ("t2", 0.0)],
        "budget_commontype" | "budgetfree_hybrid" => &[("t", 1.0)],
        "reserve_valuemax" => &[("eta", 0.3), ("eps", 1e-3)],
        "reserve_hightype" => &[("t", 1.0), ("eta", 0.3)],
        "cce_not_well_supported" => &[("r", 0.2)],
        "submod_mne" => &[("eps", 0.01)],
        other => return Err(Error::UnknownConstruction(other.into())),
    };
    Ok(list.iter().map(|(k, v)| (k.to_string(), *v)).collect())
}

fn bad(name: &str, msg: String) -> Error {
    Error::InvalidParameter(format!("{name}: {msg}"))
}

/// Builds a registered construction; unspecified parameters take defaults.
pub fn build(name: &str, given: &Params) -> Result<Construction> {
    let mut params = defaults(name)?;
    for (k, v) in given {
        if !params.contains_key(k) && k != "a" {
            return Err(bad(name, format!("unknown parameter {k:?}")));
        }
        params.insert(k.clone(), *v);
    }
    let p = |k: &str| params[k];
    let lex = TieBreak::lexicographic();
    // ties in auction 2 go to agent 2 only at 0
    let zero_to_second = TieBreak {
        default: vec![vec![0, 1], vec![0, 1]],
        overrides: vec![TieOverride { auction: 1, value: 0.0, priority: vec![1, 0] }],
        ..TieBreak::default()
    };
    let (instance, profile, claimed, class, ws, upper) = match name {
        "universal_budget" => {
            let (t1, t2) = (p("t1"), p("t2"));
            let types = TypeSet::new(vec![t1, t2]).map_err(|e| bad(name, e.to_string()))?;
            let inst = Instance::simple(vec![Valuation::additive(vec![1.0, 1.0]), Valuation::additive(vec![0.0, 1.0])], vec![t1, t2])?
                .with_budgets(vec![1.0, f64::INFINITY])?
                .with_tiebreak(lex)?;
            let prof = Profile::Product(ProductProfile {
                components: vec![Component::pure(vec![0.0, 1.0]), Component::pure(vec![0.0, 1.0])],
            });
            let up = poa_upper_bound(&types, 0.0, true)?.implied_poa_upper;
            (inst, prof, 2.0, EquilibriumClass::Mne, true, Some(up))
        }
        "budget_commontype" => {
            let t = p("t");
            if !(t > theta_threshold() && t <= 1.0) {
                return Err(bad(name, format!("t must lie in (theta, 1], got {t}")));
            }
            let a = *params.entry("a".into()).or_insert_with(|| a_star(t));
            if !(a > 1.0 - t && a <= 1.0 / E + 1e-15) {
                return Err(bad(name, format!("a must lie in (1 - t, 1/e], got {a}")));
            }
            let budget = (1.0 - a + a * a.ln()) / t;
            let inst = Instance::simple(vec![Valuation::additive(vec![1.0, 1.0]), Valuation::additive(vec![0.0, 1.0])], vec![t, t])?
                .with_budgets(vec![budget, f64::INFINITY])?
                .with_tiebreak(zero_to_second)?;
            let draw = ParametricBid::Reciprocal { lo: 0.0, hi: (1.0 - a) / t, scale: a, rate: t };
            let bids = vec![vec![Entry::Fixed(0.0), Entry::Draw], vec![Entry::Fixed(0.0), Entry::Draw]];
            let prof = Profile::Coupled(CoupledProfile { draw, bids });
            let up = poa_upper_bound(&TypeSet::new(vec![t])?, 0.0, true)?.implied_poa_upper;
            (inst, prof, commontype_ratio(t, a), EquilibriumClass::Cce, true, Some(up))
        }
        "budgetfree_hybrid" => {
            let t = p("t");
            if !(t > 0.0 && t <= 1.0) {
                return Err(bad(name, format!("t must lie in (0, 1], got {t}")));
            }
            let up = poa_upper_bound(&TypeSet::new(vec![0.0, t])?, 0.0, false)?.implied_poa_upper;
            if t > theta_threshold() {
                let a = *params.entry("a".into()).or_insert_with(|| a_star(t));
                if !(a > 1.0 - t && a < 1.0) {
                    return Err(bad(name, format!("a must lie in (1 - t, 1), got {a}")));
                }
                let k = (1.0 - a + a * a.ln()) / t;
                let inst = Instance::simple(vec![Valuation::additive(vec![k, 0.0]), Valuation::additive(vec![0.0, 1.0])], vec![0.0, t])?
                    .with_tiebreak(zero_to_second)?;
                let draw = ParametricBid::Reciprocal { lo: 0.0, hi: (1.0 - a) / t, scale: a, rate: t };
                let prof = Profile::Product(ProductProfile {
                    components: vec![
                        Component::Parametric { draw, bids: vec![Entry::Fixed(0.0), Entry::Draw] },
                        Component::pure(vec![0.0, 0.0]),
                    ],
                });
                (inst, prof, commontype_ratio(t, a), EquilibriumClass::Mne, true, Some(up))
            } else {
                if given.contains_key("a") {
                    return Err(bad(name, "a is only used when t > theta".into()));
                }
                let inst = Instance::simple(vec![Valuation::additive(vec![1.0, 0.0]), Valuation::additive(vec![0.0, 1.0])], vec![0.0, t])?
                    .with_tiebreak(lex)?;
                let prof = Profile::Product(ProductProfile {
                    components: vec![Component::pure(vec![0.0, 1.0]), Component::pure(vec![0.0, 1.0])],
                });
                (inst, prof, 2.0, EquilibriumClass::Mne, true, Some(up))
            }
        }
        "reserve_valuemax" => {
            let (eta, eps) = (p("eta"), p("eps"));
            if !(eps > 0.0 && eps < 1.0) {
                return Err(bad(name, format!("eps must lie in (0, 1), got {eps}")));
            }
            if !(eta >= 0.0 && eta <= 1.0 - eps) {
                return Err(bad(name, format!("eta must lie in [0, 1 - eps], got {eta}")));
            }
            let inst = Instance::simple(vec![Valuation::additive(vec![1.0, 0.0]), Valuation::additive(vec![0.0, 1.0 - eta])], vec![0.0, 0.0])?
                .with_reserves(vec![eta, (1.0 - eps) * (1.0 - eta)])?
                .with_tiebreak(lex)?;
            let prof = Profile::Product(ProductProfile {
                components: vec![Component::pure(vec![eta, 1.0 - eta]), Component::pure(vec![0.0, 1.0 - eta])],
            });
            (inst, prof, 2.0 - eta, EquilibriumClass::Mne, true, Some(bound_pt_eta(0.0, eta)?))
        }
        "reserve_hightype" => {
            let (t, eta) = (p("t"), p("eta"));
            if !(t >= 1.0 - 1.0 / E && t <= 1.0) {
                return Err(bad(name, format!("t must lie in [1 - 1/e, 1], got {t}")));
            }
            if !(eta >= 0.0 && eta < 1.0 && eta <= (1.0 - E * (1.0 - t)) / t) {
                return Err(bad(name, format!("eta must lie in [0, (1 - e(1 - t))/t] and below 1, got {eta}")));
            }
            let inst = Instance::simple(vec![Valuation::additive(vec![1.0]), Valuation::additive(vec![eta])], vec![t, t])?
                .with_reserves(vec![eta])?
                .with_tiebreak(TieBreak {
                    thresholds: vec![TieThreshold { auction: 0, threshold: eta, below: vec![1, 0], above: vec![0, 1] }],
                    ..TieBreak::default()
                })?;
            let draw = ParametricBid::Reciprocal {
                lo: eta,
                hi: (E - 1.0 + t * eta) / (E * t),
                scale: (1.0 - t * eta) / E,
                rate: t,
            };
            let prof = Profile::Coupled(CoupledProfile { draw, bids: vec![vec![Entry::Draw], vec![Entry::Draw]] });
            (inst, prof, E / (E - 1.0 + eta), EquilibriumClass::Cce, true, Some(bound_pt_eta(t, eta)?))
        }
        "cce_not_well_supported" => {
            let r = p("r");
            if !(r > 0.0 && r < 1.0) {
                return Err(bad(name, format!("r must lie in (0, 1), got {r}")));
            }
            let inst = Instance::simple(vec![Valuation::additive(vec![1.0]), Valuation::additive(vec![0.0])], vec![1.0, 1.0])?
                .with_reserves(vec![r])?
                .with_tiebreak(lex)?;
            let draw = ParametricBid::Reciprocal { lo: 0.0, hi: (E - 1.0 + r) / E, scale: (1.0 - r) / E, rate: 1.0 };
            let prof = Profile::Coupled(CoupledProfile { draw, bids: vec![vec![Entry::Draw], vec![Entry::Draw]] });
            (inst, prof, E / (E - 1.0), EquilibriumClass::Cce, false, None)
        }
        "submod_mne" => {
            let eps = p("eps");
            if !(eps > 0.0 && eps < 1.0) {
                return Err(bad(name, format!("eps must lie in (0, 1), got {eps}")));
            }
            let v1 = Valuation::xos(vec![vec![eps, 0.0], vec![0.0, 1.0], vec![eps / 2.0, 1.0]]);
            let v2 = Valuation::xos(vec![vec![eps / 4.0, 0.0], vec![0.0, eps / 4.0]]);
            let inst = Instance::simple(vec![v1, v2], vec![1.0, 1.0])?
                .with_reserves(vec![eps / 2.0, 1.0 - eps / 2.0])?
                .with_tiebreak(lex)?;
            let prof = Profile::Product(ProductProfile {
                components: vec![Component::pure(vec![eps / 2.0, 0.0]), Component::pure(vec![0.0, 0.0])],
            });
            (inst, prof, (1.0 + eps / 2.0) / eps, EquilibriumClass::Mne, false, None)
        }
        other => return Err(Error::UnknownConstruction(other.into())),
    };
    Ok(Construction {
        name: name.into(),
        params,
        instance,
        profile,
        claimed_ratio: claimed,
        class,
        well_supported_claim: ws,
        upper_bound: upper,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionReport {
    pub name: String,
    pub params: Params,
    pub class: EquilibriumClass,
    pub equilibrium: EquilibriumReport,
    pub claimed_ratio: f64,
    #[serde(with = "crate::ext::one")]
    pub ratio: f64,
    pub ratio_matches: bool,
    pub well_supported_claim: bool,
    pub upper_bound: Option<f64>,
    /// `upper_bound - ratio`.
    pub tightness_gap: Option<f64>,
    /// Equilibrium verified, feasible, ratio as claimed, support claim confirmed.
    pub verified: bool,
}

/// Ratio tolerance used for `ratio_matches`.
pub const RATIO_TOL: f64 = 1e-6;

/// Builds, verifies and compares a construction against its claims.
pub fn verify(name: &str, params: &Params, step: f64, cfg: &VerifyConfig) -> Result<ConstructionReport> {
    let c = build(name, params)?;
    let dev = DeviationSet::for_profile(&c.instance, &c.profile, step, &[])?;
    let eq = match c.class {
        EquilibriumClass::Mne => verify_mne(&c.instance, &c.profile, &dev, cfg)?,
        EquilibriumClass::Cce => verify_cce(&c.instance, &c.profile, &dev, cfg)?,
    };
    let ratio = eq.ratio;
    let ratio_matches = (ratio - c.claimed_ratio).abs() <= RATIO_TOL * c.claimed_ratio.max(1.0);
    let verified = eq.verdict == Verdict::Verified
        && eq.constraints.feasible
        && ratio_matches
        && eq.well_supported == c.well_supported_claim;
    Ok(ConstructionReport {
        name: c.name,
        params: c.params,
        class: c.class,
        claimed_ratio: c.claimed_ratio,
        ratio,
        ratio_matches,
        well_supported_claim: c.well_supported_claim,
        tightness_gap: c.upper_bound.map(|u| u - ratio),
        upper_bound: c.upper_bound,
        equilibrium: eq,
        verified,
    })
}

/// A registered construction that lives in a given instance class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    pub name: String,
    pub params: Params,
    pub ratio: f64,
}

/// Constructions whose agents' types lie in `types`, whose reserve gaps are
/// `eta` (zero-reserve constructions only when `eta = 0`) and which need
/// budgets only if `budgeted`. Sorted by ratio, largest first.
pub fn lower_bounds(types: &TypeSet, eta: f64, budgeted: bool) -> Result<Vec<LowerBound>> {
    let mut cands: Vec<(&str, Vec<(&str, f64)>)> = Vec::new();
    let zero = eta == 0.0;
    let tmax = types.max();
    if budgeted && zero {
        cands.push(("universal_budget", vec![("t1", types.min()), ("t2", types.min())]));
        if tmax > theta_threshold() {
            cands.push(("budget_commontype", vec![("t", tmax)]));
        }
    }
    if zero && types.contains(0.0) && tmax > 0.0 {
        cands.push(("budgetfree_hybrid", vec![("t", tmax)]));
    }
    if types.contains(0.0) && eta <= 1.0 - 1e-3 {
        cands.push(("reserve_valuemax", vec![("eta", eta)]));
    }
    for &t in types.values() {
        if t >= 1.0 - 1.0 / E && eta < 1.0 && eta <= (1.0 - E * (1.0 - t)) / t {
            cands.push(("reserve_hightype", vec![("t", t), ("eta", eta)]));
        }
    }
    let mut out = Vec::new();
    for (name, ps) in cands {
        let c = build(name, &ps.iter().map(|(k, v)| (k.to_string(), *v)).collect())?;
        out.push(LowerBound { name: c.name, params: c.params, ratio: c.claimed_ratio });
    }
    out.sort_by(|a, b| b.ratio.total_cmp(&a.ratio));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimDomainReport {
    pub t: f64,
    pub a_star: f64,
    /// `a* - (1 - t)`, positive inside the domain.
    pub margin_low: f64,
    /// `1/e - a*`, non-negative inside the domain.
    pub margin_high: f64,
    pub in_domain: bool,
    pub ratio_at_a_star: f64,
    /// `1 + t / (1 + W0(-e^{-t-1}))`.
    pub closed_form: f64,
    pub residual: f64,
}

/// Checks that `a*` lies in `(1 - t, 1/e]` and that the ratio at `a*` equals `P(t)`.
pub fn claim_domain_check(t: f64) -> Result<ClaimDomainReport> {
    if !(t > theta_threshold() && t <= 1.0) {
        return Err(Error::Domain { op: "claim_domain_check", value: t });
    }
    let a = a_star(t);
    let ratio = commontype_ratio(t, a);
    let closed = 1.0 + t / (1.0 - a);
    Ok(ClaimDomainReport {
        t,
        a_star: a,
        margin_low: a - (1.0 - t),
        margin_high: 1.0 / E - a,
        in_domain: a > 1.0 - t && a <= 1.0 / E,
        ratio_at_a_star: ratio,
        closed_form: closed,
        residual: (ratio - closed).abs().max((closed - bound_p(t)).abs()),
    })
}
