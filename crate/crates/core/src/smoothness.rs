//! Type-dependent smoothness deviations and the POA-revealing program.
//!
//! A type-`t` agent facing a single auction deviates to a random bid whose
//! gain against any opponent bid `p` is at least `lambda_t v - mu_t p`. The
//! feasible `(lambda_t, mu_t)` pairs are
//!
//! * `t = 0`: `lambda = mu`, `mu` in `(0, 1/(1-eta)]`;
//! * `t = 1`: `lambda = mu (1 - (1-eta) e^{-1/mu})`, any `mu > 0`;
//! * `0 < t < 1`: `lambda = (mu/t)(1 - (1-t eta) e^{-t/mu})`,
//!   `mu >= t / ln((1-t eta)/(1-t))`.
//!
//! Mixing per-type certificates through calibration weights gives
//! `POA <= 1/O` with `O = min{min lambda, (max mu/lambda + max (1-t)/lambda)^-1}`.

use crate::auction::{
    eta_gaps, optimal_allocation, opt_representatives, rightful_winners_for, Instance, TypeSet,
};
use crate::bounds::zeta;
use crate::error::{Error, Result};
use crate::profile::{deviation_stats, scenarios_stats, Deviation, Entry, ParametricBid, Profile};
use serde::{Deserialize, Serialize};

/// Relative slack accepted on the `mu` constraints.
const MU_SLACK: f64 = 1e-12;

/// Feasible `mu` interval `(lo, hi)` for type `t` and gap `eta`; `lo` is
/// attained when `t` is strictly between 0 and 1, open otherwise.
pub fn mu_range(t: f64, eta: f64) -> (f64, f64) {
    if t == 0.0 {
        (0.0, 1.0 / (1.0 - eta))
    } else if t == 1.0 {
        (0.0, f64::INFINITY)
    } else {
        (t / ((1.0 - t * eta) / (1.0 - t)).ln(), f64::INFINITY)
    }
}

fn mu_feasible(t: f64, eta: f64, mu: f64) -> bool {
    let (lo, hi) = mu_range(t, eta);
    mu > 0.0 && mu >= lo * (1.0 - MU_SLACK) && mu <= hi * (1.0 + MU_SLACK)
}

/// `lambda_t(mu)` without domain checks.
pub fn lambda_of(t: f64, eta: f64, mu: f64) -> f64 {
    if t == 0.0 {
        mu
    } else {
        mu / t * (1.0 - (1.0 - t * eta) * (-t / mu).exp())
    }
}

fn check_type(t: f64, eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain { op: "type", value: t });
    }
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::Domain { op: "eta", value: eta });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessParams {
    pub t: f64,
    pub eta: f64,
    pub mu: f64,
    pub lambda: f64,
}

impl SmoothnessParams {
    pub fn new(t: f64, eta: f64, mu: f64) -> Result<Self> {
        check_type(t, eta)?;
        if !mu_feasible(t, eta, mu) {
            return Err(Error::Domain { op: "smoothness mu", value: mu });
        }
        Ok(SmoothnessParams { t, eta, mu, lambda: lambda_of(t, eta, mu) })
    }
}

/// Upper end `(1/t)(1 - (1 - t eta) e^{-t/mu})` of the type-`t` deviation, relative to `v`.
pub fn gamma(mu: f64, t: f64, eta: f64) -> Result<f64> {
    check_type(t, eta)?;
    if t == 0.0 || !mu_feasible(t, eta, mu) {
        return Err(Error::Domain { op: "gamma", value: mu });
    }
    Ok((lambda_of(t, eta, mu) / mu).clamp(eta, 1.0))
}

/// Type-0 deviation: CDF `mu z / v + 1 - mu` on `[eta v, v]`.
pub fn deviation_type_zero(v: f64, eta: f64, mu: f64) -> Result<ParametricBid> {
    if !(v > 0.0) {
        return Err(Error::Domain { op: "deviation value", value: v });
    }
    SmoothnessParams::new(0.0, eta, mu)?;
    let d = ParametricBid::Linear { lo: eta * v, hi: v, slope: mu / v, intercept: 1.0 - mu };
    d.validate()?;
    Ok(d)
}

/// Type-`t` deviation (`t > 0`): density `mu / (v - t z)` on `[eta v, gamma v]`.
pub fn deviation_type_t(v: f64, t: f64, eta: f64, mu: f64) -> Result<ParametricBid> {
    if !(v > 0.0) {
        return Err(Error::Domain { op: "deviation value", value: v });
    }
    let g = gamma(mu, t, eta)?;
    // the CDF at the top is (mu/t) ln((1 - t eta)/tail); once the tail nears
    // the float resolution it can no longer be evaluated to 1e-10
    let tail = (1.0 - t * eta) * (-t / mu).exp();
    if tail * t * 1e-10 < 4.0 * f64::EPSILON * mu {
        return Err(Error::Domain { op: "type-t deviation mu (support top below float resolution)", value: mu });
    }
    let d = ParametricBid::LogDensity { lo: eta * v, hi: g * v, mu, v, t };
    d.validate()?;
    Ok(d)
}

pub fn smoothness_deviation(v: f64, p: &SmoothnessParams) -> Result<ParametricBid> {
    if p.t == 0.0 {
        deviation_type_zero(v, p.eta, p.mu)
    } else {
        deviation_type_t(v, p.t, p.eta, p.mu)
    }
}

/// Closed-form `E[g(B', b_-rw)] - (lambda v - mu p_aw)` on one auction.
/// `others` are the opponents' bids, `own` the rightful winner's bid.
pub fn smoothness_check(p: &SmoothnessParams, v: f64, reserve: f64, others: &[f64], own: f64) -> Result<f64> {
    let opp = others.iter().copied().fold(0.0, f64::max);
    let p_aw = opp.max(own);
    if p_aw < reserve {
        return Err(Error::InvalidProfile("the item is not sold".into()));
    }
    let theta = (p.eta * v).max(reserve).max(opp);
    let expected = if p.t == 0.0 {
        p.mu * (v - theta).max(0.0)
    } else {
        let top = gamma(p.mu, p.t, p.eta)? * v;
        if theta < top {
            p.mu * (top - theta)
        } else {
            0.0
        }
    };
    Ok(expected - (p.lambda * v - p.mu * p_aw))
}

/// `max_t(delta_t mu_t) + max_t(delta_t (1 - t)) <= 1`.
pub fn calibration_feasible(delta: &[f64], mu: &[f64], types: &[f64]) -> bool {
    let a = delta.iter().zip(mu).map(|(d, m)| d * m).fold(f64::NEG_INFINITY, f64::max);
    let b = delta.iter().zip(types).map(|(d, t)| d * (1.0 - t)).fold(f64::NEG_INFINITY, f64::max);
    a + b <= 1.0
}

/// `min{min lambda, (max mu/lambda + max (1-t)/lambda)^-1}`.
pub fn rmp_objective(lambda: &[f64], mu: &[f64], types: &[f64]) -> f64 {
    let min_l = lambda.iter().copied().fold(f64::INFINITY, f64::min);
    let a = mu.iter().zip(lambda).map(|(m, l)| m / l).fold(f64::NEG_INFINITY, f64::max);
    let b = types.iter().zip(lambda).map(|(t, l)| (1.0 - t) / l).fold(f64::NEG_INFINITY, f64::max);
    min_l.min(1.0 / (a + b))
}

/// Calibration weights attaining [`rmp_objective`]: `delta_t = O / lambda_t`.
pub fn optimal_calibration(lambda: &[f64], mu: &[f64], types: &[f64]) -> Vec<f64> {
    let o = rmp_objective(lambda, mu, types);
    lambda.iter().map(|l| (o / l).min(1.0)).collect()
}

/// `mu*(omega, T)` without reserves, as `(mu, lambda)` per type.
pub fn mu_star(omega: f64, types: &TypeSet) -> Result<Vec<(f64, f64)>> {
    if !(omega > 0.0 && omega < 1.0) {
        return Err(Error::Domain { op: "mu_star omega", value: omega });
    }
    let h = -(1.0 - omega).ln();
    Ok(types
        .values()
        .iter()
        .map(|&t| {
            let mu = if t >= omega {
                t / h
            } else if t > 0.0 {
                t / -(1.0 - t).ln()
            } else {
                1.0
            };
            (mu, lambda_of(t, 0.0, mu))
        })
        .collect())
}

/// `min{omega / -ln(1-omega), omega / (omega + max T)}` with the `mu*` certificate.
pub fn poa_rmp_lower_bound(types: &TypeSet, omega: f64) -> Result<(f64, Vec<f64>)> {
    let tmax = types.max();
    if !(tmax > 0.0 && omega > 0.0 && omega <= tmax && omega < 1.0) {
        return Err(Error::Domain { op: "poa_rmp_lower_bound omega", value: omega });
    }
    let mus = mu_star(omega, types)?.into_iter().map(|(m, _)| m).collect();
    Ok(((omega / -(1.0 - omega).ln()).min(omega / (omega + tmax)), mus))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmpSolution {
    /// The type set the program was solved on (with 0 added when budgeted).
    pub types: Vec<f64>,
    pub eta: f64,
    pub mu: Vec<f64>,
    pub lambda: Vec<f64>,
    pub delta: Vec<f64>,
    pub objective: f64,
    pub implied_poa_upper: f64,
    /// Which search stage produced the certificate.
    pub stage: String,
}

impl RmpSolution {
    pub fn params_for(&self, t: f64) -> Option<SmoothnessParams> {
        let k = self.types.iter().position(|&s| (s - t).abs() <= 1e-12)?;
        Some(SmoothnessParams { t: self.types[k], eta: self.eta, mu: self.mu[k], lambda: self.lambda[k] })
    }
}

struct Search<'a> {
    types: &'a [f64],
    eta: f64,
    best: f64,
    best_mu: Vec<f64>,
    stage: &'static str,
}

impl Search<'_> {
    fn eval(&self, mu: &[f64]) -> f64 {
        if !mu.iter().zip(self.types).all(|(&m, &t)| mu_feasible(t, self.eta, m)) {
            return f64::NEG_INFINITY;
        }
        let lambda: Vec<f64> = mu.iter().zip(self.types).map(|(&m, &t)| lambda_of(t, self.eta, m)).collect();
        rmp_objective(&lambda, mu, self.types)
    }

    fn offer(&mut self, mu: &[f64], stage: &'static str) -> f64 {
        let o = self.eval(mu);
        if o > self.best + 1e-15 {
            self.best = o;
            self.best_mu = mu.to_vec();
            self.stage = stage;
        }
        o
    }

    /// `mu*(omega)` raised to the reserve-dependent lower bounds.
    fn omega_family(&self, omega: f64) -> Vec<f64> {
        let h = -(1.0 - omega).ln();
        self.types
            .iter()
            .map(|&t| {
                let star = if t >= omega {
                    t / h
                } else if t > 0.0 {
                    t / -(1.0 - t).ln()
                } else {
                    1.0
                };
                if t > 0.0 && t < 1.0 {
                    star.max(mu_range(t, self.eta).0)
                } else {
                    star
                }
            })
            .collect()
    }

    /// Coordinate range searched in the refinement stage.
    fn coord_range(&self, t: f64) -> (f64, f64) {
        let (lo, hi) = mu_range(t, self.eta);
        if t == 0.0 {
            (1e-6, hi)
        } else if t == 1.0 {
            (1e-3, 1e3)
        } else {
            (lo, lo * 1e3)
        }
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Best certificate found for the program on `T` (plus type 0 when budgeted).
///
/// Search: a line search over the `mu*(omega)` family, the closed-form
/// certificates for types 0 and 1, then coordinate ascent on a log grid with
/// golden refinement. The value is a valid upper bound for whatever `mu` it
/// reports; it is not guaranteed to be the program optimum.
pub fn poa_upper_bound(types: &TypeSet, eta: f64, budgeted: bool) -> Result<RmpSolution> {
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::Domain { op: "poa_upper_bound eta", value: eta });
    }
    let tset = if budgeted { types.augmented() } else { types.clone() };
    let ts = tset.values();
    let mut s = Search { types: ts, eta, best: f64::NEG_INFINITY, best_mu: vec![1.0; ts.len()], stage: "none" };

    // (a) omega line search
    let tmax = tset.max();
    if tmax > 0.0 {
        let top = tmax.min(1.0 - 1e-6);
        let n = 10_000;
        let mut best_k = 1;
        let mut best_o = f64::NEG_INFINITY;
        for k in 1..=n {
            let w = top * k as f64 / n as f64;
            let o = s.offer(&s.omega_family(w), "omega");
            if o > best_o {
                best_o = o;
                best_k = k;
            }
        }
        let lo = top * (best_k as f64 - 1.0).max(1e-3) / n as f64;
        let hi = top * ((best_k + 1).min(n)) as f64 / n as f64;
        let (w, _) = golden_max(|w| s.eval(&s.omega_family(w)), lo, hi, 100);
        s.offer(&s.omega_family(w), "omega");
    }

    // (b) closed-form certificates
    let cands: Vec<Vec<f64>> = ts
        .iter()
        .map(|&t| {
            if t == 0.0 {
                vec![1.0, 1.0 / (1.0 - eta)]
            } else if t == 1.0 {
                vec![1.0, 1.0 / zeta(eta).expect("eta checked")]
            } else {
                let lb = mu_range(t, eta).0;
                if t >= lb {
                    vec![lb, t]
                } else {
                    vec![lb]
                }
            }
        })
        .collect();
    if ts.len() <= 12 {
        let total: usize = cands.iter().map(Vec::len).product();
        for mut idx in 0..total {
            let mut mu = Vec::with_capacity(ts.len());
            for c in &cands {
                mu.push(c[idx % c.len()]);
                idx /= c.len();
            }
            s.offer(&mu, "closed_form");
        }
    } else {
        for pick in 0..2 {
            let mu: Vec<f64> = cands.iter().map(|c| c[pick.min(c.len() - 1)]).collect();
            s.offer(&mu, "closed_form");
        }
    }

    // (c) coordinate ascent
    if s.best.is_finite() {
        for _ in 0..20 {
            let before = s.best;
            for k in 0..ts.len() {
                let (lo, hi) = s.coord_range(ts[k]);
                let mut mu = s.best_mu.clone();
                let grid = 200;
                let mut best_g = (mu[k], f64::NEG_INFINITY);
                for g in 0..=grid {
                    let x = lo * (hi / lo).powf(g as f64 / grid as f64);
                    mu[k] = x;
                    let o = s.eval(&mu);
                    if o > best_g.1 {
                        best_g = (x, o);
                    }
                }
                let ratio = (hi / lo).powf(1.0 / grid as f64);
                let (a, b) = ((best_g.0 / ratio).max(lo), (best_g.0 * ratio).min(hi));
                let probe = mu.clone();
                let (x, _) = golden_max(
                    |x| {
                        let mut m = probe.clone();
                        m[k] = x;
                        s.eval(&m)
                    },
                    a,
                    b,
                    80,
                );
                for cand in [best_g.0, x] {
                    mu[k] = cand;
                    s.offer(&mu, "coordinate");
                }
            }
            if s.best - before < 1e-13 {
                break;
            }
        }
    }
    if !s.best.is_finite() || s.best <= 0.0 {
        return Err(Error::NonConvergence { op: "poa_upper_bound", iters: 0 });
    }
    let mu = s.best_mu.clone();
    let lambda: Vec<f64> = mu.iter().zip(ts).map(|(&m, &t)| lambda_of(t, eta, m)).collect();
    let delta = optimal_calibration(&lambda, &mu, ts);
    Ok(RmpSolution {
        types: ts.to_vec(),
        eta,
        objective: s.best,
        implied_poa_upper: 1.0 / s.best,
        mu,
        lambda,
        delta,
        stage: s.stage.into(),
    })
}

/// Both sides of the lifted smoothness inequality on a budget-free instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftingReport {
    /// `sum_j (lambda_t v*_{rw(j) j} - mu_t E[p_{aw(j) j}])`.
    pub lhs: f64,
    /// `sum_j E[(v*_{rw(j) j} - t z) 1{rw(j) wins j}]` under the per-item deviations,
    /// a lower bound on the deviation gains by the XOS representatives.
    pub rhs: f64,
    pub per_item: Vec<(f64, f64)>,
    pub holds: bool,
}

/// Checks the lifted inequality for the deviations of `sol` on every item.
/// Each rightful winner deviates on its items alone against the profile.
pub fn lifting_check(inst: &Instance, profile: &Profile, sol: &RmpSolution, tol: f64) -> Result<LiftingReport> {
    if inst.budgeted() {
        return Err(Error::InvalidInstance("the lifting check needs a budget-free instance".into()));
    }
    let gaps = eta_gaps(inst)?;
    if sol.eta > gaps.eta + 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "certificate gap {} exceeds the instance gap {}",
            sol.eta, gaps.eta
        )));
    }
    profile.validate(inst.n, inst.m)?;
    let scenarios = profile.scenarios()?;
    let stats = scenarios_stats(inst, &scenarios);
    let alloc = optimal_allocation(inst)?;
    let reps = opt_representatives(inst, &alloc)?;
    let rw = rightful_winners_for(&reps, &alloc);
    let mut per_item = Vec::with_capacity(inst.m);
    for j in 0..inst.m {
        let i = rw[j];
        let v = reps[i][j];
        let t = inst.sigmas[i];
        let p = sol
            .params_for(t)
            .ok_or_else(|| Error::InvalidParameter(format!("no certificate for type {t}")))?;
        let left = p.lambda * v - p.mu * stats.item_price(j);
        let right = if v > 0.0 {
            let draw = smoothness_deviation(v, &p)?;
            let mut bids = vec![Entry::Fixed(0.0); inst.m];
            bids[j] = Entry::Draw;
            // value the item at v*_{ij} only, keeping the agent's type
            let mut single = inst.clone();
            let mut vals = vec![0.0; inst.m];
            vals[j] = v;
            single.valuations[i] = crate::valuation::Valuation::additive(vals);
            let s = deviation_stats(&single, &scenarios, i, &Deviation::Parametric { draw, bids })?;
            s.gain(&single, i)
        } else {
            0.0
        };
        per_item.push((left, right));
    }
    let lhs = per_item.iter().map(|p| p.0).sum();
    let rhs = per_item.iter().map(|p| p.1).sum();
    Ok(LiftingReport { lhs, rhs, holds: lhs <= rhs + tol, per_item })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{bound_p, bound_pt_eta, bound_q_eta};
    use crate::special::theta_threshold;
    use crate::valuation::Valuation;
    use std::f64::consts::E;

    fn ts(v: &[f64]) -> TypeSet {
        TypeSet::new(v.to_vec()).unwrap()
    }

    #[test]
    fn type_zero_deviation_shapes() {
        let d = deviation_type_zero(1.0, 0.0, 1.0).unwrap();
        for x in [0.0, 0.25, 0.5, 1.0] {
            assert!((d.cdf(x) - x).abs() < 1e-15);
        }
        let d = deviation_type_zero(1.0, 0.5, 2.0).unwrap();
        assert_eq!(d.atom(), 0.0);
        assert!((d.cdf(0.75) - 0.5).abs() < 1e-15);
        assert!(deviation_type_zero(1.0, 0.5, 2.5).is_err());
        for (eta, mu) in [(0.0, 0.3), (0.2, 1.1), (0.7, 3.0)] {
            assert!((deviation_type_zero(2.0, eta, mu).unwrap().cdf(2.0) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gamma_values() {
        let (lb, _) = mu_range(0.4, 0.2);
        assert!((gamma(lb, 0.4, 0.2).unwrap() - 1.0).abs() < 1e-12);
        assert!((gamma(1.0, 1.0, 0.0).unwrap() - (1.0 - 1.0 / E)).abs() < 1e-12);
        assert!((gamma(1e6, 0.6, 0.3).unwrap() - 0.3).abs() < 1e-6);
        assert!(gamma(0.1, 0.4, 0.2).is_err());
    }

    #[test]
    fn type_t_deviation_is_a_distribution() {
        let d = deviation_type_t(1.0, 1.0, 0.0, 1.0).unwrap();
        assert!((d.hi() - (1.0 - 1.0 / E)).abs() < 1e-12);
        assert!((d.pdf(0.3) - 1.0 / 0.7).abs() < 1e-12);
        for t in [0.1, 0.5, 0.9, 1.0] {
            for eta in [0.0, 0.3, 0.8] {
                let lb = mu_range(t, eta).0.max(0.1);
                for mu in [lb, 2.0 * lb + 0.1, 10.0] {
                    let v = 1.7;
                    let d = deviation_type_t(v, t, eta, mu).unwrap();
                    let mass = crate::special::adaptive_simpson(|z| d.pdf(z), d.lo(), d.hi(), 1e-12, 1 << 20).unwrap();
                    assert!((mass - 1.0).abs() < 1e-9, "t={t} eta={eta} mu={mu}: {mass}");
                    assert!(d.hi() <= v * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn smoothness_examples() {
        let p = SmoothnessParams::new(0.0, 0.0, 1.0).unwrap();
        assert!(smoothness_check(&p, 1.0, 0.0, &[0.5], 0.0).unwrap().abs() < 1e-15);
        let p = SmoothnessParams::new(1.0, 0.0, 1.0).unwrap();
        let g = gamma(1.0, 1.0, 0.0).unwrap();
        assert!(smoothness_check(&p, 1.0, 0.0, &[g + 0.1], 0.0).unwrap() >= 0.0);
        assert!(smoothness_check(&p, 1.0, 0.5, &[0.1], 0.2).is_err());
    }

    /// The closed form against the expectation engine on a two-agent auction.
    #[test]
    fn smoothness_closed_form_matches_engine() {
        for (t, eta, mu, opp) in [(1.0, 0.0, 1.0, 0.3), (0.5, 0.2, 1.5, 0.4), (0.0, 0.1, 1.0, 0.5), (0.7, 0.0, 0.9, 0.05)] {
            let v = 1.0;
            let p = SmoothnessParams::new(t, eta, mu).unwrap();
            let inst = Instance::simple(vec![Valuation::additive(vec![v]), Valuation::additive(vec![0.0])], vec![t, 1.0])
                .unwrap()
                .with_reserves(vec![eta * v])
                .unwrap();
            let profile = Profile::pure(vec![vec![0.0], vec![opp]]);
            let dev = Deviation::Parametric { draw: smoothness_deviation(v, &p).unwrap(), bids: vec![Entry::Draw] };
            let engine = crate::equilibrium::expected_gain_deviation(&inst, &profile, 0, &dev).unwrap();
            let closed = smoothness_check(&p, v, eta * v, &[opp], 0.0).unwrap() + p.lambda * v - p.mu * opp;
            assert!((engine - closed).abs() < 1e-8, "t={t}: {engine} vs {closed}");
        }
    }

    #[test]
    fn calibration_examples() {
        assert!(calibration_feasible(&[1.0], &[1.0], &[1.0]));
        assert!(!calibration_feasible(&[1.0], &[1.0], &[0.0]));
        assert!(calibration_feasible(&[0.5], &[1.0], &[0.0]));
    }

    #[test]
    fn objective_examples() {
        assert_eq!(rmp_objective(&[1.0], &[1.0], &[0.0]), 0.5);
        let l = 1.0 - 1.0 / E;
        assert!((rmp_objective(&[l], &[1.0], &[1.0]) - l).abs() < 1e-15);
    }

    #[test]
    fn mu_star_examples() {
        let r = mu_star(1.0 - 1.0 / E, &ts(&[1.0])).unwrap();
        assert!((r[0].0 - 1.0).abs() < 1e-12 && (r[0].1 - (1.0 - 1.0 / E)).abs() < 1e-12);
        for w in [0.1, 0.5, 0.9] {
            assert_eq!(mu_star(w, &ts(&[0.0])).unwrap(), vec![(1.0, 1.0)]);
        }
        assert!(mu_star(1.0, &ts(&[0.5])).is_err());
    }

    #[test]
    fn lower_bound_examples() {
        let w = 1.0 - 1.0 / E;
        let (v, _) = poa_rmp_lower_bound(&ts(&[1.0]), w).unwrap();
        assert!((v - (w / (1.0 + w)).min(w)).abs() < 1e-12);
        assert!((v - 0.3873).abs() < 1e-4);
        assert!((poa_rmp_lower_bound(&ts(&[0.5]), 0.5).unwrap().0 - 0.5).abs() < 1e-12);
        assert!(poa_rmp_lower_bound(&ts(&[0.5]), 0.6).is_err());
        // omega chosen per threshold regime
        for z in [0.3, 0.6, 0.79, 0.85, 0.95, 1.0] {
            let t = ts(&[0.0, z]);
            let w = if z > theta_threshold() { 1.0 + crate::special::lambert_w0(-(-z - 1.0f64).exp()).unwrap() } else { z.min(1.0 - 1e-9) };
            let (v, _) = poa_rmp_lower_bound(&t, w).unwrap();
            assert!(1.0 / v <= bound_p(z) + 1e-9, "z={z}");
        }
    }

    #[test]
    fn upper_bound_examples() {
        let r = poa_upper_bound(&ts(&[0.0]), 0.0, true).unwrap();
        assert!((r.implied_poa_upper - 2.0).abs() < 1e-9);
        let r = poa_upper_bound(&ts(&[0.0, 1.0]), 0.0, false).unwrap();
        assert!((r.implied_poa_upper - 2.1885).abs() < 1e-4);
        let r = poa_upper_bound(&ts(&[1.0]), 0.0, false).unwrap();
        assert!((r.implied_poa_upper - E / (E - 1.0)).abs() < 1e-6);
        assert!(calibration_feasible(&r.delta, &r.mu, &r.types));
    }

    #[test]
    fn upper_bound_tracks_closed_forms() {
        for set in [vec![0.0], vec![1.0], vec![0.0, 1.0], vec![0.9]] {
            let r = poa_upper_bound(&ts(&set), 0.0, true).unwrap();
            let p = bound_p(*set.last().unwrap());
            assert!(r.implied_poa_upper <= p + 1e-6, "{set:?}");
            assert!((r.implied_poa_upper - p).abs() < 1e-4, "{set:?}: {} vs {p}", r.implied_poa_upper);
        }
        for eta in [0.0, 0.2, 0.5, 0.9] {
            let r = poa_upper_bound(&ts(&[0.0, 1.0]), eta, false).unwrap();
            assert!(r.implied_poa_upper <= bound_q_eta(eta).unwrap() + 1e-6, "eta={eta}");
            for t in [0.0, 0.3, 0.7, 1.0] {
                let r = poa_upper_bound(&ts(&[t]), eta, false).unwrap();
                assert!(r.implied_poa_upper <= bound_pt_eta(t, eta).unwrap() + 1e-6, "t={t} eta={eta}");
            }
        }
    }

    #[test]
    fn lifting_on_a_small_instance() {
        let inst = Instance::simple(
            vec![Valuation::additive(vec![1.0, 0.4]), Valuation::xos(vec![vec![0.6, 0.0], vec![0.0, 0.8]])],
            vec![1.0, 0.0],
        )
        .unwrap();
        let sol = poa_upper_bound(&ts(&[0.0, 1.0]), 0.0, false).unwrap();
        let profile = Profile::pure(vec![vec![0.6, 0.0], vec![0.0, 0.0]]);
        let r = lifting_check(&inst, &profile, &sol, 1e-9).unwrap();
        assert!(r.holds, "{r:?}");
    }
}
