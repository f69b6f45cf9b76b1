//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use autobid_poa::auction::Instance;
use autobid_poa::valuation::Valuation;

/// W0 by plain bisection on `w e^w = z` over `[-1, hi]`.
pub fn lambert_w_bisect(z: f64) -> f64 {
    let f = |w: f64| w * w.exp() - z;
    let (mut lo, mut hi) = (-1.0, 1.0f64.max(z.max(1.0).ln() + 1.0));
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Valuation evaluation written from the definitions.
pub fn value_of(v: &Valuation, items: &[usize]) -> f64 {
    match v {
        Valuation::Additive { values } => items.iter().map(|&j| values[j]).sum(),
        Valuation::Xos { clauses } => {
            clauses.iter().map(|c| items.iter().map(|&j| c[j]).sum::<f64>()).fold(0.0, f64::max)
        }
        Valuation::BudgetCapped { inner, cap } => value_of(inner, items).min(*cap),
    }
}

fn lw_of(inst: &Instance, owner: &[Option<usize>]) -> f64 {
    (0..inst.n)
        .map(|i| {
            let items: Vec<usize> = (0..inst.m).filter(|&j| owner[j] == Some(i)).collect();
            (inst.taus[i] * value_of(&inst.valuations[i], &items)).min(inst.budgets[i])
        })
        .sum()
}

/// OPT by recursion over item owners.
pub fn brute_opt(inst: &Instance) -> f64 {
    fn rec(inst: &Instance, owner: &mut Vec<Option<usize>>, j: usize) -> f64 {
        if j == inst.m {
            return lw_of(inst, owner);
        }
        let mut best = f64::NEG_INFINITY;
        for o in std::iter::once(None).chain((0..inst.n).map(Some)) {
            owner[j] = o;
            best = best.max(rec(inst, owner, j + 1));
        }
        best
    }
    rec(inst, &mut vec![None; inst.m], 0)
}

/// Pure first-price outcome with lexicographic ties: `(winner, price)` per item.
pub fn brute_fpa(inst: &Instance, bids: &[Vec<f64>]) -> Vec<Option<(usize, f64)>> {
    (0..inst.m)
        .map(|j| {
            let mut best: Option<(usize, f64)> = None;
            for (i, row) in bids.iter().enumerate() {
                let b = row[j];
                if b < inst.reserves[j] {
                    continue;
                }
                if best.is_none_or(|(_, top)| b > top) {
                    best = Some((i, b));
                }
            }
            best
        })
        .collect()
}

/// `sum_i min(tau_i v_i(S_i), B_i)` at a pure profile, by [`brute_fpa`].
pub fn brute_lw(inst: &Instance, bids: &[Vec<f64>]) -> f64 {
    let out = brute_fpa(inst, bids);
    let owner: Vec<Option<usize>> = out.iter().map(|o| o.map(|(i, _)| i)).collect();
    lw_of(inst, &owner)
}

/// Calibration feasibility from its definition.
pub fn feasible(delta: &[f64], mu: &[f64], types: &[f64]) -> bool {
    let a = delta.iter().zip(mu).map(|(d, m)| d * m).fold(0.0, f64::max);
    let b = delta.iter().zip(types).map(|(d, t)| d * (1.0 - t)).fold(0.0, f64::max);
    a + b <= 1.0 + 1e-12
}

/// `max min_t lambda_t delta_t` over the grid `delta in {step, 2 step, ..., 1}^|T|`.
///
/// All coordinates but the last are enumerated; in the last one feasibility
/// is monotone, so its largest feasible grid value is found by bisection.
pub fn calibration_grid(lambda: &[f64], mu: &[f64], types: &[f64], step: f64) -> f64 {
    let k = (1.0 / step).round() as usize;
    let d = lambda.len();
    let mut idx = vec![1usize; d - 1];
    let mut best = 0.0f64;
    let mut delta = vec![0.0; d];
    loop {
        for (c, &i) in idx.iter().enumerate() {
            delta[c] = i as f64 * step;
        }
        // largest feasible last coordinate
        let (mut lo, mut hi) = (0usize, k);
        while lo < hi {
            let mid = (lo + hi).div_ceil(2);
            delta[d - 1] = mid as f64 * step;
            if feasible(&delta, mu, types) {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        if lo > 0 {
            delta[d - 1] = lo as f64 * step;
            let v = (0..d).map(|t| lambda[t] * delta[t]).fold(f64::INFINITY, f64::min);
            best = best.max(v);
        }
        let mut c = 0;
        loop {
            if c == d - 1 {
                return best;
            }
            idx[c] += 1;
            if idx[c] <= k {
                break;
            }
            idx[c] = 1;
            c += 1;
        }
    }
}

/// `E[(v - t z) 1{z >= theta}]` for a bid distribution given by its CDF on
/// `[lo, hi]` (atom at `lo` allowed), by a midpoint Stieltjes sum.
pub fn expected_win_gain(cdf: impl Fn(f64) -> f64, lo: f64, hi: f64, v: f64, t: f64, theta: f64, pieces: usize) -> f64 {
    let mut total = if lo >= theta { (v - t * lo) * cdf(lo) } else { 0.0 };
    let a = lo.max(theta);
    if a >= hi {
        return total;
    }
    let h = (hi - a) / pieces as f64;
    for k in 0..pieces {
        let x0 = a + k as f64 * h;
        let x1 = x0 + h;
        let lower = if k == 0 && a == lo { cdf(lo) } else { cdf(x0) };
        total += (v - t * 0.5 * (x0 + x1)) * (cdf(x1) - lower);
    }
    total
}

/// Fractional covers of `t` worth trying: every integral set cover built from
/// subsets of `t`, and the uniform covers by all `k`-subsets, weight
/// `1 / C(|t|-1, k-1)`. Returned as `(subset, weight)` lists.
pub fn covers(t: u64) -> Vec<Vec<(u64, f64)>> {
    let items: Vec<u64> = (0..64).filter(|j| t >> j & 1 == 1).map(|j| 1u64 << j).collect();
    let subsets: Vec<u64> = (1..=t).filter(|s| s & !t == 0 && *s != 0).collect();
    let mut out = Vec::new();
    // integral covers with up to three parts
    for &a in &subsets {
        for &b in &subsets {
            for &c in &subsets {
                if a | b | c == t {
                    out.push(vec![(a, 1.0), (b, 1.0), (c, 1.0)]);
                }
            }
        }
    }
    let size = items.len();
    for k in 1..size {
        let ks: Vec<u64> = subsets.iter().copied().filter(|s| s.count_ones() as usize == k).collect();
        let per_item = ks.iter().filter(|s| *s & items[0] != 0).count() as f64;
        out.push(ks.into_iter().map(|s| (s, 1.0 / per_item)).collect());
    }
    out
}

/// Mask to item list.
pub fn items_of(mask: u64, m: usize) -> Vec<usize> {
    (0..m).filter(|j| mask >> j & 1 == 1).collect()
}
