//! Markets, tie-breaking and one-shot simultaneous first-price auctions with
//! reserves, plus the welfare-optimal allocation and the quantities derived
//! from it (representatives, rightful winners, relative reserve gaps).

use crate::error::{Error, Result};
use crate::valuation::{Valuation, MAX_ENUM_ITEMS};
use serde::{Deserialize, Serialize};

/// Bids within this distance of the top bid count as tied; also the matching
/// tolerance for tie-override values.
pub const TIE_TOL: f64 = 1e-12;

/// Default cap on `(n+1)^m` assignments enumerated for OPT.
pub const DEFAULT_ENUM_LIMIT: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TieOverride {
    pub auction: usize,
    pub value: f64,
    pub priority: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TieThreshold {
    pub auction: usize,
    pub threshold: f64,
    pub below: Vec<usize>,
    pub above: Vec<usize>,
}

/// Per-auction tie rule. `default[j]` is a priority list (earlier wins); a
/// missing or empty entry means lowest agent id first. Overrides apply when
/// the tied bid equals their value, thresholds split ties at `<= threshold`
/// versus above. With `uniform` set, ties are split evenly at random instead.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TieBreak {
    #[serde(default)]
    pub default: Vec<Vec<usize>>,
    #[serde(default)]
    pub overrides: Vec<TieOverride>,
    #[serde(default)]
    pub thresholds: Vec<TieThreshold>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub uniform: bool,
}

impl TieBreak {
    pub fn lexicographic() -> Self {
        TieBreak::default()
    }

    pub fn uniform() -> Self {
        TieBreak { uniform: true, ..TieBreak::default() }
    }

    fn validate(&self, n: usize, m: usize) -> Result<()> {
        let perm = |p: &[usize], what: &str| -> Result<()> {
            let mut seen = vec![false; n];
            if p.len() != n || p.iter().any(|&a| a >= n || std::mem::replace(&mut seen[a], true)) {
                return Err(Error::InvalidInstance(format!("{what}: priority {p:?} is not a permutation of 0..{n}")));
            }
            Ok(())
        };
        if self.default.len() > m {
            return Err(Error::InvalidInstance(format!("tiebreak default has {} lists for {m} auctions", self.default.len())));
        }
        for (j, p) in self.default.iter().enumerate() {
            if !p.is_empty() {
                perm(p, &format!("tiebreak default for auction {j}"))?;
            }
        }
        for (k, o) in self.overrides.iter().enumerate() {
            if o.auction >= m {
                return Err(Error::UnknownItem { item: o.auction, m });
            }
            perm(&o.priority, &format!("tiebreak override {k}"))?;
            if self.overrides[..k].iter().any(|p| p.auction == o.auction && (p.value - o.value).abs() <= TIE_TOL) {
                return Err(Error::InvalidInstance(format!("duplicate tie override value {} in auction {}", o.value, o.auction)));
            }
        }
        for (k, t) in self.thresholds.iter().enumerate() {
            if t.auction >= m {
                return Err(Error::UnknownItem { item: t.auction, m });
            }
            perm(&t.below, &format!("tiebreak threshold {k} (below)"))?;
            perm(&t.above, &format!("tiebreak threshold {k} (above)"))?;
        }
        Ok(())
    }

    /// Priority list in force for a tie at `value` in auction `j`; `None`
    /// means lexicographic.
    pub fn priority(&self, j: usize, value: f64) -> Option<&[usize]> {
        if let Some(o) = self.overrides.iter().find(|o| o.auction == j && (o.value - value).abs() <= TIE_TOL) {
            return Some(&o.priority);
        }
        if let Some(t) = self.thresholds.iter().find(|t| t.auction == j) {
            return Some(if value <= t.threshold + TIE_TOL { &t.below } else { &t.above });
        }
        self.default.get(j).filter(|p| !p.is_empty()).map(Vec::as_slice)
    }

    /// Tie values at which the rule changes, per auction.
    pub fn critical_values(&self, j: usize) -> Vec<f64> {
        let mut out: Vec<f64> = self.overrides.iter().filter(|o| o.auction == j).map(|o| o.value).collect();
        out.extend(self.thresholds.iter().filter(|t| t.auction == j).map(|t| t.threshold));
        out
    }

    /// Winner among `tied` (non-empty) under the deterministic rule.
    pub fn pick(&self, j: usize, value: f64, tied: &[usize]) -> usize {
        match self.priority(j, value) {
            Some(p) => p.iter().copied().find(|a| tied.contains(a)).unwrap_or(tied[0]),
            None => tied[0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub n: usize,
    pub m: usize,
    pub reserves: Vec<f64>,
    pub valuations: Vec<Valuation>,
    pub sigmas: Vec<f64>,
    pub taus: Vec<f64>,
    #[serde(with = "crate::ext::vec")]
    pub budgets: Vec<f64>,
    #[serde(default)]
    pub tiebreak: TieBreak,
}

impl Instance {
    /// Unit targets, no budgets, zero reserves, lexicographic ties.
    pub fn simple(valuations: Vec<Valuation>, sigmas: Vec<f64>) -> Result<Self> {
        let n = valuations.len();
        let m = valuations.first().map_or(0, Valuation::items);
        let inst = Instance {
            n,
            m,
            reserves: vec![0.0; m],
            valuations,
            sigmas,
            taus: vec![1.0; n],
            budgets: vec![f64::INFINITY; n],
            tiebreak: TieBreak::default(),
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn with_reserves(mut self, reserves: Vec<f64>) -> Result<Self> {
        self.reserves = reserves;
        self.validate()?;
        Ok(self)
    }

    pub fn with_budgets(mut self, budgets: Vec<f64>) -> Result<Self> {
        self.budgets = budgets;
        self.validate()?;
        Ok(self)
    }

    pub fn with_taus(mut self, taus: Vec<f64>) -> Result<Self> {
        self.taus = taus;
        self.validate()?;
        Ok(self)
    }

    pub fn with_tiebreak(mut self, tiebreak: TieBreak) -> Result<Self> {
        self.tiebreak = tiebreak;
        self.validate()?;
        Ok(self)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let inst: Instance = serde_json::from_str(s)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    /// Structural checks. A single agent is accepted (degenerate markets are
    /// handy in tests and probes).
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInstance(msg));
        if self.n == 0 || self.m == 0 {
            return bad(format!("need n >= 1 and m >= 1, got n = {}, m = {}", self.n, self.m));
        }
        if self.m > 64 {
            return bad(format!("at most 64 items supported, got {}", self.m));
        }
        for (name, len) in [
            ("valuations", self.valuations.len()),
            ("sigmas", self.sigmas.len()),
            ("taus", self.taus.len()),
            ("budgets", self.budgets.len()),
        ] {
            if len != self.n {
                return bad(format!("{name} has {len} entries, expected n = {}", self.n));
            }
        }
        if self.reserves.len() != self.m {
            return bad(format!("reserves has {} entries, expected m = {}", self.reserves.len(), self.m));
        }
        if self.reserves.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return bad("reserves must be finite and non-negative".into());
        }
        for v in &self.valuations {
            v.validate(self.m)?;
        }
        if self.sigmas.iter().any(|s| !(0.0..=1.0).contains(s)) {
            return bad("types must lie in [0, 1]".into());
        }
        if self.taus.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return bad("targets must be positive and finite".into());
        }
        if self.budgets.iter().any(|b| !(*b > 0.0)) {
            return bad("budgets must be positive or inf".into());
        }
        self.tiebreak.validate(self.n, self.m)
    }

    pub fn budgeted(&self) -> bool {
        self.budgets.iter().any(|b| b.is_finite())
    }
}

/// Result of one round of simultaneous auctions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    /// Winner per item, `None` when unsold.
    pub winner: Vec<Option<usize>>,
    /// Price paid for each item by its winner (0 when unsold).
    pub price: Vec<f64>,
}

impl Outcome {
    pub fn bundle(&self, i: usize) -> u64 {
        self.winner.iter().enumerate().filter(|(_, w)| **w == Some(i)).fold(0, |m, (j, _)| m | 1 << j)
    }

    pub fn payment(&self, i: usize) -> f64 {
        self.winner.iter().zip(&self.price).filter(|(w, _)| **w == Some(i)).map(|(_, p)| p).sum()
    }

    /// `p_ij` as an n x m matrix.
    pub fn payments(&self, n: usize) -> Vec<Vec<f64>> {
        let mut p = vec![vec![0.0; self.price.len()]; n];
        for (j, w) in self.winner.iter().enumerate() {
            if let Some(i) = w {
                p[*i][j] = self.price[j];
            }
        }
        p
    }
}

/// Reserve-meeting agents tied at the top of auction `j`, with the top bid.
pub fn top_bidders(inst: &Instance, j: usize, bid: impl Fn(usize) -> f64) -> (Vec<usize>, f64) {
    let r = inst.reserves[j];
    let mut top = f64::NEG_INFINITY;
    for i in 0..inst.n {
        let b = bid(i);
        if b >= r && b > top {
            top = b;
        }
    }
    if top == f64::NEG_INFINITY {
        return (Vec::new(), 0.0);
    }
    let tied = (0..inst.n).filter(|&i| bid(i) >= r && bid(i) >= top - TIE_TOL).collect();
    (tied, top)
}

/// Winners of auction `j` with their probabilities: a single certain winner
/// under a deterministic rule, an even split under uniform ties, empty if unsold.
pub fn item_winners(inst: &Instance, j: usize, bid: impl Fn(usize) -> f64) -> Vec<(usize, f64)> {
    let (tied, top) = top_bidders(inst, j, &bid);
    if tied.is_empty() {
        return Vec::new();
    }
    if inst.tiebreak.uniform {
        let p = 1.0 / tied.len() as f64;
        return tied.into_iter().map(|i| (i, p)).collect();
    }
    vec![(inst.tiebreak.pick(j, top, &tied), 1.0)]
}

/// Runs all auctions on the pure bid matrix `bids[i][j]`. Under uniform ties the
/// lowest tied id is reported; use [`outcome_distribution`] for the lottery.
pub fn run_auctions(inst: &Instance, bids: &[Vec<f64>]) -> Outcome {
    let mut winner = vec![None; inst.m];
    let mut price = vec![0.0; inst.m];
    for j in 0..inst.m {
        let (tied, top) = top_bidders(inst, j, |i| bids[i][j]);
        if tied.is_empty() {
            continue;
        }
        let w = if inst.tiebreak.uniform { tied[0] } else { inst.tiebreak.pick(j, top, &tied) };
        winner[j] = Some(w);
        price[j] = bids[w][j];
    }
    Outcome { winner, price }
}

/// All outcomes of `bids` with their probabilities (one outcome unless ties
/// are uniform).
pub fn outcome_distribution(inst: &Instance, bids: &[Vec<f64>]) -> Vec<(Outcome, f64)> {
    if !inst.tiebreak.uniform {
        return vec![(run_auctions(inst, bids), 1.0)];
    }
    let per_item: Vec<Vec<(usize, f64)>> = (0..inst.m).map(|j| item_winners(inst, j, |i| bids[i][j])).collect();
    let mut out = vec![(Outcome { winner: vec![None; inst.m], price: vec![0.0; inst.m] }, 1.0)];
    for (j, ws) in per_item.iter().enumerate() {
        if ws.is_empty() {
            continue;
        }
        let mut next = Vec::with_capacity(out.len() * ws.len());
        for (o, p) in &out {
            for &(w, q) in ws {
                let mut o2 = o.clone();
                o2.winner[j] = Some(w);
                o2.price[j] = bids[w][j];
                next.push((o2, p * q));
            }
        }
        out = next;
    }
    out
}

/// Gain `v_i(x_i) - sigma_i p_i` of agent `i` in outcome `o`.
pub fn gain(inst: &Instance, i: usize, o: &Outcome) -> f64 {
    inst.valuations[i].value(o.bundle(i)) - inst.sigmas[i] * o.payment(i)
}

/// Equivalent instance with unit targets: `v' = tau v`, `sigma' = sigma tau`.
pub fn normalize_targets(inst: &Instance) -> Result<Instance> {
    let mut out = inst.clone();
    for i in 0..inst.n {
        let (s, t) = (inst.sigmas[i], inst.taus[i]);
        if s * t > 1.0 + 1e-12 {
            return Err(Error::InvalidInstance(format!("agent {i}: tau * sigma = {} exceeds 1", s * t)));
        }
        out.valuations[i] = inst.valuations[i].scaled(t);
        out.sigmas[i] = (s * t).min(1.0);
        out.taus[i] = 1.0;
    }
    Ok(out)
}

/// Item-to-agent assignment (`None` = unassigned) and its liquid welfare.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub owner: Vec<Option<usize>>,
    pub value: f64,
}

impl Allocation {
    pub fn bundle(&self, i: usize) -> u64 {
        self.owner.iter().enumerate().filter(|(_, w)| **w == Some(i)).fold(0, |m, (j, _)| m | 1 << j)
    }
}

/// Liquid welfare of assigning bundle masks to agents.
pub fn allocation_welfare(inst: &Instance, bundles: &[u64]) -> f64 {
    (0..inst.n).map(|i| (inst.taus[i] * inst.valuations[i].value(bundles[i])).min(inst.budgets[i])).sum()
}

pub fn optimal_allocation(inst: &Instance) -> Result<Allocation> {
    optimal_allocation_with_limit(inst, DEFAULT_ENUM_LIMIT)
}

/// Exhaustive search over every assignment of items to agents or to nobody.
/// The first maximizer in lexicographic order of assignments is returned.
pub fn optimal_allocation_with_limit(inst: &Instance, limit: usize) -> Result<Allocation> {
    let base = inst.n + 1;
    let needed = (base as f64).powi(inst.m as i32);
    if needed > limit as f64 {
        return Err(Error::EnumerationLimit { needed, limit });
    }
    let total = base.pow(inst.m as u32);
    let mut digits = vec![0usize; inst.m];
    let mut bundles = vec![0u64; inst.n];
    let mut best = f64::NEG_INFINITY;
    let mut best_digits = digits.clone();
    for _ in 0..total {
        bundles.iter_mut().for_each(|b| *b = 0);
        for (j, &d) in digits.iter().enumerate() {
            if d > 0 {
                bundles[d - 1] |= 1 << j;
            }
        }
        let w = allocation_welfare(inst, &bundles);
        if w > best {
            best = w;
            best_digits.clone_from(&digits);
        }
        for d in digits.iter_mut().rev() {
            *d += 1;
            if *d < base {
                break;
            }
            *d = 0;
        }
    }
    let owner = best_digits.iter().map(|&d| if d == 0 { None } else { Some(d - 1) }).collect();
    Ok(Allocation { owner, value: best })
}

/// OPT-induced additive representatives `v*_ij` for the allocation `alloc`.
/// Exactness on the allocated bundle and the lower-bound property on all
/// subsets are re-checked when m <= 16.
pub fn opt_representatives(inst: &Instance, alloc: &Allocation) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(inst.n);
    for i in 0..inst.n {
        let v = &inst.valuations[i];
        let bundle = alloc.bundle(i);
        let rep = v.representative(bundle)?;
        let on_bundle: f64 = (0..inst.m).filter(|j| bundle >> j & 1 == 1).map(|j| rep[j]).sum();
        if (on_bundle - v.value(bundle)).abs() > 1e-9 * (1.0 + v.value(bundle)) {
            return Err(Error::NotXos(format!("agent {i}: representative is not exact on its bundle")));
        }
        if inst.m <= MAX_ENUM_ITEMS && !v.supports(&rep, inst.m) {
            return Err(Error::NotXos(format!("agent {i}: representative exceeds the valuation on some bundle")));
        }
        out.push(rep);
    }
    Ok(out)
}

/// Rightful winner per item: the largest representative value, ties resolved
/// toward the item's owner in `alloc`, then toward the lowest id.
pub fn rightful_winners_for(reps: &[Vec<f64>], alloc: &Allocation) -> Vec<usize> {
    let m = alloc.owner.len();
    (0..m)
        .map(|j| {
            let top = reps.iter().map(|r| r[j]).fold(f64::NEG_INFINITY, f64::max);
            let tied: Vec<usize> = (0..reps.len()).filter(|&i| reps[i][j] == top).collect();
            match alloc.owner[j] {
                Some(o) if tied.contains(&o) => o,
                _ => tied[0],
            }
        })
        .collect()
}

pub fn rightful_winners(inst: &Instance) -> Result<Vec<usize>> {
    let alloc = optimal_allocation(inst)?;
    let reps = opt_representatives(inst, &alloc)?;
    Ok(rightful_winners_for(&reps, &alloc))
}

/// Relative reserve gaps `eta_j = r_j / v*_{rw(j) j}` and their minimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaGaps {
    pub per_item: Vec<f64>,
    pub eta: f64,
}

pub fn eta_gaps(inst: &Instance) -> Result<EtaGaps> {
    let alloc = optimal_allocation(inst)?;
    let reps = opt_representatives(inst, &alloc)?;
    let rw = rightful_winners_for(&reps, &alloc);
    let mut per_item = Vec::with_capacity(inst.m);
    for j in 0..inst.m {
        let r = inst.reserves[j];
        let eta = if r == 0.0 { 0.0 } else { r / reps[rw[j]][j] };
        if !(eta < 1.0) {
            return Err(Error::InfeasibleReserve { item: j, eta });
        }
        per_item.push(eta);
    }
    let eta = per_item.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(EtaGaps { per_item, eta })
}

/// Sorted, distinct types in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeSet(Vec<f64>);

impl TypeSet {
    pub fn new(mut types: Vec<f64>) -> Result<Self> {
        if types.is_empty() {
            return Err(Error::InvalidParameter("type set is empty".into()));
        }
        if types.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::InvalidParameter(format!("types must lie in [0, 1], got {types:?}")));
        }
        types.sort_by(f64::total_cmp);
        types.dedup();
        Ok(TypeSet(types))
    }

    /// `T ∪ {0}`.
    pub fn augmented(&self) -> TypeSet {
        let mut v = self.0.clone();
        v.push(0.0);
        TypeSet::new(v).expect("valid types")
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn min(&self) -> f64 {
        self.0[0]
    }

    pub fn max(&self) -> f64 {
        self.0[self.0.len() - 1]
    }

    pub fn contains(&self, t: f64) -> bool {
        self.0.iter().any(|&s| s == t)
    }
}
