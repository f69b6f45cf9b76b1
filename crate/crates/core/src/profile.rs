//! Random bid profiles and the expectation engine.
//!
//! Three representations: correlated finite support, independent products of
//! per-agent components, and coupled profiles where one 1-D draw `x` fills
//! every `"x"` entry of a bid matrix. Expectations are exact: finite supports
//! are summed, and a draw is split at every point where the outcome can
//! change, after which each piece has a constant winner and closed-form mass
//! and partial expectation.

use crate::auction::{outcome_distribution, Instance, TIE_TOL};
use crate::error::{Error, Result};
use crate::special::{bisect, Tolerance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// One-dimensional bid distribution on `[lo, hi]` with an optional atom at `lo`
/// (mass `F(lo)`) and a closed-form CDF elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ParametricBid {
    /// `F(x) = (x - lo) / (hi - lo)`.
    Uniform { lo: f64, hi: f64 },
    /// `F(x) = intercept + slope * x`.
    Linear { lo: f64, hi: f64, slope: f64, intercept: f64 },
    /// `F(x) = scale / (1 - rate * x)`.
    Reciprocal { lo: f64, hi: f64, scale: f64, rate: f64 },
    /// Density `mu / (v - t x)`, so `F(x) = (mu / t) ln((v - t lo) / (v - t x))`.
    LogDensity { lo: f64, hi: f64, mu: f64, v: f64, t: f64 },
}

impl ParametricBid {
    pub fn lo(&self) -> f64 {
        match *self {
            ParametricBid::Uniform { lo, .. }
            | ParametricBid::Linear { lo, .. }
            | ParametricBid::Reciprocal { lo, .. }
            | ParametricBid::LogDensity { lo, .. } => lo,
        }
    }

    pub fn hi(&self) -> f64 {
        match *self {
            ParametricBid::Uniform { hi, .. }
            | ParametricBid::Linear { hi, .. }
            | ParametricBid::Reciprocal { hi, .. }
            | ParametricBid::LogDensity { hi, .. } => hi,
        }
    }

    /// The closed form, unclamped, on `[lo, hi]`.
    fn raw_cdf(&self, x: f64) -> f64 {
        match *self {
            ParametricBid::Uniform { lo, hi } => (x - lo) / (hi - lo),
            ParametricBid::Linear { slope, intercept, .. } => intercept + slope * x,
            ParametricBid::Reciprocal { scale, rate, .. } => scale / (1.0 - rate * x),
            ParametricBid::LogDensity { lo, mu, v, t, .. } => mu / t * ((v - t * lo) / (v - t * x)).ln(),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x < self.lo() {
            0.0
        } else if x >= self.hi() {
            1.0
        } else {
            self.raw_cdf(x).clamp(0.0, 1.0)
        }
    }

    /// Mass of the atom at `lo`.
    pub fn atom(&self) -> f64 {
        self.raw_cdf(self.lo()).clamp(0.0, 1.0)
    }

    /// Density of the continuous part (0 outside `(lo, hi)`).
    pub fn pdf(&self, x: f64) -> f64 {
        if x < self.lo() || x > self.hi() {
            return 0.0;
        }
        match *self {
            ParametricBid::Uniform { lo, hi } => 1.0 / (hi - lo),
            ParametricBid::Linear { slope, .. } => slope,
            ParametricBid::Reciprocal { scale, rate, .. } => scale * rate / (1.0 - rate * x).powi(2),
            ParametricBid::LogDensity { mu, v, t, .. } => mu / (v - t * x),
        }
    }

    /// `∫_a^b x dF(x)` over the continuous part, `[a, b]` clipped to the support.
    pub fn partial_expectation(&self, a: f64, b: f64) -> f64 {
        let a = a.max(self.lo());
        let b = b.min(self.hi());
        if b <= a {
            return 0.0;
        }
        match *self {
            ParametricBid::Uniform { lo, hi } => (b * b - a * a) / (2.0 * (hi - lo)),
            ParametricBid::Linear { slope, .. } => slope * (b * b - a * a) / 2.0,
            ParametricBid::Reciprocal { scale, rate, .. } => {
                let anti = |x: f64| scale / rate * (1.0 / (1.0 - rate * x) + (1.0 - rate * x).ln());
                anti(b) - anti(a)
            }
            ParametricBid::LogDensity { mu, v, t, .. } => {
                let anti = |x: f64| {
                    let u = v - t * x;
                    -mu / (t * t) * (v * u.ln() - u)
                };
                anti(b) - anti(a)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        self.lo() * self.atom() + self.partial_expectation(self.lo(), self.hi())
    }

    /// Smallest x with `F(x) >= u`, by bisection to 1e-10.
    pub fn quantile(&self, u: f64) -> f64 {
        if u <= self.atom() {
            return self.lo();
        }
        if u >= 1.0 {
            return self.hi();
        }
        let tol = Tolerance { abs_tol: 1e-10, rel_tol: 0.0, max_iters: 200 };
        bisect(|x| self.cdf(x) - u, self.lo(), self.hi(), &tol).unwrap_or_else(|_| self.hi())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidProfile(msg));
        let (lo, hi) = (self.lo(), self.hi());
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi > lo) {
            return bad(format!("support [{lo}, {hi}] must satisfy 0 <= lo < hi"));
        }
        match *self {
            ParametricBid::Uniform { .. } => {}
            ParametricBid::Linear { slope, .. } => {
                if !(slope >= 0.0) {
                    return bad(format!("linear CDF needs slope >= 0, got {slope}"));
                }
            }
            ParametricBid::Reciprocal { scale, rate, .. } => {
                if !(scale >= 0.0 && rate > 0.0 && rate * hi < 1.0) {
                    return bad(format!("reciprocal CDF needs scale >= 0, rate > 0, rate * hi < 1 (scale {scale}, rate {rate})"));
                }
            }
            ParametricBid::LogDensity { mu, v, t, .. } => {
                if !(mu > 0.0 && t > 0.0 && v - t * hi > 0.0) {
                    return bad(format!("log density needs mu > 0, t > 0, v - t hi > 0 (mu {mu}, v {v}, t {t})"));
                }
            }
        }
        let atom = self.raw_cdf(lo);
        if !(-1e-12..=1.0 + 1e-12).contains(&atom) {
            return bad(format!("mass at lo is {atom}, outside [0, 1]"));
        }
        let top = self.raw_cdf(hi);
        if (top - 1.0).abs() > 1e-9 {
            return bad(format!("CDF at hi is {top}, expected 1"));
        }
        Ok(())
    }
}

/// Bid matrix entry: a fixed number or the shared draw (`"x"` in JSON).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Entry {
    Fixed(f64),
    Draw,
}

impl Entry {
    pub fn at(self, x: f64) -> f64 {
        match self {
            Entry::Fixed(b) => b,
            Entry::Draw => x,
        }
    }
}

impl Serialize for Entry {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Entry::Fixed(b) => s.serialize_f64(*b),
            Entry::Draw => s.serialize_str("x"),
        }
    }
}

impl<'de> Deserialize<'de> for Entry {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(b) => Ok(Entry::Fixed(b)),
            Raw::Str(s) if s == "x" => Ok(Entry::Draw),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("bid entry must be a number or \"x\", got \"{s}\""))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub bids: Vec<Vec<f64>>,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteProfile {
    pub atoms: Vec<Atom>,
}

impl FiniteProfile {
    pub fn single(bids: Vec<Vec<f64>>) -> Self {
        FiniteProfile { atoms: vec![Atom { bids, prob: 1.0 }] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledProfile {
    pub draw: ParametricBid,
    pub bids: Vec<Vec<Entry>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowAtom {
    pub bids: Vec<f64>,
    pub prob: f64,
}

/// Independent component of one agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Component {
    Finite { atoms: Vec<RowAtom> },
    Parametric { draw: ParametricBid, bids: Vec<Entry> },
}

impl Component {
    pub fn pure(bids: Vec<f64>) -> Self {
        Component::Finite { atoms: vec![RowAtom { bids, prob: 1.0 }] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductProfile {
    pub components: Vec<Component>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Finite(FiniteProfile),
    Coupled(CoupledProfile),
    Product(ProductProfile),
}

/// A piece of a profile: with probability `weight`, the bid matrix is `rows`
/// evaluated at a draw from `draw` (or fixed when there is no draw).
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub weight: f64,
    pub draw: Option<ParametricBid>,
    pub rows: Vec<Vec<Entry>>,
}

impl Scenario {
    fn uses_draw(&self) -> bool {
        self.draw.is_some() && self.rows.iter().flatten().any(|e| matches!(e, Entry::Draw))
    }

    fn row_uses_draw(&self, i: usize) -> bool {
        self.rows[i].iter().any(|e| matches!(e, Entry::Draw))
    }
}

/// Unilateral deviation of one agent, played independently of the others.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Deviation {
    Pure { bids: Vec<f64> },
    Mixed { atoms: Vec<RowAtom> },
    Parametric { draw: ParametricBid, bids: Vec<Entry> },
}

fn fixed_row(b: &[f64]) -> Vec<Entry> {
    b.iter().map(|&x| Entry::Fixed(x)).collect()
}

fn check_row(row: &[Entry], m: usize, what: &str) -> Result<()> {
    if row.len() != m {
        return Err(Error::InvalidProfile(format!("{what}: row has {} entries, expected {m}", row.len())));
    }
    for e in row {
        if let Entry::Fixed(b) = e {
            if !(b.is_finite() && *b >= 0.0) {
                return Err(Error::InvalidProfile(format!("{what}: bids must be finite and non-negative, got {b}")));
            }
        }
    }
    Ok(())
}

fn check_probs(probs: impl Iterator<Item = f64>, what: &str) -> Result<()> {
    let mut total = 0.0;
    let mut k = 0usize;
    for p in probs {
        if !(p > 0.0) {
            return Err(Error::InvalidProfile(format!("{what}: probabilities must be positive, got {p}")));
        }
        total += p;
        k += 1;
    }
    if k == 0 {
        return Err(Error::InvalidProfile(format!("{what}: empty support")));
    }
    if (total - 1.0).abs() > 1e-12 + 1e-15 * k as f64 {
        return Err(Error::InvalidProfile(format!("{what}: probabilities sum to {total}")));
    }
    Ok(())
}

impl Profile {
    pub fn pure(bids: Vec<Vec<f64>>) -> Self {
        Profile::Finite(FiniteProfile::single(bids))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serializes")
    }

    /// Number of agents the profile describes.
    pub fn agents(&self) -> usize {
        match self {
            Profile::Finite(f) => f.atoms.first().map_or(0, |a| a.bids.len()),
            Profile::Coupled(c) => c.bids.len(),
            Profile::Product(p) => p.components.len(),
        }
    }

    pub fn validate(&self, n: usize, m: usize) -> Result<()> {
        if self.agents() != n {
            return Err(Error::InvalidProfile(format!("profile has {} agents, instance has {n}", self.agents())));
        }
        match self {
            Profile::Finite(f) => {
                check_probs(f.atoms.iter().map(|a| a.prob), "finite profile")?;
                for a in &f.atoms {
                    if a.bids.len() != n {
                        return Err(Error::InvalidProfile("finite profile: atoms disagree on agent count".into()));
                    }
                    for r in &a.bids {
                        check_row(&fixed_row(r), m, "finite profile")?;
                    }
                }
            }
            Profile::Coupled(c) => {
                c.draw.validate()?;
                for r in &c.bids {
                    check_row(r, m, "coupled profile")?;
                }
            }
            Profile::Product(p) => {
                for (i, comp) in p.components.iter().enumerate() {
                    let what = format!("component {i}");
                    match comp {
                        Component::Finite { atoms } => {
                            check_probs(atoms.iter().map(|a| a.prob), &what)?;
                            for a in atoms {
                                check_row(&fixed_row(&a.bids), m, &what)?;
                            }
                        }
                        Component::Parametric { draw, bids } => {
                            draw.validate()?;
                            check_row(bids, m, &what)?;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Decomposition into scenarios. A product with more than one parametric
    /// component has no exact representation here.
    pub fn scenarios(&self) -> Result<Vec<Scenario>> {
        match self {
            Profile::Finite(f) => Ok(f
                .atoms
                .iter()
                .map(|a| Scenario { weight: a.prob, draw: None, rows: a.bids.iter().map(|r| fixed_row(r)).collect() })
                .collect()),
            Profile::Coupled(c) => Ok(vec![Scenario { weight: 1.0, draw: Some(c.draw.clone()), rows: c.bids.clone() }]),
            Profile::Product(p) => {
                let parametric = p.components.iter().filter(|c| matches!(c, Component::Parametric { .. })).count();
                if parametric > 1 {
                    return Err(Error::NonIntegrable(
                        "product with more than one continuous component needs a multi-dimensional integral".into(),
                    ));
                }
                let mut out = vec![Scenario { weight: 1.0, draw: None, rows: Vec::new() }];
                for comp in &p.components {
                    match comp {
                        Component::Finite { atoms } => {
                            let mut next = Vec::with_capacity(out.len() * atoms.len());
                            for s in &out {
                                for a in atoms {
                                    let mut s2 = s.clone();
                                    s2.weight *= a.prob;
                                    s2.rows.push(fixed_row(&a.bids));
                                    next.push(s2);
                                }
                            }
                            out = next;
                        }
                        Component::Parametric { draw, bids } => {
                            for s in &mut out {
                                s.draw = Some(draw.clone());
                                s.rows.push(bids.clone());
                            }
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    /// Law of the other agents' bids, with agent `i`'s row removed.
    pub fn marginal_excluding(&self, i: usize) -> Profile {
        match self {
            Profile::Finite(f) => Profile::Finite(FiniteProfile {
                atoms: f
                    .atoms
                    .iter()
                    .map(|a| Atom {
                        bids: a.bids.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, r)| r.clone()).collect(),
                        prob: a.prob,
                    })
                    .collect(),
            }),
            Profile::Coupled(c) => Profile::Coupled(CoupledProfile {
                draw: c.draw.clone(),
                bids: c.bids.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, r)| r.clone()).collect(),
            }),
            Profile::Product(p) => Profile::Product(ProductProfile {
                components: p.components.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, c)| c.clone()).collect(),
            }),
        }
    }

    /// Deterministic draw of a bid matrix.
    pub fn sample(&self, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(&mut rng)
    }

    pub fn sample_with<R: Rng>(&self, rng: &mut R) -> Vec<Vec<f64>> {
        match self {
            Profile::Finite(f) => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for a in &f.atoms {
                    acc += a.prob;
                    if u < acc {
                        return a.bids.clone();
                    }
                }
                f.atoms.last().expect("non-empty support").bids.clone()
            }
            Profile::Coupled(c) => {
                let x = c.draw.quantile(rng.gen());
                c.bids.iter().map(|r| r.iter().map(|e| e.at(x)).collect()).collect()
            }
            Profile::Product(p) => p
                .components
                .iter()
                .map(|comp| match comp {
                    Component::Finite { atoms } => {
                        let u: f64 = rng.gen();
                        let mut acc = 0.0;
                        for a in atoms {
                            acc += a.prob;
                            if u < acc {
                                return a.bids.clone();
                            }
                        }
                        atoms.last().expect("non-empty component").bids.clone()
                    }
                    Component::Parametric { draw, bids } => {
                        let x = draw.quantile(rng.gen());
                        bids.iter().map(|e| e.at(x)).collect()
                    }
                })
                .collect(),
        }
    }
}

/// Expected per-agent and per-item quantities of a profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeStats {
    /// `E[v_i(x_i)]`.
    pub value: Vec<f64>,
    /// `E[p_i]`.
    pub payment: Vec<f64>,
    /// `P[i wins j]`.
    pub win: Vec<Vec<f64>>,
    /// `E[p_ij]`.
    pub item_payment: Vec<Vec<f64>>,
    /// `P[j unsold]`.
    pub unsold: Vec<f64>,
}

impl OutcomeStats {
    pub fn zeros(n: usize, m: usize) -> Self {
        OutcomeStats {
            value: vec![0.0; n],
            payment: vec![0.0; n],
            win: vec![vec![0.0; m]; n],
            item_payment: vec![vec![0.0; m]; n],
            unsold: vec![0.0; m],
        }
    }

    pub fn gain(&self, inst: &Instance, i: usize) -> f64 {
        self.value[i] - inst.sigmas[i] * self.payment[i]
    }

    /// `E[p_aw(j) j]`, the expected price of item j.
    pub fn item_price(&self, j: usize) -> f64 {
        self.item_payment.iter().map(|r| r[j]).sum()
    }

    fn add_scaled(&mut self, other: &OutcomeStats, w: f64) {
        for (a, b) in self.value.iter_mut().zip(&other.value) {
            *a += w * b;
        }
        for (a, b) in self.payment.iter_mut().zip(&other.payment) {
            *a += w * b;
        }
        for (ra, rb) in self.win.iter_mut().zip(&other.win) {
            for (a, b) in ra.iter_mut().zip(rb) {
                *a += w * b;
            }
        }
        for (ra, rb) in self.item_payment.iter_mut().zip(&other.item_payment) {
            for (a, b) in ra.iter_mut().zip(rb) {
                *a += w * b;
            }
        }
        for (a, b) in self.unsold.iter_mut().zip(&other.unsold) {
            *a += w * b;
        }
    }
}

/// Adds the contribution of `rows` evaluated at `x`, where the piece has
/// probability `mass` and `∫ x dF` over the piece is `px`.
fn accumulate(inst: &Instance, rows: &[Vec<Entry>], x: f64, mass: f64, px: f64, w: f64, out: &mut OutcomeStats) {
    if mass <= 0.0 {
        return;
    }
    let bids: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|e| e.at(x)).collect()).collect();
    for (o, q) in outcome_distribution(inst, &bids) {
        let wq = w * q;
        for i in 0..inst.n {
            let bundle = o.bundle(i);
            if bundle != 0 {
                out.value[i] += wq * mass * inst.valuations[i].value(bundle);
            }
        }
        for j in 0..inst.m {
            match o.winner[j] {
                Some(i) => {
                    let pay = match rows[i][j] {
                        Entry::Fixed(b) => b * mass,
                        Entry::Draw => px,
                    };
                    out.win[i][j] += wq * mass;
                    out.item_payment[i][j] += wq * pay;
                    out.payment[i] += wq * pay;
                }
                None => out.unsold[j] += wq * mass,
            }
        }
    }
}

/// Points inside `(lo, hi)` where the outcome of a draw-dependent matrix can change.
fn breakpoints(inst: &Instance, rows: &[Vec<Entry>], lo: f64, hi: f64) -> Vec<f64> {
    let mut pts = Vec::new();
    let push_window = |c: f64, pts: &mut Vec<f64>| {
        pts.push(c - TIE_TOL);
        pts.push(c);
        pts.push(c + TIE_TOL);
    };
    for r in rows {
        for e in r {
            if let Entry::Fixed(b) = e {
                push_window(*b, &mut pts);
            }
        }
    }
    for j in 0..inst.m {
        pts.push(inst.reserves[j]);
        for c in inst.tiebreak.critical_values(j) {
            push_window(c, &mut pts);
        }
    }
    pts.retain(|&p| p > lo && p < hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Exact expectations of one scenario, weighted by its probability, added to `out`.
pub fn accumulate_scenario(inst: &Instance, sc: &Scenario, out: &mut OutcomeStats) {
    if !sc.uses_draw() {
        accumulate(inst, &sc.rows, 0.0, 1.0, 0.0, sc.weight, out);
        return;
    }
    let d = sc.draw.as_ref().expect("draw present");
    let (lo, hi) = (d.lo(), d.hi());
    let atom = d.atom();
    accumulate(inst, &sc.rows, lo, atom, lo * atom, sc.weight, out);
    let mut edges = vec![lo];
    edges.extend(breakpoints(inst, &sc.rows, lo, hi));
    edges.push(hi);
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mass = d.cdf(b) - d.cdf(a);
        let px = d.partial_expectation(a, b);
        accumulate(inst, &sc.rows, 0.5 * (a + b), mass, px, sc.weight, out);
    }
}

pub fn scenarios_stats(inst: &Instance, scenarios: &[Scenario]) -> OutcomeStats {
    let mut out = OutcomeStats::zeros(inst.n, inst.m);
    for sc in scenarios {
        accumulate_scenario(inst, sc, &mut out);
    }
    out
}

/// `E[value]`, `E[payment]`, win probabilities and item prices under `profile`.
pub fn expected_outcome_stats(inst: &Instance, profile: &Profile) -> Result<OutcomeStats> {
    profile.validate(inst.n, inst.m)?;
    Ok(scenarios_stats(inst, &profile.scenarios()?))
}

/// Stats when agent `i` replaces its bids by `dev`, played independently of
/// the others' (possibly correlated) bids.
pub fn deviation_stats(inst: &Instance, scenarios: &[Scenario], i: usize, dev: &Deviation) -> Result<OutcomeStats> {
    match dev {
        Deviation::Pure { bids } => {
            let row = fixed_row(bids);
            let mut out = OutcomeStats::zeros(inst.n, inst.m);
            for sc in scenarios {
                let mut s = sc.clone();
                s.rows[i] = row.clone();
                accumulate_scenario(inst, &s, &mut out);
            }
            Ok(out)
        }
        Deviation::Mixed { atoms } => {
            let mut out = OutcomeStats::zeros(inst.n, inst.m);
            for a in atoms {
                let part = deviation_stats(inst, scenarios, i, &Deviation::Pure { bids: a.bids.clone() })?;
                out.add_scaled(&part, a.prob);
            }
            Ok(out)
        }
        Deviation::Parametric { draw, bids } => {
            let mut out = OutcomeStats::zeros(inst.n, inst.m);
            for sc in scenarios {
                let others_draw = sc.uses_draw() && (0..inst.n).any(|k| k != i && sc.row_uses_draw(k));
                if others_draw {
                    return Err(Error::NonIntegrable(
                        "continuous deviation against continuous opponents needs a two-dimensional integral".into(),
                    ));
                }
                let mut s = sc.clone();
                s.rows[i] = bids.clone();
                s.draw = Some(draw.clone());
                accumulate_scenario(inst, &s, &mut out);
            }
            Ok(out)
        }
    }
}
