//! Repeated single-item first-price auction among regret-minimizing bidders.
//!
//! Bids live on the grid `{0, eps, 2 eps, ..., v_i}` (no overbidding). Ties
//! among the highest reserve-meeting bids are broken uniformly at random.
//! Learners get full information: after each round they see the expected
//! gain every grid bid would have earned against the others' bids.

use crate::auction::{Instance, TieBreak};
use crate::equilibrium::{verify_cce, DeviationSet, EquilibriumReport, VerifyConfig};
use crate::error::{Error, Result};
use crate::profile::{Atom, FiniteProfile, Profile};
use crate::valuation::Valuation;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

const GRID_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatedGame {
    pub values: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub reserve: f64,
    pub step: f64,
    pub rounds: usize,
}

fn grid_index(x: f64, step: f64, what: &str) -> Result<usize> {
    let k = (x / step).round();
    if x < 0.0 || (k * step - x).abs() > GRID_TOL * step.max(1.0) {
        return Err(Error::InvalidParameter(format!("{what} = {x} is not a multiple of the increment {step}")));
    }
    Ok(k as usize)
}

impl RepeatedGame {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) {
            return Err(Error::InvalidParameter("increment must be positive".into()));
        }
        if self.values.is_empty() || self.values.len() != self.sigmas.len() {
            return Err(Error::InvalidParameter("need one type per value and at least one agent".into()));
        }
        if self.sigmas.iter().any(|s| !(0.0..=1.0).contains(s)) {
            return Err(Error::InvalidParameter("types must lie in [0, 1]".into()));
        }
        for v in &self.values {
            grid_index(*v, self.step, "value")?;
        }
        grid_index(self.reserve, self.step, "reserve")?;
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Number of grid bids of agent `i`.
    pub fn actions(&self, i: usize) -> usize {
        (self.values[i] / self.step).round() as usize + 1
    }

    pub fn bid(&self, k: usize) -> f64 {
        k as f64 * self.step
    }

    fn reserve_index(&self) -> usize {
        (self.reserve / self.step).round() as usize
    }

    /// Expected gain of agent `i` bidding grid index `k` against the others' indices.
    pub fn gain(&self, i: usize, k: usize, bids: &[usize]) -> f64 {
        let r = self.reserve_index();
        if k < r {
            return 0.0;
        }
        let mut top = 0usize;
        let mut count = 0usize;
        for (j, &b) in bids.iter().enumerate() {
            if j == i || b < r {
                continue;
            }
            if b > top || count == 0 {
                top = b;
                count = 1;
            } else if b == top {
                count += 1;
            }
        }
        let win = self.values[i] - self.sigmas[i] * self.bid(k);
        if count == 0 || k > top {
            win
        } else if k == top {
            win / (count + 1) as f64
        } else {
            0.0
        }
    }

    /// The stage game as a one-item instance with uniform ties.
    pub fn instance(&self) -> Result<Instance> {
        Instance::simple(self.values.iter().map(|&v| Valuation::additive(vec![v])).collect(), self.sigmas.clone())?
            .with_reserves(vec![self.reserve])?
            .with_tiebreak(TieBreak::uniform())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Hedge,
    EpsilonGreedyMeanBased,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub algorithm: Algorithm,
    /// Hedge learning rate; default `sqrt(ln K / T)`.
    pub rate: Option<f64>,
    /// Exploration probability in round `s` is `min(1, scale * s^(-1/3))`.
    pub exploration: f64,
    pub seed: u64,
}

impl LearnerConfig {
    pub fn hedge(seed: u64) -> Self {
        LearnerConfig { algorithm: Algorithm::Hedge, rate: None, exploration: 1.0, seed }
    }

    pub fn epsilon_greedy(seed: u64) -> Self {
        LearnerConfig { algorithm: Algorithm::EpsilonGreedyMeanBased, rate: None, exploration: 1.0, seed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub game: RepeatedGame,
    /// Grid index of every agent's bid, per round.
    pub bids: Vec<Vec<usize>>,
    /// Realized winner (after the random tie-break), per round.
    pub winners: Vec<Option<usize>>,
    pub payments: Vec<f64>,
    /// Expected gain of every agent at the played profile, per round.
    pub gains: Vec<Vec<f64>>,
}

struct Learner {
    cfg: LearnerConfig,
    rng: ChaCha8Rng,
    /// Cumulative counterfactual gains per grid bid.
    totals: Vec<f64>,
    rate: f64,
}

impl Learner {
    fn choose(&mut self, round: usize) -> usize {
        let k = self.totals.len();
        match self.cfg.algorithm {
            Algorithm::Hedge => {
                let top = self.totals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let w: Vec<f64> = self.totals.iter().map(|g| (self.rate * (g - top)).exp()).collect();
                let mut u = self.rng.gen::<f64>() * w.iter().sum::<f64>();
                for (a, x) in w.iter().enumerate() {
                    if u < *x {
                        return a;
                    }
                    u -= x;
                }
                k - 1
            }
            Algorithm::EpsilonGreedyMeanBased => {
                let explore = (self.cfg.exploration * ((round + 1) as f64).powf(-1.0 / 3.0)).min(1.0);
                if self.rng.gen::<f64>() < explore {
                    self.rng.gen_range(0..k)
                } else {
                    let mut best = 0;
                    for a in 1..k {
                        if self.totals[a] > self.totals[best] {
                            best = a;
                        }
                    }
                    best
                }
            }
        }
    }
}

/// Simulates the repeated auction; deterministic given the seeds.
pub fn run_repeated(game: &RepeatedGame, configs: &[LearnerConfig]) -> Result<History> {
    game.validate()?;
    let n = game.n();
    if configs.len() != n {
        return Err(Error::InvalidParameter(format!("{} learner configs for {n} agents", configs.len())));
    }
    let mut learners: Vec<Learner> = configs
        .iter()
        .enumerate()
        .map(|(i, cfg)| {
            let k = game.actions(i);
            let rate = cfg.rate.unwrap_or_else(|| ((k as f64).ln().max(1e-12) / game.rounds.max(1) as f64).sqrt());
            Learner { cfg: *cfg, rng: ChaCha8Rng::seed_from_u64(cfg.seed), totals: vec![0.0; k], rate }
        })
        .collect();
    if learners.iter().any(|l| !(l.rate > 0.0) || !(l.cfg.exploration > 0.0)) {
        return Err(Error::InvalidParameter("learning rates and exploration scales must be positive".into()));
    }
    let tie_seed = configs.iter().fold(0x9e37_79b9_7f4a_7c15u64, |acc, c| acc.rotate_left(17) ^ c.seed);
    let mut tie_rng = ChaCha8Rng::seed_from_u64(tie_seed);
    let r = game.reserve_index();
    let mut h = History {
        game: game.clone(),
        bids: Vec::with_capacity(game.rounds),
        winners: Vec::with_capacity(game.rounds),
        payments: Vec::with_capacity(game.rounds),
        gains: Vec::with_capacity(game.rounds),
    };
    for round in 0..game.rounds {
        let bids: Vec<usize> = learners.iter_mut().map(|l| l.choose(round)).collect();
        let top = bids.iter().copied().filter(|&b| b >= r).max();
        let winner = top.map(|t| {
            let tied: Vec<usize> = (0..n).filter(|&i| bids[i] == t).collect();
            tied[tie_rng.gen_range(0..tied.len())]
        });
        let payment = winner.map_or(0.0, |w| game.bid(bids[w]));
        let gains: Vec<f64> = (0..n).map(|i| game.gain(i, bids[i], &bids)).collect();
        for (i, l) in learners.iter_mut().enumerate() {
            for k in 0..l.totals.len() {
                l.totals[k] += game.gain(i, k, &bids);
            }
        }
        h.bids.push(bids);
        h.winners.push(winner);
        h.payments.push(payment);
        h.gains.push(gains);
    }
    Ok(h)
}

fn window(h: &History, frac: f64) -> std::ops::Range<usize> {
    let len = h.bids.len();
    let w = ((len as f64 * frac.clamp(0.0, 1.0)).ceil() as usize).min(len);
    len - w..len
}

/// Best fixed grid bid in hindsight minus realized gains, over `range`.
pub fn regret_over(h: &History, i: usize, range: std::ops::Range<usize>) -> f64 {
    let g = &h.game;
    let mut totals = vec![0.0; g.actions(i)];
    let mut played = 0.0;
    for t in range {
        let bids = &h.bids[t];
        for (k, tot) in totals.iter_mut().enumerate() {
            *tot += g.gain(i, k, bids);
        }
        played += g.gain(i, bids[i], bids);
    }
    totals.iter().copied().fold(f64::NEG_INFINITY, f64::max) - played
}

/// `R_i^T` over the whole history.
pub fn regret(h: &History, i: usize) -> f64 {
    regret_over(h, i, 0..h.bids.len())
}

/// Fraction of rounds in `range` where the item sold.
pub fn well_supported_fraction_over(h: &History, range: std::ops::Range<usize>) -> f64 {
    let len = range.len();
    if len == 0 {
        return 1.0;
    }
    let r = h.game.reserve_index();
    range.filter(|&t| h.bids[t].iter().any(|&b| b >= r)).count() as f64 / len as f64
}

pub fn well_supported_fraction(h: &History) -> f64 {
    well_supported_fraction_over(h, 0..h.bids.len())
}

/// Empirical joint distribution of the last `frac` of rounds.
pub fn empirical_cce(h: &History, frac: f64) -> FiniteProfile {
    let range = window(h, frac);
    let total = range.len() as f64;
    let mut counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for t in range {
        *counts.entry(h.bids[t].clone()).or_insert(0) += 1;
    }
    FiniteProfile {
        atoms: counts
            .into_iter()
            .map(|(b, c)| Atom { bids: b.iter().map(|&k| vec![h.game.bid(k)]).collect(), prob: c as f64 / total })
            .collect(),
    }
}

/// Verifies an empirical profile of `game` against every agent's grid bids.
pub fn verify_empirical(game: &RepeatedGame, profile: &FiniteProfile, cfg: &VerifyConfig) -> Result<EquilibriumReport> {
    let inst = game.instance()?;
    let grids = (0..game.n()).map(|i| vec![(0..game.actions(i)).map(|k| game.bid(k)).collect()]).collect();
    verify_cce(&inst, &Profile::Finite(profile.clone()), &DeviationSet { grids }, cfg)
}

/// Grid indices played by each agent with frequency at least `min_freq` in the window.
pub fn window_supports(h: &History, frac: f64, min_freq: f64) -> Vec<Vec<usize>> {
    let range = window(h, frac);
    let total = range.len().max(1) as f64;
    (0..h.game.n())
        .map(|i| {
            let mut counts = vec![0usize; h.game.actions(i)];
            for t in range.clone() {
                counts[h.bids[t][i]] += 1;
            }
            (0..counts.len()).filter(|&k| counts[k] as f64 / total >= min_freq).collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domination {
    pub agent: usize,
    pub action: f64,
    pub dominated_by: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoUndominatedReport {
    pub dominated: Vec<Domination>,
    pub clean: bool,
}

/// Two agents: for each support action of one agent, looks for a grid bid
/// that weakly dominates it against the other's support (never worse,
/// somewhere strictly better).
pub fn co_undominated_check(game: &RepeatedGame, a1: &[usize], a2: &[usize]) -> Result<CoUndominatedReport> {
    game.validate()?;
    if game.n() != 2 {
        return Err(Error::InvalidParameter("the co-undominated check is defined for two agents".into()));
    }
    let mut dominated = Vec::new();
    for (i, own, other) in [(0usize, a1, a2), (1, a2, a1)] {
        for &a in own {
            if a >= game.actions(i) {
                return Err(Error::InvalidParameter(format!("action {a} outside agent {i}'s grid")));
            }
            let payoff = |k: usize, b: usize| {
                let mut bids = [0usize; 2];
                bids[i] = k;
                bids[1 - i] = b;
                game.gain(i, k, &bids)
            };
            for alt in 0..game.actions(i) {
                if alt == a {
                    continue;
                }
                let never_worse = other.iter().all(|&b| payoff(alt, b) >= payoff(a, b) - 1e-12);
                let sometimes_better = other.iter().any(|&b| payoff(alt, b) > payoff(a, b) + 1e-12);
                if never_worse && sometimes_better {
                    dominated.push(Domination { agent: i, action: game.bid(a), dominated_by: game.bid(alt) });
                    break;
                }
            }
        }
    }
    Ok(CoUndominatedReport { clean: dominated.is_empty(), dominated })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnSummary {
    pub rounds: usize,
    pub regret: Vec<f64>,
    pub regret_per_round: Vec<f64>,
    pub window_rounds: usize,
    pub window_regret_per_round: Vec<f64>,
    pub sold_fraction: f64,
    pub window_sold_fraction: f64,
    pub cce_epsilon: f64,
    pub cce_atoms: usize,
    pub supports: Vec<Vec<f64>>,
    pub co_undominated: Option<CoUndominatedReport>,
}

/// Window fraction and support frequency threshold used by [`summarize`].
pub const WINDOW: f64 = 0.25;
pub const SUPPORT_FREQ: f64 = 0.01;

/// Regrets, sold fractions and the final-window CCE statistics of a run.
pub fn summarize(h: &History, frac: f64, min_freq: f64) -> Result<LearnSummary> {
    let g = &h.game;
    let n = g.n();
    let t = h.bids.len();
    let range = window(h, frac);
    let wlen = range.len();
    let regret: Vec<f64> = (0..n).map(|i| regret(h, i)).collect();
    let cce = empirical_cce(h, frac);
    let report = verify_empirical(g, &cce, &VerifyConfig::default())?;
    let supports_idx = window_supports(h, frac, min_freq);
    let co = if n == 2 { Some(co_undominated_check(g, &supports_idx[0], &supports_idx[1])?) } else { None };
    Ok(LearnSummary {
        rounds: t,
        regret_per_round: regret.iter().map(|r| r / t.max(1) as f64).collect(),
        regret,
        window_rounds: wlen,
        window_regret_per_round: (0..n).map(|i| regret_over(h, i, range.clone()) / wlen.max(1) as f64).collect(),
        sold_fraction: well_supported_fraction(h),
        window_sold_fraction: well_supported_fraction_over(h, range),
        cce_epsilon: report.epsilon,
        cce_atoms: cce.atoms.len(),
        supports: supports_idx.iter().map(|s| s.iter().map(|&k| g.bid(k)).collect()).collect(),
        co_undominated: co,
    })
}

/// Writes `round,bid_0..,winner,payment,gain_0..` rows.
pub fn write_history_csv<W: std::io::Write>(w: W, h: &History) -> Result<()> {
    let n = h.game.n();
    let mut wr = csv::Writer::from_writer(w);
    let mut header = vec!["round".to_string()];
    header.extend((0..n).map(|i| format!("bid_{i}")));
    header.push("winner".into());
    header.push("payment".into());
    header.extend((0..n).map(|i| format!("gain_{i}")));
    wr.write_record(&header)?;
    for t in 0..h.bids.len() {
        let mut row = vec![t.to_string()];
        row.extend(h.bids[t].iter().map(|&k| h.game.bid(k).to_string()));
        row.push(h.winners[t].map_or(String::new(), |w| w.to_string()));
        row.push(h.payments[t].to_string());
        row.extend(h.gains[t].iter().map(|g| g.to_string()));
        wr.write_record(&row)?;
    }
    wr.flush()?;
    Ok(())
}
