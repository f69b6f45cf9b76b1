//! Brute-force probe of equilibrium welfare on random small additive instances.
//!
//! Each sample draws an instance, runs pure best-response dynamics on a bid
//! grid and, when they settle, verifies the fixed point as an equilibrium of
//! the grid game. The worst `OPT / LW` over verified equilibria is compared
//! with the closed-form bound for the type set.

use crate::auction::{Instance, TypeSet};
use crate::bounds::{bound_p, bound_q_common};
use crate::dynamics::best_response_dynamics_from;
use crate::equilibrium::{pure_product, verify_mne, DeviationSet, Verdict, VerifyConfig};
use crate::error::{Error, Result};
use crate::smoothness::poa_upper_bound;
use crate::valuation::Valuation;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSpec {
    pub types: Vec<f64>,
    /// Draw finite budgets (each agent independently, half the time).
    pub budgeted: bool,
    pub max_agents: usize,
    pub max_items: usize,
    /// Values and budgets are multiples of this.
    pub value_step: f64,
    /// Bid grid increment.
    pub grid: f64,
    pub samples: usize,
    pub seed: u64,
    pub max_rounds: usize,
    /// Allowed excess over the bound.
    pub slack: f64,
}

impl ProbeSpec {
    pub fn new(types: Vec<f64>, budgeted: bool, samples: usize, seed: u64) -> Self {
        ProbeSpec {
            types,
            budgeted,
            max_agents: 3,
            max_items: 3,
            value_step: 0.05,
            grid: 0.05,
            samples,
            seed,
            max_rounds: 60,
            slack: 0.02,
        }
    }

    fn validate(&self) -> Result<()> {
        TypeSet::new(self.types.clone())?;
        if !(1..=3).contains(&self.max_agents) || !(1..=3).contains(&self.max_items) {
            return Err(Error::InvalidParameter("the probe handles 1 to 3 agents and items".into()));
        }
        if !(self.value_step > 0.0 && self.grid > 0.0) {
            return Err(Error::InvalidParameter("steps must be positive".into()));
        }
        Ok(())
    }
}

/// The bound the probe holds equilibria to, with the rule that picked it.
pub fn probe_bound(types: &TypeSet, budgeted: bool) -> Result<(f64, &'static str)> {
    if budgeted {
        Ok((bound_p(types.max()), "P(max T)"))
    } else if types.values().len() == 1 {
        Ok((bound_q_common(types.max()), "Q(t)"))
    } else {
        Ok((poa_upper_bound(types, 0.0, false)?.implied_poa_upper, "POA-RMP"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub sample: usize,
    pub instance: Instance,
    pub bids: Vec<Vec<f64>>,
    pub opt: f64,
    pub lw: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleOutcome {
    pub sample: usize,
    pub converged: bool,
    pub verdict: Option<Verdict>,
    pub certificate: Option<Certificate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub spec: ProbeSpec,
    pub bound: f64,
    pub bound_rule: String,
    pub samples: usize,
    pub converged: usize,
    pub verified: usize,
    pub refuted: usize,
    pub inconclusive: usize,
    pub worst_ratio: f64,
    pub worst: Option<Certificate>,
    /// Verified equilibria with ratio above `bound + slack`.
    pub violations: Vec<Certificate>,
    pub within_bound: bool,
}

fn on_grid(rng: &mut ChaCha8Rng, step: f64, hi: f64) -> f64 {
    let k = (hi / step + 1e-9).floor() as usize;
    rng.gen_range(0..=k) as f64 * step
}

/// Draws sample `index`; the stream depends only on `(seed, index)`.
pub fn sample_instance(spec: &ProbeSpec, index: usize) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index as u64);
    let n = if spec.max_agents == 1 { 1 } else { rng.gen_range(2..=spec.max_agents) };
    let m = rng.gen_range(1..=spec.max_items);
    let vals: Vec<Vec<f64>> = (0..n).map(|_| (0..m).map(|_| on_grid(&mut rng, spec.value_step, 1.0)).collect()).collect();
    let sigmas = (0..n).map(|_| spec.types[rng.gen_range(0..spec.types.len())]).collect();
    let budgets: Vec<f64> = vals
        .iter()
        .map(|v| {
            let total: f64 = v.iter().sum();
            if spec.budgeted && rng.gen_bool(0.5) && total > 0.0 {
                on_grid(&mut rng, spec.value_step, total).max(spec.value_step)
            } else {
                f64::INFINITY
            }
        })
        .collect();
    Instance::simple(vals.into_iter().map(Valuation::additive).collect(), sigmas)?.with_budgets(budgets)
}

fn run_sample(spec: &ProbeSpec, index: usize, cfg: &VerifyConfig) -> Result<SampleOutcome> {
    let inst = sample_instance(spec, index)?;
    let grid = crate::dynamics::dynamics_grid(&inst, spec.grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5eed);
    rng.set_stream(index as u64);
    let start = (0..inst.n).map(|_| (0..inst.m).map(|_| grid[rng.gen_range(0..grid.len())]).collect()).collect();
    let dynamics = best_response_dynamics_from(&inst, &grid, start, spec.max_rounds)?;
    if !dynamics.converged {
        return Ok(SampleOutcome { sample: index, converged: false, verdict: None, certificate: None });
    }
    let bids = dynamics.profile;
    let report = verify_mne(&inst, &pure_product(bids.clone()), &DeviationSet::uniform(inst.n, inst.m, &grid), cfg)?;
    let ratio = if report.opt <= 0.0 { 1.0 } else { report.opt / report.lw };
    Ok(SampleOutcome {
        sample: index,
        converged: true,
        verdict: Some(report.verdict),
        certificate: Some(Certificate { sample: index, instance: inst, bids, opt: report.opt, lw: report.lw, ratio }),
    })
}

/// Runs every sample (in parallel) and merges in sample order.
pub fn brute_poa(spec: &ProbeSpec) -> Result<ProbeReport> {
    spec.validate()?;
    let types = TypeSet::new(spec.types.clone())?;
    let (bound, rule) = probe_bound(&types, spec.budgeted)?;
    let cfg = VerifyConfig::default();
    let outcomes: Vec<SampleOutcome> =
        (0..spec.samples).into_par_iter().map(|k| run_sample(spec, k, &cfg)).collect::<Result<_>>()?;
    let verified: Vec<&Certificate> = outcomes
        .iter()
        .filter(|o| o.verdict == Some(Verdict::Verified))
        .filter_map(|o| o.certificate.as_ref())
        .collect();
    let worst = verified.iter().copied().fold(None::<&Certificate>, |acc, c| match acc {
        Some(w) if w.ratio >= c.ratio => Some(w),
        _ => Some(c),
    });
    let violations: Vec<Certificate> = verified.iter().filter(|c| !(c.ratio <= bound + spec.slack)).map(|c| (*c).clone()).collect();
    Ok(ProbeReport {
        spec: spec.clone(),
        bound,
        bound_rule: rule.into(),
        samples: spec.samples,
        converged: outcomes.iter().filter(|o| o.converged).count(),
        verified: verified.len(),
        refuted: outcomes.iter().filter(|o| o.verdict == Some(Verdict::Refuted)).count(),
        inconclusive: outcomes.iter().filter(|o| o.verdict == Some(Verdict::Inconclusive)).count(),
        worst_ratio: worst.map_or(1.0, |c| c.ratio),
        worst: worst.cloned(),
        within_bound: violations.is_empty(),
        violations,
    })
}
