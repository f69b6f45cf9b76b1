//! Pure best-response dynamics on a bid grid.
//!
//! Agents move one at a time in index order. A move is the feasible pure bid
//! vector on the grid with the highest gain; the current bids are kept unless
//! the gain strictly improves. Only the cheapest bid reaching each distinct
//! winning probability matters in an auction, which keeps the joint search
//! small.

use crate::auction::{item_winners, Instance};
use crate::equilibrium::{decode, joint_table};
use crate::error::{Error, Result};
use crate::profile::{deviation_stats, Deviation, Profile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

const IMPROVE_TOL: f64 = 1e-12;
const FEAS_TOL: f64 = 1e-9;
/// Largest reduced joint grid searched per best response.
pub const MAX_RESPONSES: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsReport {
    pub grid: Vec<f64>,
    /// Profiles at the start and after every round.
    pub trajectory: Vec<Vec<Vec<f64>>>,
    pub converged: bool,
    /// Period of the cycle when a profile repeats without converging.
    pub cycle: Option<usize>,
    pub rounds: usize,
    pub profile: Vec<Vec<f64>>,
}

/// Multiples of `step` up to one step past every value, reserve and
/// single-item value in the instance, plus the reserves themselves.
pub fn dynamics_grid(inst: &Instance, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) {
        return Err(Error::InvalidParameter(format!("grid step must be positive, got {step}")));
    }
    let mut top: f64 = inst.reserves.iter().copied().fold(0.0, f64::max);
    for (i, v) in inst.valuations.iter().enumerate() {
        for j in 0..inst.m {
            top = top.max(inst.taus[i].max(1.0) * v.value(1 << j));
        }
    }
    let count = (top / step - 1e-9).ceil() as usize + 1;
    let mut g: Vec<f64> = (0..=count).map(|k| k as f64 * step).collect();
    g.extend(inst.reserves.iter().copied());
    g.sort_by(f64::total_cmp);
    g.dedup();
    Ok(g)
}

/// Best feasible pure response of agent `i` to `bids` over `grid`, with its gain.
pub fn best_response(inst: &Instance, bids: &[Vec<f64>], i: usize, grid: &[f64]) -> Result<(Vec<f64>, f64)> {
    let profile = Profile::pure(bids.to_vec());
    let scenarios = profile.scenarios()?;
    let mut reduced = Vec::with_capacity(inst.m);
    for j in 0..inst.m {
        let mut seen: Vec<f64> = Vec::new();
        let mut keep = Vec::new();
        for &b in grid {
            let w = item_winners(inst, j, |k| if k == i { b } else { bids[k][j] })
                .into_iter()
                .find(|(a, _)| *a == i)
                .map_or(0.0, |(_, p)| p);
            if !seen.iter().any(|s| (s - w).abs() <= 1e-15) {
                seen.push(w);
                keep.push(b);
            }
        }
        reduced.push(keep);
    }
    let size: f64 = reduced.iter().map(|g| g.len() as f64).product();
    if size > MAX_RESPONSES as f64 {
        return Err(Error::EnumerationLimit { needed: size, limit: MAX_RESPONSES });
    }
    let pts = joint_table(inst, &scenarios, i, &reduced);
    let mut best: Option<(usize, f64)> = None;
    for (k, q) in pts.factors[0].iter().enumerate() {
        if q.a <= FEAS_TOL && q.p <= inst.budgets[i] + FEAS_TOL && best.is_none_or(|(_, g)| q.g > g + IMPROVE_TOL) {
            best = Some((k, q.g));
        }
    }
    // bidding zero everywhere never pays more than zero, so something is feasible
    let (k, g) = best.ok_or_else(|| Error::InvalidInstance("no feasible response on the grid".into()))?;
    Ok((decode(&reduced, k), g))
}

fn key(bids: &[Vec<f64>]) -> Vec<u64> {
    bids.iter().flatten().map(|b| b.to_bits()).collect()
}

/// Dynamics from an explicit start profile.
pub fn best_response_dynamics_from(
    inst: &Instance,
    grid: &[f64],
    start: Vec<Vec<f64>>,
    max_rounds: usize,
) -> Result<DynamicsReport> {
    Profile::pure(start.clone()).validate(inst.n, inst.m)?;
    let mut bids = start;
    let mut trajectory = vec![bids.clone()];
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
    seen.insert(key(&bids), 0);
    for round in 1..=max_rounds {
        let mut changed = false;
        for i in 0..inst.n {
            let scenarios = Profile::pure(bids.clone()).scenarios()?;
            let cur = deviation_stats(inst, &scenarios, i, &Deviation::Pure { bids: bids[i].clone() })?;
            let feasible = inst.taus[i] * cur.value[i] - cur.payment[i] >= -FEAS_TOL
                && cur.payment[i] <= inst.budgets[i] + FEAS_TOL;
            let (resp, g) = best_response(inst, &bids, i, grid)?;
            if !feasible || g > cur.gain(inst, i) + IMPROVE_TOL {
                if resp != bids[i] {
                    bids[i] = resp;
                    changed = true;
                }
            }
        }
        trajectory.push(bids.clone());
        if !changed {
            return Ok(DynamicsReport { grid: grid.to_vec(), trajectory, converged: true, cycle: None, rounds: round, profile: bids });
        }
        if let Some(&prev) = seen.get(&key(&bids)) {
            return Ok(DynamicsReport {
                grid: grid.to_vec(),
                trajectory,
                converged: false,
                cycle: Some(round - prev),
                rounds: round,
                profile: bids,
            });
        }
        seen.insert(key(&bids), round);
    }
    Ok(DynamicsReport { grid: grid.to_vec(), trajectory, converged: false, cycle: None, rounds: max_rounds, profile: bids })
}

/// Dynamics from a seeded random start on the grid of [`dynamics_grid`].
pub fn best_response_dynamics(inst: &Instance, step: f64, max_rounds: usize, seed: u64) -> Result<DynamicsReport> {
    let grid = dynamics_grid(inst, step)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = (0..inst.n).map(|_| (0..inst.m).map(|_| grid[rng.gen_range(0..grid.len())]).collect()).collect();
    best_response_dynamics_from(inst, &grid, start, max_rounds)
}
