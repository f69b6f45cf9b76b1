//! Constraint checks and equilibrium verification over finite deviation grids.
//!
//! The verifier first asks whether some pure deviation on the grid beats the
//! equilibrium gain when constraints are ignored. If none does, the profile is
//! an equilibrium for every constrained deviation drawn from the grid,
//! including mixtures. Otherwise it solves the constrained problem over all
//! grid mixtures exactly (ROI and budget are linear in the mixture weights), so
//! a value maximizer who could only profit by overpaying is still certified.
//! A profitable feasible mixture is re-evaluated from scratch before the
//! profile is declared refuted.

use crate::auction::{item_winners, normalize_targets, optimal_allocation, outcome_distribution, Instance};
use crate::error::{Error, Result};
use crate::mixture::{best_constrained, Mixture, Point};
use crate::profile::{
    deviation_stats, scenarios_stats, Atom, Component, Deviation, Entry, FiniteProfile, OutcomeStats, Profile, RowAtom,
    Scenario,
};
use crate::valuation::Valuation;
use crate::welfare::{liquid_welfare_from, proxy_instance_from};
use serde::{Deserialize, Serialize};

/// Default verification tolerance.
pub const DEFAULT_TOL: f64 = 1e-7;
/// Default feasibility tolerance for [`check_feasible`].
pub const FEAS_TOL: f64 = 1e-9;
/// Offset used for "just above" a critical bid.
pub const PLUS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    /// `tau_i E[v_i] - E[p_i]`.
    pub roi_slack: Vec<f64>,
    /// `B_i - E[p_i]` (infinite without a budget).
    #[serde(with = "crate::ext::vec")]
    pub budget_slack: Vec<f64>,
    pub feasible: bool,
}

pub fn constraint_report(inst: &Instance, stats: &OutcomeStats, tol: f64) -> ConstraintReport {
    let roi_slack: Vec<f64> = (0..inst.n).map(|i| inst.taus[i] * stats.value[i] - stats.payment[i]).collect();
    let budget_slack: Vec<f64> = (0..inst.n).map(|i| inst.budgets[i] - stats.payment[i]).collect();
    let feasible = roi_slack.iter().chain(&budget_slack).all(|s| *s >= -tol);
    ConstraintReport { roi_slack, budget_slack, feasible }
}

/// ROI and budget slacks of every agent under `profile`.
pub fn check_feasible(inst: &Instance, profile: &Profile) -> Result<ConstraintReport> {
    let stats = crate::profile::expected_outcome_stats(inst, profile)?;
    Ok(constraint_report(inst, &stats, FEAS_TOL))
}

/// `E[g_i(B'_i, B_-i)]`.
pub fn expected_gain_deviation(inst: &Instance, profile: &Profile, i: usize, dev: &Deviation) -> Result<f64> {
    profile.validate(inst.n, inst.m)?;
    Ok(deviation_stats(inst, &profile.scenarios()?, i, dev)?.gain(inst, i))
}

/// Whether every item is sold almost surely, with the unsold probabilities.
pub fn well_supported(inst: &Instance, profile: &Profile) -> Result<(bool, Vec<f64>)> {
    let stats = crate::profile::expected_outcome_stats(inst, profile)?;
    Ok((stats.unsold.iter().all(|u| *u <= 1e-12), stats.unsold))
}

/// Candidate pure deviations: `grids[i][j]` lists the bids agent `i` may use in auction `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationSet {
    pub grids: Vec<Vec<Vec<f64>>>,
}

fn finish_grid(mut g: Vec<f64>) -> Vec<f64> {
    g.retain(|b| b.is_finite() && *b >= 0.0);
    g.push(0.0);
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

impl DeviationSet {
    /// Step grid `0, step, 2 step, ...` just past the largest critical point of
    /// each auction, plus every critical point `c` and `c + PLUS`. Critical
    /// points: opponents' fixed bids and draw endpoints, the reserve, tie-rule
    /// values, the agent's own item values and `extras`.
    pub fn for_profile(inst: &Instance, profile: &Profile, step: f64, extras: &[f64]) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::InvalidParameter(format!("grid step must be positive, got {step}")));
        }
        profile.validate(inst.n, inst.m)?;
        let scenarios = profile.scenarios()?;
        let mut grids = Vec::with_capacity(inst.n);
        for i in 0..inst.n {
            let mut per = Vec::with_capacity(inst.m);
            for j in 0..inst.m {
                let mut crit = vec![inst.reserves[j]];
                crit.extend(inst.tiebreak.critical_values(j));
                crit.extend_from_slice(extras);
                own_values(&inst.valuations[i], j, &mut crit);
                for sc in &scenarios {
                    for (k, row) in sc.rows.iter().enumerate() {
                        if k == i {
                            continue;
                        }
                        match row[j] {
                            Entry::Fixed(b) => crit.push(b),
                            Entry::Draw => {
                                if let Some(d) = &sc.draw {
                                    crit.push(d.lo());
                                    crit.push(d.hi());
                                }
                            }
                        }
                    }
                }
                let top = crit.iter().copied().filter(|c| c.is_finite()).fold(0.0, f64::max);
                let count = ((top + step) / step).ceil() as usize;
                let mut g: Vec<f64> = (0..=count).map(|k| k as f64 * step).collect();
                for &c in &crit {
                    g.push(c);
                    g.push(c + PLUS);
                }
                per.push(finish_grid(g));
            }
            grids.push(per);
        }
        Ok(DeviationSet { grids })
    }

    /// The same explicit bid list for every agent and auction.
    pub fn uniform(n: usize, m: usize, bids: &[f64]) -> Self {
        let g = finish_grid(bids.to_vec());
        DeviationSet { grids: vec![vec![g; m]; n] }
    }

    pub fn joint_size(&self, i: usize) -> f64 {
        self.grids[i].iter().map(|g| g.len() as f64).product()
    }
}

fn own_values(v: &Valuation, j: usize, out: &mut Vec<f64>) {
    match v {
        Valuation::Additive { values } => out.push(values[j]),
        Valuation::Xos { clauses } => out.extend(clauses.iter().map(|c| c[j])),
        Valuation::BudgetCapped { inner, cap } => {
            own_values(inner, j, out);
            if cap.is_finite() {
                out.push(*cap);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Verified,
    Refuted,
    Inconclusive,
}

impl Verdict {
    /// CLI exit code: 0 verified, 2 refuted, 3 inconclusive.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Verified => 0,
            Verdict::Refuted => 2,
            Verdict::Inconclusive => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    /// No grid deviation beats the profile even with constraints ignored.
    PureSupremum,
    /// The best constrained grid mixture does not beat the profile.
    ConstrainedMixture,
    /// The profile itself violates a constraint.
    ProfileInfeasible,
    /// A feasible deviation (pure, mixed or swap) strictly improves some agent.
    ImprovingDeviation,
    /// Neither certified nor refuted.
    Unresolved,
    /// Finite CE check: no improving single-recommendation swap (necessary condition only).
    SingleSwap,
}

/// A profitable deviation, recomputed directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub agent: usize,
    pub deviation: Deviation,
    /// For CE swaps: the recommendation that gets replaced.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recommendation: Option<Vec<f64>>,
    pub gain: f64,
    pub roi_slack: f64,
    #[serde(with = "crate::ext::one")]
    pub budget_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub constraints: ConstraintReport,
    pub eq_gain: Vec<f64>,
    /// Best pure grid deviation per agent, constraints ignored.
    pub max_dev_gain: Vec<f64>,
    pub best_deviation: Vec<Vec<f64>>,
    /// Best constrained grid mixture per agent, when it was needed.
    pub constrained_bound: Vec<Option<f64>>,
    /// `max_i (max_dev_gain_i - eq_gain_i)`.
    pub epsilon: f64,
    pub verdict: Verdict,
    pub basis: Basis,
    pub witness: Option<Witness>,
    /// True when the sufficient condition certified the profile.
    pub sufficient_cce: bool,
    pub well_supported: bool,
    pub unsold: Vec<f64>,
    pub lw: f64,
    pub opt: f64,
    #[serde(with = "crate::ext::one")]
    pub ratio: f64,
    pub product: bool,
    pub note: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub tol: f64,
    /// Solve the constrained mixture problem when the pure check fails.
    pub mixture_search: bool,
    /// Largest joint grid enumerated for non-additive agents via tables.
    pub max_joint: usize,
    /// Largest joint grid evaluated with the full engine (continuous opponents).
    pub max_engine_joint: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { tol: DEFAULT_TOL, mixture_search: true, max_joint: 4_000_000, max_engine_joint: 20_000 }
    }
}

/// Summaries of the pure deviations of one agent, either per auction
/// (additive agents) or over the joint grid.
pub(crate) struct AgentPoints {
    pub(crate) factors: Vec<Vec<Point>>,
    separable: bool,
}

impl AgentPoints {
    fn bids(&self, grids: &[Vec<f64>], choice: &[usize]) -> Vec<f64> {
        if self.separable {
            choice.iter().enumerate().map(|(j, &k)| grids[j][k]).collect()
        } else {
            decode(grids, choice[0])
        }
    }

    fn pure_best(&self) -> (f64, Vec<usize>) {
        if self.separable {
            let mut total = 0.0;
            let mut choice = Vec::with_capacity(self.factors.len());
            for f in &self.factors {
                let (k, best) = argmax(f.iter().map(|q| q.g));
                total += best;
                choice.push(k);
            }
            (total, choice)
        } else {
            let (k, best) = argmax(self.factors[0].iter().map(|q| q.g));
            (best, vec![k])
        }
    }
}

fn argmax(it: impl Iterator<Item = f64>) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (k, g) in it.enumerate() {
        if g > best.1 {
            best = (k, g);
        }
    }
    best
}

pub(crate) fn decode(grids: &[Vec<f64>], mut idx: usize) -> Vec<f64> {
    let mut out = vec![0.0; grids.len()];
    for j in (0..grids.len()).rev() {
        let k = grids[j].len();
        out[j] = grids[j][idx % k];
        idx /= k;
    }
    out
}

fn point(inst: &Instance, i: usize, value: f64, pay: f64) -> Point {
    Point { a: pay - inst.taus[i] * value, g: value - inst.sigmas[i] * pay, p: pay }
}

fn agent_points(
    inst: &Instance,
    scenarios: &[Scenario],
    i: usize,
    grids: &[Vec<f64>],
    cfg: &VerifyConfig,
) -> Result<Option<AgentPoints>> {
    if let Valuation::Additive { values } = &inst.valuations[i] {
        let mut factors = Vec::with_capacity(inst.m);
        for j in 0..inst.m {
            let mut pts = Vec::with_capacity(grids[j].len());
            for &b in &grids[j] {
                let mut row = vec![0.0; inst.m];
                row[j] = b;
                let s = deviation_stats(inst, scenarios, i, &Deviation::Pure { bids: row })?;
                pts.push(point(inst, i, values[j] * s.win[i][j], s.item_payment[i][j]));
            }
            factors.push(pts);
        }
        return Ok(Some(AgentPoints { factors, separable: true }));
    }
    let size: f64 = grids.iter().map(|g| g.len() as f64).product();
    let deterministic = scenarios.iter().all(|sc| {
        sc.draw.is_none() || (0..inst.n).all(|k| k == i || sc.rows[k].iter().all(|e| matches!(e, Entry::Fixed(_))))
    });
    if deterministic && size <= cfg.max_joint as f64 {
        return Ok(Some(joint_table(inst, scenarios, i, grids)));
    }
    if size <= cfg.max_engine_joint as f64 {
        let mut pts = Vec::with_capacity(size as usize);
        for idx in 0..size as usize {
            let s = deviation_stats(inst, scenarios, i, &Deviation::Pure { bids: decode(grids, idx) })?;
            pts.push(point(inst, i, s.value[i], s.payment[i]));
        }
        return Ok(Some(AgentPoints { factors: vec![pts], separable: false }));
    }
    Ok(None)
}

/// Joint deviation table against opponents whose bids are fixed per scenario.
pub(crate) fn joint_table(inst: &Instance, scenarios: &[Scenario], i: usize, grids: &[Vec<f64>]) -> AgentPoints {
    let m = inst.m;
    // win[s][j][k]: probability agent i wins j bidding grids[j][k] in scenario s
    let win: Vec<Vec<Vec<f64>>> = scenarios
        .iter()
        .map(|sc| {
            let opp: Vec<Vec<f64>> = sc.rows.iter().map(|r| r.iter().map(|e| e.at(0.0)).collect()).collect();
            (0..m)
                .map(|j| {
                    grids[j]
                        .iter()
                        .map(|&b| {
                            item_winners(inst, j, |k| if k == i { b } else { opp[k][j] })
                                .into_iter()
                                .find(|(w, _)| *w == i)
                                .map_or(0.0, |(_, p)| p)
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let v = &inst.valuations[i];
    let size: usize = grids.iter().map(Vec::len).product();
    let mut pts = Vec::with_capacity(size);
    let mut ks = vec![0usize; m];
    for _ in 0..size {
        let mut value = 0.0;
        let mut pay = 0.0;
        for (s, sc) in scenarios.iter().enumerate() {
            let mut certain = 0u64;
            let mut frac: Vec<(usize, f64)> = Vec::new();
            for j in 0..m {
                let w = win[s][j][ks[j]];
                pay += sc.weight * w * grids[j][ks[j]];
                if w >= 1.0 {
                    certain |= 1 << j;
                } else if w > 0.0 {
                    frac.push((j, w));
                }
            }
            if frac.is_empty() {
                value += sc.weight * v.value(certain);
            } else {
                for sub in 0u64..1 << frac.len() {
                    let mut mask = certain;
                    let mut p = 1.0;
                    for (b, &(j, w)) in frac.iter().enumerate() {
                        if sub >> b & 1 == 1 {
                            mask |= 1 << j;
                            p *= w;
                        } else {
                            p *= 1.0 - w;
                        }
                    }
                    value += sc.weight * p * v.value(mask);
                }
            }
        }
        pts.push(point(inst, i, value, pay));
        for j in (0..m).rev() {
            ks[j] += 1;
            if ks[j] < grids[j].len() {
                break;
            }
            ks[j] = 0;
        }
    }
    AgentPoints { factors: vec![pts], separable: false }
}

enum AgentStatus {
    Pure,
    Mixture(f64),
    Refuted(Witness, Option<f64>),
    Unresolved(Option<f64>, String),
}

fn confirm(
    inst: &Instance,
    scenarios: &[Scenario],
    i: usize,
    deviation: Deviation,
    eq: f64,
    tol: f64,
) -> Result<Option<Witness>> {
    let s = deviation_stats(inst, scenarios, i, &deviation)?;
    let gain = s.gain(inst, i);
    let roi_slack = inst.taus[i] * s.value[i] - s.payment[i];
    let budget_slack = inst.budgets[i] - s.payment[i];
    if gain > eq + tol && roi_slack >= -FEAS_TOL && budget_slack >= -FEAS_TOL {
        return Ok(Some(Witness { agent: i, deviation, recommendation: None, gain, roi_slack, budget_slack }));
    }
    Ok(None)
}

fn mixture_deviation(pts: &AgentPoints, grids: &[Vec<f64>], mix: &Mixture) -> Deviation {
    let atoms: Vec<RowAtom> =
        mix.iter().filter(|(_, w)| *w > 0.0).map(|(c, w)| RowAtom { bids: pts.bids(grids, c), prob: *w }).collect();
    if atoms.len() == 1 {
        return Deviation::Pure { bids: atoms[0].bids.clone() };
    }
    let total: f64 = atoms.iter().map(|a| a.prob).sum();
    Deviation::Mixed { atoms: atoms.into_iter().map(|a| RowAtom { prob: a.prob / total, ..a }).collect() }
}

#[allow(clippy::too_many_arguments)]
fn check_agent(
    inst: &Instance,
    scenarios: &[Scenario],
    i: usize,
    pts: &AgentPoints,
    grids: &[Vec<f64>],
    eq: f64,
    sup: f64,
    best_choice: &[usize],
    cfg: &VerifyConfig,
) -> Result<AgentStatus> {
    if sup <= eq + cfg.tol {
        return Ok(AgentStatus::Pure);
    }
    if !cfg.mixture_search {
        let dev = Deviation::Pure { bids: pts.bids(grids, best_choice) };
        if let Some(w) = confirm(inst, scenarios, i, dev, eq, cfg.tol)? {
            return Ok(AgentStatus::Refuted(w, None));
        }
        return Ok(AgentStatus::Unresolved(None, format!("agent {i}: best pure deviation improves but is infeasible")));
    }
    let c = best_constrained(&pts.factors, inst.budgets[i]);
    if c.upper <= eq + cfg.tol {
        return Ok(AgentStatus::Mixture(c.upper));
    }
    if let Some((mix, _)) = &c.witness {
        let dev = mixture_deviation(pts, grids, mix);
        if let Some(w) = confirm(inst, scenarios, i, dev, eq, cfg.tol)? {
            return Ok(AgentStatus::Refuted(w, Some(c.upper)));
        }
    }
    Ok(AgentStatus::Unresolved(
        Some(c.upper),
        format!("agent {i}: constrained bound {:.3e} above equilibrium gain but no feasible witness confirmed", c.upper - eq),
    ))
}

fn verify_inner(
    inst: &Instance,
    profile: &Profile,
    dev: &DeviationSet,
    cfg: &VerifyConfig,
    product: bool,
) -> Result<EquilibriumReport> {
    profile.validate(inst.n, inst.m)?;
    if dev.grids.len() != inst.n || dev.grids.iter().any(|g| g.len() != inst.m) {
        return Err(Error::InvalidParameter("deviation set does not match the instance shape".into()));
    }
    let scenarios = profile.scenarios()?;
    let stats = scenarios_stats(inst, &scenarios);
    let constraints = constraint_report(inst, &stats, cfg.tol);
    let eq_gain: Vec<f64> = (0..inst.n).map(|i| stats.gain(inst, i)).collect();
    let lw = liquid_welfare_from(inst, &stats);
    let opt = optimal_allocation(inst)?.value;
    let ratio = if lw > 0.0 { opt / lw } else { f64::INFINITY };
    let well = stats.unsold.iter().all(|u| *u <= 1e-12);

    let mut max_dev_gain = Vec::with_capacity(inst.n);
    let mut best_deviation = Vec::with_capacity(inst.n);
    let mut constrained_bound = vec![None; inst.n];
    let mut statuses = Vec::with_capacity(inst.n);
    let mut notes: Vec<String> = Vec::new();
    for i in 0..inst.n {
        let grids = &dev.grids[i];
        match agent_points(inst, &scenarios, i, grids, cfg)? {
            Some(pts) => {
                let (sup, choice) = pts.pure_best();
                max_dev_gain.push(sup);
                best_deviation.push(pts.bids(grids, &choice));
                let st = if constraints.feasible {
                    check_agent(inst, &scenarios, i, &pts, grids, eq_gain[i], sup, &choice, cfg)?
                } else {
                    AgentStatus::Pure
                };
                statuses.push(st);
            }
            None => {
                max_dev_gain.push(f64::NAN);
                best_deviation.push(Vec::new());
                statuses.push(AgentStatus::Unresolved(
                    None,
                    format!("agent {i}: joint deviation grid of {} points exceeds the enumeration limit", dev.joint_size(i)),
                ));
            }
        }
    }
    let epsilon = max_dev_gain.iter().zip(&eq_gain).map(|(d, e)| d - e).fold(f64::NEG_INFINITY, f64::max);

    let mut verdict = Verdict::Verified;
    let mut basis = Basis::PureSupremum;
    let mut witness = None;
    if !constraints.feasible {
        verdict = Verdict::Refuted;
        basis = Basis::ProfileInfeasible;
        notes.push("the profile violates an ROI or budget constraint".into());
    } else {
        for (i, st) in statuses.into_iter().enumerate() {
            match st {
                AgentStatus::Pure => {}
                AgentStatus::Mixture(b) => {
                    constrained_bound[i] = Some(b);
                    if verdict == Verdict::Verified {
                        basis = Basis::ConstrainedMixture;
                    }
                }
                AgentStatus::Refuted(w, b) => {
                    constrained_bound[i] = b;
                    if verdict != Verdict::Refuted {
                        verdict = Verdict::Refuted;
                        basis = Basis::ImprovingDeviation;
                        witness = Some(w);
                    }
                }
                AgentStatus::Unresolved(b, msg) => {
                    constrained_bound[i] = b;
                    notes.push(msg);
                    if verdict == Verdict::Verified {
                        verdict = Verdict::Inconclusive;
                        basis = Basis::Unresolved;
                    }
                }
            }
        }
    }
    if verdict == Verdict::Verified {
        notes.push(match basis {
            Basis::PureSupremum => "no grid deviation improves even with constraints ignored; mixtures and constrained deviations cannot do better".into(),
            _ => "some unconstrained deviations improve, but no constraint-feasible mixture over the grid does".into(),
        });
    }
    Ok(EquilibriumReport {
        constraints,
        eq_gain,
        max_dev_gain,
        best_deviation,
        constrained_bound,
        epsilon,
        verdict,
        basis,
        witness,
        sufficient_cce: verdict == Verdict::Verified,
        well_supported: well,
        unsold: stats.unsold.clone(),
        lw,
        opt,
        ratio,
        product,
        note: notes.join("; "),
    })
}

/// Coarse correlated equilibrium check over the deviation grid.
pub fn verify_cce(inst: &Instance, profile: &Profile, dev: &DeviationSet, cfg: &VerifyConfig) -> Result<EquilibriumReport> {
    verify_inner(inst, profile, dev, cfg, is_product(profile))
}

fn is_product(profile: &Profile) -> bool {
    match profile {
        Profile::Product(_) => true,
        Profile::Finite(f) => f.atoms.len() == 1,
        Profile::Coupled(c) => c.bids.iter().filter(|r| r.iter().any(|e| matches!(e, Entry::Draw))).count() <= 1,
    }
}

/// Mixed Nash check: the unilateral conditions are those of [`verify_cce`],
/// but the profile has to be a product of independent components.
pub fn verify_mne(inst: &Instance, profile: &Profile, dev: &DeviationSet, cfg: &VerifyConfig) -> Result<EquilibriumReport> {
    match profile {
        Profile::Product(_) => {}
        Profile::Finite(f) if f.atoms.len() == 1 => {}
        _ => return Err(Error::NotProduct),
    }
    verify_inner(inst, profile, dev, cfg, true)
}

/// Product profile with one pure component per agent.
pub fn pure_product(bids: Vec<Vec<f64>>) -> Profile {
    Profile::Product(crate::profile::ProductProfile { components: bids.into_iter().map(Component::pure).collect() })
}

/// Partial correlated-equilibrium check on a finite support.
///
/// For each agent and each distinct own recommendation, every swap target in
/// the deviation set (the full joint grid when small, otherwise one-coordinate
/// changes) is tried while all other recommendations stay put; ROI and budget
/// are evaluated on the whole support. The raise-to-reserve swap
/// `b_ij -> max(b_ij, r_j)` is always included. Finding no improving swap is a
/// necessary condition for a CE, not a proof.
pub fn verify_ce_finite(
    inst: &Instance,
    profile: &FiniteProfile,
    dev: &DeviationSet,
    cfg: &VerifyConfig,
) -> Result<EquilibriumReport> {
    let wrapped = Profile::Finite(profile.clone());
    wrapped.validate(inst.n, inst.m)?;
    let scenarios = wrapped.scenarios()?;
    let stats = scenarios_stats(inst, &scenarios);
    let constraints = constraint_report(inst, &stats, cfg.tol);
    let eq_gain: Vec<f64> = (0..inst.n).map(|i| stats.gain(inst, i)).collect();
    let lw = liquid_welfare_from(inst, &stats);
    let opt = optimal_allocation(inst)?.value;
    let mut report = EquilibriumReport {
        constraints: constraints.clone(),
        eq_gain: eq_gain.clone(),
        max_dev_gain: eq_gain.clone(),
        best_deviation: vec![Vec::new(); inst.n],
        constrained_bound: vec![None; inst.n],
        epsilon: 0.0,
        verdict: Verdict::Verified,
        basis: Basis::SingleSwap,
        witness: None,
        sufficient_cce: false,
        well_supported: stats.unsold.iter().all(|u| *u <= 1e-12),
        unsold: stats.unsold.clone(),
        lw,
        opt,
        ratio: if lw > 0.0 { opt / lw } else { f64::INFINITY },
        product: profile.atoms.len() == 1,
        note: "single-recommendation swap check: a necessary condition for a correlated equilibrium only".into(),
    };
    if !constraints.feasible {
        report.verdict = Verdict::Refuted;
        report.basis = Basis::ProfileInfeasible;
        report.note = "the profile violates an ROI or budget constraint".into();
        return Ok(report);
    }
    let atom_vp = |i: usize, atom: &Atom, row: &[f64]| -> (f64, f64) {
        let mut bids = atom.bids.clone();
        bids[i] = row.to_vec();
        let mut v = 0.0;
        let mut p = 0.0;
        for (o, q) in outcome_distribution(inst, &bids) {
            v += q * inst.valuations[i].value(o.bundle(i));
            p += q * o.payment(i);
        }
        (v, p)
    };
    for i in 0..inst.n {
        let (tau, sigma, budget) = (inst.taus[i], inst.sigmas[i], inst.budgets[i]);
        let mut recs: Vec<Vec<f64>> = Vec::new();
        for a in &profile.atoms {
            if !recs.contains(&a.bids[i]) {
                recs.push(a.bids[i].clone());
            }
        }
        let grids = &dev.grids[i];
        let joint = dev.joint_size(i) <= cfg.max_engine_joint as f64;
        for rec in &recs {
            let group: Vec<&Atom> = profile.atoms.iter().filter(|a| &a.bids[i] == rec).collect();
            let (mut v0, mut p0) = (0.0, 0.0);
            for a in &group {
                let (v, p) = atom_vp(i, a, rec);
                v0 += a.prob * v;
                p0 += a.prob * p;
            }
            let mut targets: Vec<Vec<f64>> = Vec::new();
            targets.push((0..inst.m).map(|j| rec[j].max(inst.reserves[j])).collect());
            if joint {
                let size = dev.joint_size(i) as usize;
                targets.extend((0..size).map(|k| decode(grids, k)));
            } else {
                for j in 0..inst.m {
                    for &b in &grids[j] {
                        let mut t = rec.clone();
                        t[j] = b;
                        targets.push(t);
                    }
                }
            }
            for t in targets {
                let (mut v1, mut p1) = (0.0, 0.0);
                for a in &group {
                    let (v, p) = atom_vp(i, a, &t);
                    v1 += a.prob * v;
                    p1 += a.prob * p;
                }
                let value = stats.value[i] - v0 + v1;
                let pay = stats.payment[i] - p0 + p1;
                let gain = value - sigma * pay;
                let roi_slack = tau * value - pay;
                let budget_slack = budget - pay;
                if gain > report.max_dev_gain[i] {
                    report.max_dev_gain[i] = gain;
                    report.best_deviation[i] = t.clone();
                }
                if gain > eq_gain[i] + cfg.tol && roi_slack >= -FEAS_TOL && budget_slack >= -FEAS_TOL && report.witness.is_none() {
                    report.verdict = Verdict::Refuted;
                    report.basis = Basis::ImprovingDeviation;
                    report.witness = Some(Witness {
                        agent: i,
                        deviation: Deviation::Pure { bids: t.clone() },
                        recommendation: Some(rec.clone()),
                        gain,
                        roi_slack,
                        budget_slack,
                    });
                }
            }
        }
    }
    report.epsilon = report.max_dev_gain.iter().zip(&eq_gain).map(|(d, e)| d - e).fold(f64::NEG_INFINITY, f64::max);
    Ok(report)
}

/// Individual liquid-welfare inequality for agent `i`:
/// `min(E[v_i], B_i) - [delta E[g^_i(B'_i, B_-i)] + (1 - delta + delta s^_i) E[p_i]]`
/// with `g^` the gain in the budget-free proxy. Targets are normalized first.
pub fn lw_lower_bound_check(inst: &Instance, profile: &Profile, i: usize, dev: &Deviation, delta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::InvalidParameter(format!("delta must lie in [0, 1], got {delta}")));
    }
    let norm = normalize_targets(inst)?;
    profile.validate(norm.n, norm.m)?;
    let scenarios = profile.scenarios()?;
    let stats = scenarios_stats(&norm, &scenarios);
    let proxy = proxy_instance_from(&norm, &stats)?;
    let dev_stats = deviation_stats(&proxy, &scenarios, i, dev)?;
    let g_hat = dev_stats.gain(&proxy, i);
    let lhs = stats.value[i].min(norm.budgets[i]);
    Ok(lhs - (delta * g_hat + (1.0 - delta + delta * proxy.sigmas[i]) * stats.payment[i]))
}
