//! Liquid welfare of a profile and the budget-free proxy instance.

use crate::auction::Instance;
use crate::error::Result;
use crate::profile::{expected_outcome_stats, OutcomeStats, Profile};

/// `sum_i min(tau_i E[v_i(x_i)], B_i)`.
pub fn liquid_welfare(inst: &Instance, profile: &Profile) -> Result<f64> {
    Ok(liquid_welfare_from(inst, &expected_outcome_stats(inst, profile)?))
}

pub fn liquid_welfare_from(inst: &Instance, stats: &OutcomeStats) -> f64 {
    (0..inst.n).map(|i| (inst.taus[i] * stats.value[i]).min(inst.budgets[i])).sum()
}

/// Budget-free proxy: every valuation is capped at `B_i / tau_i`, budgets
/// become infinite, and agents whose budget binds below `tau_i E[v_i]` under
/// `profile` are turned into value maximizers.
pub fn proxy_instance(inst: &Instance, profile: &Profile) -> Result<Instance> {
    proxy_instance_from(inst, &expected_outcome_stats(inst, profile)?)
}

pub fn proxy_instance_from(inst: &Instance, stats: &OutcomeStats) -> Result<Instance> {
    let mut out = inst.clone();
    for i in 0..inst.n {
        let b = inst.budgets[i];
        if b.is_infinite() {
            continue;
        }
        out.valuations[i] = inst.valuations[i].budget_cap(b / inst.taus[i])?;
        if b < inst.taus[i] * stats.value[i] {
            out.sigmas[i] = 0.0;
        }
        out.budgets[i] = f64::INFINITY;
    }
    Ok(out)
}
