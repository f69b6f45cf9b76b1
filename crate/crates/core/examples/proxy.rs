//! The budget-free proxy of a budgeted instance keeps OPT.
//!
//! Run: `cargo run --example proxy`

use autobid_poa::auction::{optimal_allocation, Instance};
use autobid_poa::profile::{expected_outcome_stats, Profile};
use autobid_poa::welfare::{liquid_welfare, proxy_instance};

fn main() -> autobid_poa::error::Result<()> {
    let inst = Instance::from_json(include_str!("data/budget_commontype_instance.json"))?;
    let prof = Profile::from_json(include_str!("data/budget_commontype_profile.json"))?;
    let stats = expected_outcome_stats(&inst, &prof)?;
    let px = proxy_instance(&inst, &prof)?;
    for i in 0..inst.n {
        println!(
            "agent {i}: budget {:.4}  E[value] {:.4}  type {} -> {}",
            inst.budgets[i], stats.value[i], inst.sigmas[i], px.sigmas[i]
        );
    }
    println!("OPT {:.12}", optimal_allocation(&inst)?.value);
    println!("OPT(proxy) {:.12}", optimal_allocation(&px)?.value);
    println!("LW {:.6}  LW(proxy) {:.6}", liquid_welfare(&inst, &prof)?, liquid_welfare(&px, &prof)?);
    Ok(())
}
