//! Best-response dynamics on a small budgeted instance, then a check of the fixed point.
//!
//! Run: `cargo run --example dynamics`

use autobid_poa::auction::Instance;
use autobid_poa::dynamics::best_response_dynamics;
use autobid_poa::equilibrium::{pure_product, verify_mne, DeviationSet, VerifyConfig};
use autobid_poa::valuation::Valuation;

fn run(label: &str, inst: &Instance) -> autobid_poa::error::Result<()> {
    println!("{label}");
    for seed in 0..4 {
        let d = best_response_dynamics(&inst, 0.1, 50, seed)?;
        print!("  seed {seed}: {} rounds, ", d.rounds);
        if !d.converged {
            println!("no fixed point (cycle {:?})", d.cycle);
            continue;
        }
        let r = verify_mne(&inst, &pure_product(d.profile.clone()), &DeviationSet::uniform(inst.n, inst.m, &d.grid), &VerifyConfig::default())?;
        println!("fixed point {:.2?}: {:?}, OPT/LW = {:.4}", d.profile, r.verdict, r.ratio);
    }
    Ok(())
}

fn main() -> autobid_poa::error::Result<()> {
    let single = Instance::simple(vec![Valuation::additive(vec![1.0]), Valuation::additive(vec![0.5])], vec![1.0, 1.0])?;
    run("one item, two utility maximizers", &single)?;
    let mixed = Instance::simple(
        vec![Valuation::additive(vec![0.2, 0.3]), Valuation::xos(vec![vec![0.5, 0.0], vec![0.0, 0.4]])],
        vec![0.0, 1.0],
    )?;
    run("value maximizer against a utility maximizer", &mixed)?;
    let cycling = Instance::simple(vec![Valuation::additive(vec![0.6, 0.3]), Valuation::additive(vec![0.4, 0.5])], vec![1.0, 1.0])?;
    run("two items, two utility maximizers", &cycling)
}
