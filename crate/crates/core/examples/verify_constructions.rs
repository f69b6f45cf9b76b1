//! Builds every lower-bound construction and verifies its equilibrium and ratio.
//!
//! Run: `cargo run --release --example verify_constructions`

use autobid_poa::constructions::{verify, Params, NAMES};
use autobid_poa::equilibrium::VerifyConfig;

fn main() -> autobid_poa::error::Result<()> {
    let cfg = VerifyConfig::default();
    println!("{:<24} {:<9} {:>11} {:>11} {:>9}  well-supported", "construction", "class", "ratio", "claimed", "upper");
    for name in NAMES {
        let r = verify(name, &Params::new(), 1e-3, &cfg)?;
        println!(
            "{:<24} {:<9} {:>11.6} {:>11.6} {:>9}  {}  ({:?}, {:?})",
            r.name,
            format!("{:?}", r.class),
            r.ratio,
            r.claimed_ratio,
            r.upper_bound.map_or("-".into(), |u| format!("{u:.5}")),
            r.equilibrium.well_supported,
            r.equilibrium.verdict,
            r.equilibrium.basis
        );
    }
    // a family sweep: the common-type construction approaches P(t)
    for t in [0.8, 0.9, 1.0] {
        let p: Params = [("t".to_string(), t)].into_iter().collect();
        let r = verify("budget_commontype", &p, 1e-3, &cfg)?;
        println!("budget_commontype t = {t}: ratio {:.6}, gap to the upper bound {:?}", r.ratio, r.tightness_gap);
    }
    Ok(())
}
