//! Verifies bid profiles read from JSON, showing the three verdicts.
//!
//! Run: `cargo run --example verify_profile`

use autobid_poa::auction::Instance;
use autobid_poa::equilibrium::{verify_cce, DeviationSet, VerifyConfig};
use autobid_poa::profile::Profile;

fn main() -> autobid_poa::error::Result<()> {
    let inst = Instance::from_json(include_str!("data/universal_budget_instance.json"))?;
    let cases = [
        ("equilibrium", include_str!("data/universal_budget_profile.json"), true),
        ("equilibrium, pure stage only", include_str!("data/universal_budget_profile.json"), false),
        ("budget overspent", include_str!("data/universal_budget_overpay_profile.json"), true),
    ];
    for (label, json, mixtures) in cases {
        let prof = Profile::from_json(json)?;
        let dev = DeviationSet::for_profile(&inst, &prof, 0.01, &[])?;
        let cfg = VerifyConfig { mixture_search: mixtures, ..VerifyConfig::default() };
        let r = verify_cce(&inst, &prof, &dev, &cfg)?;
        println!("{label:<30} {:?} ({:?}), exit code {}", r.verdict, r.basis, r.verdict.exit_code());
        println!("{:<30} LW {:.4}  OPT {:.4}  ratio {:.4}", "", r.lw, r.opt, r.ratio);
        if !r.note.is_empty() {
            println!("{:<30} {}", "", r.note);
        }
    }
    Ok(())
}
