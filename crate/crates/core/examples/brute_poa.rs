//! Worst liquid-welfare ratio among verified grid equilibria of random small instances.
//!
//! Run: `cargo run --release --example brute_poa -- [samples] [seed]`

use autobid_poa::probe::{brute_poa, ProbeSpec};

fn main() -> autobid_poa::error::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let samples = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(200);
    let seed = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1);
    println!("types      budgets  bound(rule)            converged  verified  refuted  inconcl.  worst ratio  ok");
    for types in [vec![0.0], vec![1.0], vec![0.0, 1.0]] {
        for budgeted in [true, false] {
            let r = brute_poa(&ProbeSpec::new(types.clone(), budgeted, samples, seed))?;
            println!(
                "{:<10} {:<8} {:<22} {:>9} {:>9} {:>8} {:>9} {:>12.5}  {}",
                format!("{types:?}"),
                if budgeted { "random" } else { "none" },
                format!("{:.5} ({})", r.bound, r.bound_rule),
                r.converged,
                r.verified,
                r.refuted,
                r.inconclusive,
                r.worst_ratio,
                r.within_bound
            );
            if let Some(w) = &r.worst {
                println!("           worst: sample {} bids {:?} opt {:.3} lw {:.3}", w.sample, w.bids, w.opt, w.lw);
            }
        }
    }
    Ok(())
}
