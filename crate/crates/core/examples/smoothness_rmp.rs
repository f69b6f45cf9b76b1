//! Smoothness certificates: one inequality check and the upper-bound program.
//!
//! Run: `cargo run --release --example smoothness_rmp`

use autobid_poa::auction::TypeSet;
use autobid_poa::bounds::bound_p;
use autobid_poa::smoothness::{optimal_calibration, poa_upper_bound, smoothness_check, SmoothnessParams};

fn main() -> autobid_poa::error::Result<()> {
    let p = SmoothnessParams::new(1.0, 0.0, 1.0)?;
    println!("t = 1, mu = 1: lambda = {:.6}", p.lambda);
    for opp in [0.0, 0.3, 0.8] {
        let r = smoothness_check(&p, 1.0, 0.0, &[opp], opp)?;
        println!("  opponent bid {opp}: residual {r:.3e}");
    }
    for (types, budgeted) in [(vec![0.0], true), (vec![0.0, 0.9], true), (vec![0.0, 1.0], true), (vec![0.0, 1.0], false)] {
        let sol = poa_upper_bound(&TypeSet::new(types.clone())?, 0.0, budgeted)?;
        let delta = optimal_calibration(&sol.lambda, &sol.mu, &sol.types);
        println!(
            "{types:?} {}: bound {:.6}  mu {:.4?}  lambda {:.4?}  delta {:.4?}",
            if budgeted { "budgeted" } else { "budget-free" },
            sol.implied_poa_upper,
            sol.mu,
            sol.lambda,
            delta
        );
        if budgeted {
            println!("  P(max T) = {:.6}", bound_p(*types.last().unwrap()));
        }
    }
    Ok(())
}
