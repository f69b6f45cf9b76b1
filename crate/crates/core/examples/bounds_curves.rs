//! Closed-form liquid-welfare bounds and the curves behind them.
//!
//! Run: `cargo run --example bounds_curves`

use autobid_poa::bounds::{bound_p, bound_pt_eta, bound_q_common, bound_q_eta, curve, zeta};
use autobid_poa::special::{beta_threshold, theta_threshold};

fn main() -> autobid_poa::error::Result<()> {
    println!("theta = {:.6}   beta = {:.6}", theta_threshold(), beta_threshold());
    println!("{:>5} {:>10} {:>10}", "t", "P(t)", "Q(t)");
    for k in 0..=10 {
        let t = k as f64 / 10.0;
        println!("{t:>5.1} {:>10.6} {:>10.6}", bound_p(t), bound_q_common(t));
    }
    println!();
    println!("{:>5} {:>10} {:>10} {:>10} {:>10}", "eta", "P_0(eta)", "P_1(eta)", "zeta", "Q(eta)");
    for k in 0..=9 {
        let eta = k as f64 / 10.0;
        println!(
            "{eta:>5.1} {:>10.6} {:>10.6} {:>10.6} {:>10.6}",
            bound_pt_eta(0.0, eta)?,
            bound_pt_eta(1.0, eta)?,
            zeta(eta)?,
            bound_q_eta(eta)?
        );
    }
    let pts = curve("fig1b", 5)?;
    println!("\nfirst points of fig1b:");
    for p in pts.iter().take(6) {
        println!("  {:<8} x {:.2}  {:.6}", p.curve, p.x, p.value);
    }
    Ok(())
}
