//! Principal-branch Lambert W and the thresholds defined through it.
//!
//! Run: `cargo run --example lambert_w`

use autobid_poa::special::{beta_threshold, lambert_w0, lambert_w0_derivative, theta_threshold, BRANCH_POINT};

fn main() -> autobid_poa::error::Result<()> {
    for z in [BRANCH_POINT, -0.2, 0.0, 1.0, std::f64::consts::E, 100.0] {
        let w = lambert_w0(z)?;
        let d = if z > BRANCH_POINT { format!("{:.6}", lambert_w0_derivative(z)?) } else { "inf".into() };
        println!("W0({z:>9.5}) = {w:>9.6}   W0' = {d}   residual {:.1e}", w * w.exp() - z);
    }
    println!("theta = {:.9}", theta_threshold());
    println!("beta  = {:.9}", beta_threshold());
    Ok(())
}
