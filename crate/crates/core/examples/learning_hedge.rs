//! Two Hedge bidders in a repeated first-price auction with a reserve.
//!
//! Run: `cargo run --release --example learning_hedge -- [rounds] [seeds]`

use autobid_poa::learning::{run_repeated, summarize, LearnerConfig, RepeatedGame, SUPPORT_FREQ, WINDOW};

fn main() -> autobid_poa::error::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let rounds = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(50_000);
    let seeds: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(10);
    let game = RepeatedGame { values: vec![1.0, 0.5], sigmas: vec![1.0, 1.0], reserve: 0.3, step: 0.05, rounds };
    println!("seed  regret/T(0)  regret/T(1)  sold(final quarter)  cce eps  co-undominated");
    for seed in 0..seeds {
        let h = run_repeated(&game, &[LearnerConfig::hedge(2 * seed), LearnerConfig::hedge(2 * seed + 1)])?;
        let s = summarize(&h, WINDOW, SUPPORT_FREQ)?;
        let clean = s.co_undominated.as_ref().is_some_and(|c| c.clean);
        println!(
            "{seed:>4}  {:>11.5}  {:>11.5}  {:>19.4}  {:>7.5}  {clean} {:?}",
            s.regret_per_round[0], s.regret_per_round[1], s.window_sold_fraction, s.cce_epsilon, s.supports
        );
        if !clean {
            println!("      dominated: {:?}", s.co_undominated.unwrap().dominated);
        }
        println!("      window regret/T: {:?}", s.window_regret_per_round);
    }
    Ok(())
}
