//! Success rate and completion time as the team grows from one to four.
//!
//! cargo run --release --example team_scaling -- [episodes]

use semnav::harness::scenegen::{EpisodeGenConfig, SceneGenConfig};
use semnav::harness::{generate_suite, run_batch, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let count: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(20);
    let suite = generate_suite(count, 7, &SceneGenConfig::default(), &EpisodeGenConfig::default());
    let mut cfg = RunConfig::new(0).with_comm(5.0, 10);
    cfg.record_maps = false;
    let report = run_batch(&suite, &[1, 2, 3, 4], &cfg, None)?;
    println!("n  SR     MSPL   makespan  steps");
    for n in 1..=4 {
        if let Some(s) = report.team(n) {
            println!("{n}  {:.3}  {:.3}  {:>7.2}  {:>6.1}", s.sr, s.mspl, s.mean_makespan, s.mean_timesteps);
        }
    }
    println!("audits clean: {}", report.audits_clean());
    Ok(())
}
