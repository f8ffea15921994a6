//! Two-robot teams with and without communication on the same suite.
//!
//! cargo run --release --example comms_ablation -- [episodes]

use semnav::harness::scenegen::{EpisodeGenConfig, SceneGenConfig};
use semnav::harness::{generate_suite, run_batch, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let count: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(20);
    let suite = generate_suite(count, 7, &SceneGenConfig::default(), &EpisodeGenConfig::default());
    println!("r_comm  SR     MSPL   makespan  steps");
    for r_comm in [5.0, 0.1] {
        let mut cfg = RunConfig::new(0).with_comm(r_comm, 10);
        cfg.record_maps = false;
        let report = run_batch(&suite, &[2], &cfg, None)?;
        let s = report.team(2).ok_or("no episodes ran")?;
        println!("{r_comm:<6}  {:.3}  {:.3}  {:>7.2}  {:>6.1}", s.sr, s.mspl, s.mean_makespan, s.mean_timesteps);
    }
    Ok(())
}
