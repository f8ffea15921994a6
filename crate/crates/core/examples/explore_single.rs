//! One robot searches a generated apartment for its goals and the run is
//! rendered as an SVG trajectory.
//!
//! cargo run --example explore_single -- [seed] [out_dir]

use std::path::PathBuf;

use semnav::harness::scenegen::{EpisodeGenConfig, SceneGenConfig};
use semnav::harness::{generate_suite, render_trace, run_episode, RenderKind, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(3);
    let out: PathBuf = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("semnav-explore"));

    let suite = generate_suite(1, seed, &SceneGenConfig::default(), &EpisodeGenConfig { robots: 1, ..Default::default() });
    let ep = suite.episodes[0].episode.as_ref().map_err(|e| e.clone())?;
    let scene = &suite.scenes[&ep.scene_id];
    println!("scene {} ({}x{} cells), goals: {:?}", scene.scene_id, scene.width, scene.height, ep.goals.iter().map(|g| &g.label).collect::<Vec<_>>());

    let run = run_episode(scene, ep, &RunConfig::new(ep.seed))?;
    for g in &run.outcome.goals {
        match g.step {
            Some(step) => println!("  goal {} found at step {step}", g.goal_id),
            None => println!("  goal {} not found", g.goal_id),
        }
    }
    println!(
        "path length {:.2} m, optimal {:.2} m, {} steps",
        run.outcome.max_distance(),
        run.d_star.unwrap_or(f64::NAN),
        run.outcome.timesteps()
    );
    std::fs::create_dir_all(&out)?;
    for p in render_trace(&run.trace, RenderKind::Trajectory, &out)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}
