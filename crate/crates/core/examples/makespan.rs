//! Optimal multi-robot makespan for a generated episode: which robot visits
//! which goals, and in what order.

use semnav::harness::scenegen::{generate_episode, generate_scene, EpisodeGenConfig, SceneGenConfig};
use semnav::metrics::{nearest_robot_upper_bound, optimal_makespan, MakespanInstance, DEFAULT_MAX_REPRESENTATIVES};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scene = generate_scene("demo", 21, &SceneGenConfig::default());
    let cfg = EpisodeGenConfig { robots: 3, goals: 5, ..Default::default() };
    let ep = generate_episode(&scene, "demo", 21, &cfg).ok_or("scene too small for the episode")?;
    let inst = MakespanInstance::from_episode(&scene, &ep, DEFAULT_MAX_REPRESENTATIVES);
    let sol = optimal_makespan(&inst)?;

    println!("{} robots, {} goals, {} candidate cells", inst.robots(), inst.goals(), inst.nodes.len());
    for (r, route) in sol.routes.iter().enumerate() {
        let stops: Vec<String> = route.iter().map(|(g, c)| format!("g{g}@({},{})", c.row, c.col)).collect();
        println!("  robot {r}: {:.2} m  {}", sol.robot_costs[r], stops.join(" -> "));
    }
    println!("optimal makespan {:.2} m (nearest-robot bound {:.2} m)", sol.d_star, nearest_robot_upper_bound(&inst));
    Ok(())
}
