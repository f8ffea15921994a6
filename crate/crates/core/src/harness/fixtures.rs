//! Seeded two-robot map pairs with a known relative transform, built by
//! raycasting panoramas from nearby viewpoints of a generated scene.

use std::collections::BTreeSet;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::frames::LocalFrame;
use super::scenegen::{generate_scene, SceneGenConfig};
use crate::alignment::RigidTransform2D;
use crate::grid::{Cell, Heading, Pose};
use crate::gridworld::{distance_field, observe, DetectionOracle, GridScene, ObservationStream, SensorConfig};
use crate::mapping::{integrate_observation, InstanceRegistry, LogOddsMap, LogOddsParams, DEFAULT_ASSOC_RADIUS};

#[derive(Debug, Clone)]
pub struct AlignmentFixture {
    pub scene: GridScene,
    pub map_a: LogOddsMap,
    pub reg_a: InstanceRegistry,
    pub map_b: LogOddsMap,
    pub reg_b: InstanceRegistry,
    /// B's frame into A's frame.
    pub truth: RigidTransform2D,
    /// Shared explored world cells over the smaller explored set.
    pub overlap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixtureConfig {
    /// Panorama viewpoints per robot.
    pub viewpoints: usize,
    /// Viewpoints lie within this geodesic distance of the robot's start, metres.
    pub wander: f64,
    /// Geodesic separation of the two starts, metres.
    pub separation: (f64, f64),
    pub min_overlap: f64,
}

impl Default for FixtureConfig {
    fn default() -> Self {
        Self { viewpoints: 4, wander: 2.0, separation: (1.0, 3.0), min_overlap: 0.3 }
    }
}

fn explore(
    scene: &GridScene,
    frame: &LocalFrame,
    robot: usize,
    views: &[Cell],
    seed: u64,
) -> (LogOddsMap, InstanceRegistry, BTreeSet<Cell>) {
    let res = scene.resolution;
    let sensor = SensorConfig::default();
    let oracle = DetectionOracle::ground_truth();
    let mut stream = ObservationStream::new(seed);
    let mut map = LogOddsMap::new(robot, res);
    let mut reg = InstanceRegistry::new();
    let mut seen = BTreeSet::new();
    for v in views {
        for h in (0..12).step_by(2) {
            let pose = Pose::at_cell(*v, res, Heading::new(h));
            let obs = observe(scene, robot, &pose, &sensor, &oracle, &mut stream);
            seen.extend(obs.visible_cells.iter().map(|(c, _)| *c));
            let local = frame.observation(&obs, res);
            integrate_observation(&mut map, &mut reg, &local, &LogOddsParams::default(), DEFAULT_ASSOC_RADIUS);
        }
    }
    (map, reg, seen)
}

fn viewpoints(scene: &GridScene, start: Cell, cfg: &FixtureConfig, rng: &mut ChaCha8Rng) -> Vec<Cell> {
    let field = distance_field(scene, start);
    let near: Vec<Cell> = scene
        .cells()
        .filter(|c| scene.index(*c).is_some_and(|i| field[i] <= cfg.wander))
        .collect();
    let mut out = vec![start];
    for _ in 1..cfg.viewpoints {
        out.push(*near.choose(rng).expect("start is reachable"));
    }
    out
}

/// Deterministic in `seed`; retries viewpoints until the overlap floor holds.
pub fn alignment_fixture(seed: u64, cfg: &FixtureConfig) -> AlignmentFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scene = generate_scene(&format!("fixture_{seed}"), rng.random(), &SceneGenConfig::default());
    let res = scene.resolution;
    let free: Vec<Cell> = scene.cells().filter(|c| scene.is_free(*c)).collect();
    loop {
        let sa = *free.choose(&mut rng).expect("free space");
        let field = distance_field(&scene, sa);
        let partners: Vec<Cell> = free
            .iter()
            .copied()
            .filter(|c| {
                let d = field[scene.index(*c).unwrap()];
                d >= cfg.separation.0 && d <= cfg.separation.1
            })
            .collect();
        let Some(&sb) = partners.choose(&mut rng) else { continue };
        let va = viewpoints(&scene, sa, cfg, &mut rng);
        let vb = viewpoints(&scene, sb, cfg, &mut rng);
        let fa = LocalFrame::new(rng.random_range(0..4), sa, res);
        let fb = LocalFrame::new(rng.random_range(0..4), sb, res);
        let (map_a, reg_a, seen_a) = explore(&scene, &fa, 0, &va, seed);
        let (map_b, reg_b, seen_b) = explore(&scene, &fb, 1, &vb, seed ^ 1);
        let shared = seen_a.intersection(&seen_b).count();
        let overlap = shared as f64 / seen_a.len().min(seen_b.len()).max(1) as f64;
        if overlap < cfg.min_overlap {
            continue;
        }
        return AlignmentFixture { truth: fa.relative_from(&fb), scene, map_a, reg_a, map_b, reg_b, overlap };
    }
}
