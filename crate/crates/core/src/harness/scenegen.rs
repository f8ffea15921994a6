//! Seeded rooms-and-corridors scenes with placed object instances, and
//! multi-robot episodes over them.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::grid::{Cell, Heading, Pose, NEIGHBORS4, NEIGHBORS8};
use crate::gridworld::{distance_field, Episode, GoalSpec, GridScene, Modality, ObjectInstance, Occupancy};

pub const CATEGORIES: [&str; 10] =
    ["chair", "table", "sofa", "bed", "tv", "plant", "sink", "toilet", "fridge", "oven"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneGenConfig {
    pub width: usize,
    pub height: usize,
    pub resolution: f64,
    /// Smallest room side, cells (walls excluded).
    pub min_room: usize,
    pub door_width: usize,
    pub instances: usize,
}

impl Default for SceneGenConfig {
    fn default() -> Self {
        Self { width: 40, height: 32, resolution: 0.25, min_room: 7, door_width: 3, instances: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeGenConfig {
    pub robots: usize,
    pub goals: usize,
    pub max_steps: u32,
    pub success_radius: f64,
    /// Starts lie within this distance of the first, metres.
    pub start_spread: f64,
}

impl Default for EpisodeGenConfig {
    fn default() -> Self {
        Self { robots: 4, goals: 3, max_steps: 400, success_radius: 1.0, start_spread: 1.5 }
    }
}

struct Grid {
    w: usize,
    h: usize,
    occ: Vec<bool>,
}

impl Grid {
    fn get(&self, c: Cell) -> bool {
        c.row < 0 || c.col < 0 || c.row as usize >= self.h || c.col as usize >= self.w || self.occ[c.row as usize * self.w + c.col as usize]
    }

    fn set(&mut self, c: Cell, v: bool) {
        self.occ[c.row as usize * self.w + c.col as usize] = v;
    }

    fn free_cells(&self) -> Vec<Cell> {
        (0..self.h as i32)
            .flat_map(|r| (0..self.w as i32).map(move |c| Cell::new(r, c)))
            .filter(|c| !self.get(*c))
            .collect()
    }

    fn connected(&self) -> bool {
        let free = self.free_cells();
        let Some(&seed) = free.first() else { return false };
        let mut seen = BTreeSet::from([seed]);
        let mut q = VecDeque::from([seed]);
        while let Some(c) = q.pop_front() {
            for (dr, dc) in NEIGHBORS4 {
                let n = c.offset(dr, dc);
                if !self.get(n) && seen.insert(n) {
                    q.push_back(n);
                }
            }
        }
        seen.len() == free.len()
    }
}

/// Recursive division of the interior `[r0, r1) x [c0, c1)`.
fn divide(g: &mut Grid, r0: usize, r1: usize, c0: usize, c1: usize, cfg: &SceneGenConfig, rng: &mut ChaCha8Rng) {
    let (h, w) = (r1 - r0, c1 - c0);
    let can_rows = h >= 2 * cfg.min_room + 1;
    let can_cols = w >= 2 * cfg.min_room + 1;
    if !can_rows && !can_cols {
        return;
    }
    let horizontal = match (can_rows, can_cols) {
        (true, false) => true,
        (false, true) => false,
        _ => h > w || (h == w && rng.random_bool(0.5)),
    };
    if horizontal {
        let wall = rng.random_range(r0 + cfg.min_room..=r1 - cfg.min_room - 1);
        for c in c0..c1 {
            g.set(Cell::new(wall as i32, c as i32), true);
        }
        let door = rng.random_range(c0..=c1 - cfg.door_width);
        for c in door..door + cfg.door_width {
            g.set(Cell::new(wall as i32, c as i32), false);
        }
        divide(g, r0, wall, c0, c1, cfg, rng);
        divide(g, wall + 1, r1, c0, c1, cfg, rng);
    } else {
        let wall = rng.random_range(c0 + cfg.min_room..=c1 - cfg.min_room - 1);
        for r in r0..r1 {
            g.set(Cell::new(r as i32, wall as i32), true);
        }
        let door = rng.random_range(r0..=r1 - cfg.door_width);
        for r in door..door + cfg.door_width {
            g.set(Cell::new(r as i32, wall as i32), false);
        }
        divide(g, r0, r1, c0, wall, cfg, rng);
        divide(g, r0, r1, wall + 1, c1, cfg, rng);
    }
}

fn place_instances(g: &mut Grid, cfg: &SceneGenConfig, res: f64, rng: &mut ChaCha8Rng) -> Vec<ObjectInstance> {
    let shapes: [&[(i32, i32)]; 4] = [&[(0, 0)], &[(0, 0), (0, 1)], &[(0, 0), (1, 0)], &[(0, 0), (0, 1), (1, 0), (1, 1)]];
    let mut cats: Vec<&str> = CATEGORIES.to_vec();
    cats.shuffle(rng);
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < cfg.instances && attempts < 500 {
        attempts += 1;
        let free = g.free_cells();
        let anchor = *free.choose(rng).expect("free space");
        let shape = shapes[rng.random_range(0..shapes.len())];
        let cells: Vec<Cell> = shape.iter().map(|(dr, dc)| anchor.offset(*dr, *dc)).collect();
        // Two free cells on every side keep passages at least two wide.
        let roomy = cells.iter().all(|c| {
            (-2..=2).all(|dr| (-2..=2).all(|dc| {
                let n = c.offset(dr, dc);
                cells.contains(&n) || !g.get(n)
            }))
        });
        if !roomy {
            continue;
        }
        for c in &cells {
            g.set(*c, true);
        }
        if !g.connected() {
            for c in &cells {
                g.set(*c, false);
            }
            continue;
        }
        // Categories cycle so early ones repeat and later ones are unique.
        let category = cats[out.len() % cats.len().min(7)];
        out.push(ObjectInstance::new(out.len() as i64 + 1, category, cells.into_iter().collect(), res));
    }
    out
}

/// Generates a connected scene; retries with derived seeds until the layout
/// is connected.
pub fn generate_scene(scene_id: &str, seed: u64, cfg: &SceneGenConfig) -> GridScene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut g = Grid { w: cfg.width, h: cfg.height, occ: vec![false; cfg.width * cfg.height] };
        for r in 0..cfg.height as i32 {
            for c in 0..cfg.width as i32 {
                if r == 0 || c == 0 || r == cfg.height as i32 - 1 || c == cfg.width as i32 - 1 {
                    g.set(Cell::new(r, c), true);
                }
            }
        }
        divide(&mut g, 1, cfg.height - 1, 1, cfg.width - 1, cfg, &mut rng);
        if !g.connected() {
            continue;
        }
        let instances = place_instances(&mut g, cfg, cfg.resolution, &mut rng);
        let occupancy = g.occ.iter().map(|o| if *o { Occupancy::Obstacle } else { Occupancy::Free }).collect();
        return GridScene::new(scene_id, cfg.width, cfg.height, cfg.resolution, occupancy, instances)
            .expect("generated scene is valid");
    }
}

/// Starts clustered around a random clear cell; goals over distinct
/// categories, each satisfied by any instance of that category.
pub fn generate_episode(scene: &GridScene, episode_id: &str, seed: u64, cfg: &EpisodeGenConfig) -> Option<Episode> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let res = scene.resolution;
    let free: Vec<Cell> = scene.cells().filter(|c| scene.is_free(*c)).collect();
    let clear_cell = |c: Cell| scene.is_free(c) && NEIGHBORS8.iter().all(|(dr, dc)| scene.is_free(c.offset(*dr, *dc)));
    let candidates: Vec<Cell> = free.iter().copied().filter(|c| clear_cell(*c)).collect();
    let mut by_category: BTreeMap<&str, BTreeSet<i64>> = BTreeMap::new();
    for inst in &scene.instances {
        by_category.entry(inst.category.as_str()).or_default().insert(inst.instance_id);
    }
    for _ in 0..100 {
        let first = *candidates.choose(&mut rng)?;
        let field = distance_field(scene, first);
        let spread = cfg.start_spread / res;
        let mut near: Vec<Cell> = candidates
            .iter()
            .copied()
            .filter(|c| *c != first && c.euclid(first) <= spread && field[scene.index(*c).unwrap()].is_finite())
            .collect();
        if near.len() + 1 < cfg.robots {
            continue;
        }
        near.shuffle(&mut rng);
        let mut starts = vec![first];
        for c in near {
            if starts.len() == cfg.robots {
                break;
            }
            if starts.iter().all(|s| s.chebyshev(c) >= 2) {
                starts.push(c);
            }
        }
        if starts.len() < cfg.robots {
            continue;
        }
        let mut cats: Vec<&str> = by_category.keys().copied().collect();
        cats.shuffle(&mut rng);
        let reachable = |ids: &BTreeSet<i64>| {
            ids.iter().any(|id| {
                scene.instance(*id).is_some_and(|inst| {
                    inst.footprint.iter().any(|f| {
                        NEIGHBORS8.iter().any(|(dr, dc)| {
                            scene.index(f.offset(*dr, *dc)).is_some_and(|i| field[i].is_finite() && field[i] > 0.0)
                        })
                    })
                })
            })
        };
        let goals: Vec<GoalSpec> = cats
            .into_iter()
            .filter(|c| reachable(&by_category[c]))
            .take(cfg.goals)
            .enumerate()
            .map(|(i, cat)| GoalSpec {
                goal_id: i as u32,
                modality: Modality::Category,
                valid_instance_ids: by_category[cat].clone(),
                success_radius: cfg.success_radius,
                label: cat.to_string(),
            })
            .collect();
        if goals.len() < cfg.goals {
            return None;
        }
        let start_poses = starts
            .iter()
            .map(|c| Pose::at_cell(*c, res, Heading::new(rng.random_range(0..12))))
            .collect();
        return Some(Episode {
            episode_id: episode_id.to_string(),
            scene_id: scene.scene_id.clone(),
            start_poses,
            goals,
            max_steps: cfg.max_steps,
            seed,
        });
    }
    None
}
