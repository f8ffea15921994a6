//! Synthetic observation model: raycast visibility plus a parameterised
//! detection oracle in place of RGB-D perception.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{GoalSpec, GridScene, Modality, Occupancy};
use crate::grid::{Cell, Pose};

pub type RobotId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorConfig {
    /// Field of view in radians, in `(0, 2*pi]`.
    pub fov: f64,
    /// Range in metres.
    pub range: f64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            fov: 2.0 * PI / 3.0,
            range: 3.0,
        }
    }
}

impl SensorConfig {
    /// Spacing that keeps adjacent rays within half a cell at full range.
    pub fn max_angular_step(&self, resolution: f64) -> f64 {
        (0.5 * resolution / self.range).atan()
    }

    /// Ray angles relative to the heading, centred in equal bins across the FOV.
    pub fn ray_offsets(&self, resolution: f64) -> Vec<f64> {
        let n = (self.fov / self.max_angular_step(resolution)).ceil().max(1.0) as usize;
        let step = self.fov / n as f64;
        (0..n)
            .map(|i| -self.fov / 2.0 + (i as f64 + 0.5) * step)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionNoise {
    pub p_miss: f64,
    pub p_fp: f64,
    pub score_mean: f64,
    pub score_sd: f64,
}

impl Default for DetectionNoise {
    fn default() -> Self {
        Self {
            p_miss: 0.0,
            p_fp: 0.0,
            score_mean: 1.0,
            score_sd: 0.0,
        }
    }
}

/// Per-modality detection noise. All-default is the ground-truth semantics regime.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseProfile {
    #[serde(default)]
    pub category: DetectionNoise,
    #[serde(default)]
    pub language: DetectionNoise,
    #[serde(default)]
    pub image: DetectionNoise,
}

impl NoiseProfile {
    pub fn for_modality(&self, m: Modality) -> DetectionNoise {
        match m {
            Modality::Category => self.category,
            Modality::Language => self.language,
            Modality::Image => self.image,
        }
    }
}

/// `instance_id` is negative for spurious detections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub instance_id: i64,
    pub category: String,
    pub observed_cells: Vec<Cell>,
    pub score: f64,
}

impl Detection {
    pub fn is_spurious(&self) -> bool {
        self.instance_id < 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub robot_id: RobotId,
    pub pose: Pose,
    /// Cell containing the pose, carried explicitly so frame changes stay exact.
    pub cell: Cell,
    /// Sorted by cell.
    pub visible_cells: Vec<(Cell, Occupancy)>,
    pub detections: Vec<Detection>,
}

/// Maps each instance to the noise it is detected with.
#[derive(Debug, Clone)]
pub struct DetectionOracle {
    profile: NoiseProfile,
    modality_of: BTreeMap<i64, Modality>,
}

impl DetectionOracle {
    /// Instances referenced by a goal use that goal's modality; the rest use `Category`.
    pub fn new(profile: NoiseProfile, goals: &[GoalSpec]) -> Self {
        let mut modality_of = BTreeMap::new();
        for g in goals {
            for id in &g.valid_instance_ids {
                modality_of.entry(*id).or_insert(g.modality);
            }
        }
        Self { profile, modality_of }
    }

    pub fn ground_truth() -> Self {
        Self::new(NoiseProfile::default(), &[])
    }

    fn noise_for(&self, id: i64) -> DetectionNoise {
        self.profile
            .for_modality(self.modality_of.get(&id).copied().unwrap_or(Modality::Category))
    }
}

/// Seeded per-robot randomness for the observation model.
#[derive(Debug, Clone)]
pub struct ObservationStream {
    rng: ChaCha8Rng,
    next_spurious: i64,
}

impl ObservationStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            next_spurious: -1,
        }
    }
}

/// Cells visited by one ray, stopping at (and including) the first obstacle.
fn cast_ray(scene: &GridScene, origin: (f64, f64), angle: f64, max_dist: f64, out: &mut BTreeMap<Cell, Occupancy>) {
    let (px, py) = origin;
    let (dx, dy) = (angle.cos(), angle.sin());
    let mut cell = Cell::new(py.floor() as i32, px.floor() as i32);
    let step_c = if dx > 0.0 { 1 } else { -1 };
    let step_r = if dy > 0.0 { 1 } else { -1 };
    let t_delta_x = if dx != 0.0 { 1.0 / dx.abs() } else { f64::INFINITY };
    let t_delta_y = if dy != 0.0 { 1.0 / dy.abs() } else { f64::INFINITY };
    let mut t_max_x = if dx > 0.0 {
        (cell.col as f64 + 1.0 - px) / dx
    } else if dx < 0.0 {
        (px - cell.col as f64) / -dx
    } else {
        f64::INFINITY
    };
    let mut t_max_y = if dy > 0.0 {
        (cell.row as f64 + 1.0 - py) / dy
    } else if dy < 0.0 {
        (py - cell.row as f64) / -dy
    } else {
        f64::INFINITY
    };
    loop {
        let Some(occ) = scene.occupancy(cell) else { break };
        out.insert(cell, occ);
        if occ == Occupancy::Obstacle {
            break;
        }
        let t = if t_max_x < t_max_y {
            cell.col += step_c;
            let t = t_max_x;
            t_max_x += t_delta_x;
            t
        } else {
            cell.row += step_r;
            let t = t_max_y;
            t_max_y += t_delta_y;
            t
        };
        if t > max_dist {
            break;
        }
    }
}

/// Cells visible from `pose`. Ray tracing runs in cell units.
pub fn visible_cells(scene: &GridScene, pose: &Pose, sensor: &SensorConfig) -> Vec<(Cell, Occupancy)> {
    let res = scene.resolution;
    let origin = (pose.x / res, pose.y / res);
    let max_dist = sensor.range / res;
    let mut out = BTreeMap::new();
    let heading = pose.heading.radians();
    for offset in sensor.ray_offsets(res) {
        cast_ray(scene, origin, heading + offset, max_dist, &mut out);
    }
    out.into_iter().collect()
}

/// Observation of `scene` from `pose` through the detection oracle.
pub fn observe(
    scene: &GridScene,
    robot_id: RobotId,
    pose: &Pose,
    sensor: &SensorConfig,
    oracle: &DetectionOracle,
    stream: &mut ObservationStream,
) -> Observation {
    let visible = visible_cells(scene, pose, sensor);
    let visible_set: BTreeSet<Cell> = visible.iter().map(|(c, _)| *c).collect();
    let mut detections = Vec::new();
    for inst in &scene.instances {
        let seen: Vec<Cell> = inst.footprint.iter().filter(|c| visible_set.contains(c)).copied().collect();
        if seen.is_empty() {
            continue;
        }
        let noise = oracle.noise_for(inst.instance_id);
        if noise.p_miss > 0.0 && stream.rng.random::<f64>() < noise.p_miss {
            continue;
        }
        detections.push(Detection {
            instance_id: inst.instance_id,
            category: inst.category.clone(),
            observed_cells: seen,
            score: draw_score(&noise, &mut stream.rng),
        });
    }
    let fp = oracle.profile.category;
    if fp.p_fp > 0.0 && stream.rng.random::<f64>() < fp.p_fp {
        let free: Vec<Cell> = visible
            .iter()
            .filter(|(_, o)| *o == Occupancy::Free)
            .map(|(c, _)| *c)
            .collect();
        let categories = scene.categories();
        if !free.is_empty() && !categories.is_empty() {
            let cell = free[stream.rng.random_range(0..free.len())];
            let category = categories[stream.rng.random_range(0..categories.len())].clone();
            let id = stream.next_spurious;
            stream.next_spurious -= 1;
            detections.push(Detection {
                instance_id: id,
                category,
                observed_cells: vec![cell],
                score: draw_score(&fp, &mut stream.rng),
            });
        }
    }
    Observation {
        robot_id,
        pose: *pose,
        cell: pose.cell(scene.resolution),
        visible_cells: visible,
        detections,
    }
}

fn draw_score(noise: &DetectionNoise, rng: &mut ChaCha8Rng) -> f64 {
    if noise.score_sd > 0.0 {
        let normal = Normal::new(noise.score_mean, noise.score_sd).expect("finite sd");
        normal.sample(rng).clamp(0.0, 1.0)
    } else {
        noise.score_mean.clamp(0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Heading;

    fn walled() -> GridScene {
        GridScene::from_json(
            r##"{"scene_id":"w","resolution_m":0.25,"grid":[
            "..........",
            "..........",
            "....#.....",
            "....#.....",
            "....#....."],
            "instances":[{"id":1,"category":"tv","cells":[[3,6]]}]}"##,
        )
        .unwrap()
    }

    #[test]
    fn walls_occlude() {
        let scene = walled();
        let pose = Pose::at_cell(Cell::new(3, 3), 0.25, Heading::new(0));
        let sensor = SensorConfig { fov: 2.0 * PI, range: 3.0 };
        let vis: BTreeMap<Cell, Occupancy> = visible_cells(&scene, &pose, &sensor).into_iter().collect();
        assert_eq!(vis.get(&Cell::new(3, 4)), Some(&Occupancy::Obstacle));
        assert!(!vis.contains_key(&Cell::new(3, 5)));
        assert!(!vis.contains_key(&Cell::new(3, 6)));
        let obs = observe(&scene, 0, &pose, &sensor, &DetectionOracle::ground_truth(), &mut ObservationStream::new(0));
        assert!(obs.detections.is_empty());
    }

    #[test]
    fn ground_truth_detection_has_unit_score() {
        let scene = walled();
        let pose = Pose::at_cell(Cell::new(1, 6), 0.25, Heading::new(3));
        let sensor = SensorConfig { fov: PI / 2.0, range: 2.0 };
        let obs = observe(&scene, 0, &pose, &sensor, &DetectionOracle::ground_truth(), &mut ObservationStream::new(0));
        assert_eq!(obs.detections.len(), 1);
        assert_eq!(obs.detections[0].instance_id, 1);
        assert_eq!(obs.detections[0].score, 1.0);
        assert_eq!(obs.detections[0].observed_cells, vec![Cell::new(3, 6)]);
    }

    #[test]
    fn false_positives_get_fresh_negative_ids() {
        let scene = walled();
        let noisy = DetectionNoise { p_miss: 0.0, p_fp: 1.0, score_mean: 0.7, score_sd: 0.1 };
        let oracle = DetectionOracle::new(
            NoiseProfile { category: noisy, ..Default::default() },
            &[],
        );
        let mut stream = ObservationStream::new(9);
        let pose = Pose::at_cell(Cell::new(0, 0), 0.25, Heading::new(0));
        let sensor = SensorConfig::default();
        let a = observe(&scene, 0, &pose, &sensor, &oracle, &mut stream);
        let b = observe(&scene, 0, &pose, &sensor, &oracle, &mut stream);
        let ids: Vec<i64> = a.detections.iter().chain(&b.detections).filter(|d| d.is_spurious()).map(|d| d.instance_id).collect();
        assert_eq!(ids, vec![-1, -2]);
        assert!(a.detections.iter().all(|d| (0.0..=1.0).contains(&d.score)));
    }

    #[test]
    fn ray_spacing_never_exceeds_bound() {
        let sensor = SensorConfig { fov: 2.0 * PI, range: 3.0 };
        let offsets = sensor.ray_offsets(0.25);
        let bound = sensor.max_angular_step(0.25);
        assert!(offsets.windows(2).all(|w| w[1] - w[0] <= bound + 1e-12));
    }
}
