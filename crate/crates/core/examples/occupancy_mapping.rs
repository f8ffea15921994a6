//! Builds a log-odds map by turning in place inside a generated scene and
//! prints it as ASCII.

use semnav::grid::{Cell, Heading, Pose};
use semnav::gridworld::{observe, DetectionOracle, ObservationStream, SensorConfig};
use semnav::harness::scenegen::{generate_scene, SceneGenConfig};
use semnav::mapping::{integrate_observation, CellClass, InstanceRegistry, LogOddsMap, LogOddsParams, DEFAULT_ASSOC_RADIUS};

fn main() {
    let scene = generate_scene("demo", 11, &SceneGenConfig::default());
    let center = Cell::new(scene.height as i32 / 2, scene.width as i32 / 2);
    let start = scene.cells().filter(|c| scene.is_free(*c)).min_by_key(|c| c.chebyshev(center)).expect("free cell");
    let mut map = LogOddsMap::new(0, scene.resolution);
    let mut registry = InstanceRegistry::new();
    let mut stream = ObservationStream::new(0);
    let sensor = SensorConfig::default();
    let oracle = DetectionOracle::ground_truth();

    for h in 0..12 {
        let pose = Pose::at_cell(start, scene.resolution, Heading::new(h));
        let obs = observe(&scene, 0, &pose, &sensor, &oracle, &mut stream);
        integrate_observation(&mut map, &mut registry, &obs, &LogOddsParams::default(), DEFAULT_ASSOC_RADIUS);
    }

    let (lo, hi) = map.bounds().expect("something was seen");
    for r in lo.row..=hi.row {
        let line: String = (lo.col..=hi.col)
            .map(|c| {
                let cell = Cell::new(r, c);
                if cell == start {
                    return '@';
                }
                match map.classify(cell) {
                    CellClass::Occupied => '#',
                    CellClass::FreeExplored => '.',
                    _ => ' ',
                }
            })
            .collect();
        if !line.trim().is_empty() {
            println!("{line}");
        }
    }
    println!("{} cells explored, {} objects registered", map.explored_count(), registry.len());
    for id in 0..registry.len() as u32 {
        if let Some(rec) = registry.get(id) {
            println!("  {} at ({:.2}, {:.2}) m", rec.category, rec.centroid.0, rec.centroid.1);
        }
    }
}
