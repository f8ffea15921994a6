#![allow(dead_code)]

use std::path::PathBuf;

use semnav::grid::Cell;
use semnav::gridworld::{load_episode, load_scene, Episode, GridScene, Occupancy};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn scene(name: &str) -> GridScene {
    load_scene(fixture(&format!("{name}.scene"))).expect("fixture scene loads")
}

pub fn episode(name: &str) -> Episode {
    load_episode(fixture(&format!("{name}.episode"))).expect("fixture episode loads")
}

/// Scene from `.`/`#` rows, no instances.
pub fn grid(rows: &[&str]) -> GridScene {
    let h = rows.len();
    let w = rows[0].len();
    let occ = rows
        .iter()
        .flat_map(|r| r.chars().map(|c| if c == '#' { Occupancy::Obstacle } else { Occupancy::Free }))
        .collect();
    GridScene::new("grid", w, h, 0.25, occ, Vec::new()).expect("valid grid")
}

/// Plain Dijkstra over the 8-connected free-cell graph, no corner cutting.
pub fn dijkstra(scene: &GridScene, from: Cell) -> Vec<f64> {
    let n = scene.cell_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    if !scene.is_free(from) {
        return dist;
    }
    dist[scene.index(from).unwrap()] = 0.0;
    for _ in 0..n {
        let Some(u) = (0..n).filter(|i| !done[*i] && dist[*i].is_finite()).min_by(|a, b| dist[*a].total_cmp(&dist[*b]))
        else {
            break;
        };
        done[u] = true;
        let c = scene.cell_of_index(u);
        for dr in -1..=1 {
            for dc in -1..=1 {
                if dr == 0 && dc == 0 {
                    continue;
                }
                let nb = c.offset(dr, dc);
                if !scene.is_free(nb) {
                    continue;
                }
                if dr != 0 && dc != 0 && (!scene.is_free(c.offset(dr, 0)) || !scene.is_free(c.offset(0, dc))) {
                    continue;
                }
                let w = if dr != 0 && dc != 0 { scene.resolution * 2f64.sqrt() } else { scene.resolution };
                let v = scene.index(nb).unwrap();
                if dist[u] + w < dist[v] {
                    dist[v] = dist[u] + w;
                }
            }
        }
    }
    dist
}

pub mod oracle;
