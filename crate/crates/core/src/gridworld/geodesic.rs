use std::cmp::Reverse;
use std::collections::BinaryHeap;

use ordered_float::OrderedFloat;

use super::{GridScene, SceneError};
use crate::grid::{step_cost, Cell, NEIGHBORS8};

/// Shortest 8-connected path lengths (metres) over free cells from `from`.
/// Diagonal steps may not cut obstacle corners. Unreachable cells are infinite.
pub fn distance_field(scene: &GridScene, from: Cell) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; scene.cell_count()];
    let Some(start) = scene.index(from) else { return dist };
    if !scene.is_free(from) {
        return dist;
    }
    dist[start] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((OrderedFloat(0.0), start)));
    while let Some(Reverse((OrderedFloat(d), idx))) = heap.pop() {
        if d > dist[idx] {
            continue;
        }
        let cell = scene.cell_of_index(idx);
        for (dr, dc) in NEIGHBORS8 {
            let next = cell.offset(dr, dc);
            if !scene.is_free(next) {
                continue;
            }
            if dr != 0 && dc != 0 && !(scene.is_free(cell.offset(dr, 0)) && scene.is_free(cell.offset(0, dc))) {
                continue;
            }
            let nd = d + step_cost(dr, dc) * scene.resolution;
            let ni = scene.index(next).expect("in bounds");
            if nd < dist[ni] {
                dist[ni] = nd;
                heap.push(Reverse((OrderedFloat(nd), ni)));
            }
        }
    }
    dist
}

/// Geodesic distance in metres, `Ok(None)` when unreachable.
pub fn geodesic_distance(scene: &GridScene, from: Cell, to: Cell) -> Result<Option<f64>, SceneError> {
    if !scene.in_bounds(to) {
        return Err(SceneError::InvalidCell(to));
    }
    if !scene.is_free(from) {
        return Err(SceneError::InvalidCell(from));
    }
    let d = distance_field(scene, from)[scene.index(to).expect("checked")];
    Ok(d.is_finite().then_some(d))
}
