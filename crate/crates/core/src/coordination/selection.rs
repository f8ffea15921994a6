//! Distance-ratio frontier weighting.

use crate::mapping::{Frontier, LogOddsMap};

/// Weight of a frontier at distance `d_self` given the neighbours' distances.
/// Unreachable for self gives `-inf`; no finite neighbour distance falls back
/// to `1 / d_self`.
pub fn frontier_weight(d_self: f64, d_neighbors: &[f64]) -> f64 {
    if !d_self.is_finite() || d_self <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let nearest = d_neighbors.iter().copied().filter(|d| d.is_finite()).fold(f64::INFINITY, f64::min);
    if nearest.is_finite() {
        nearest / d_self
    } else {
        1.0 / d_self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontierChoice {
    pub index: usize,
    pub weight: f64,
    pub distance: f64,
}

/// Argmax of the weight; ties go to the nearer frontier, then the lower index.
/// `d_neighbors[j][k]` is neighbour `j`'s distance to frontier `k`.
pub fn select_by_distances(d_self: &[f64], d_neighbors: &[Vec<f64>]) -> Option<FrontierChoice> {
    let mut best: Option<FrontierChoice> = None;
    for (k, &d) in d_self.iter().enumerate() {
        let theirs: Vec<f64> = d_neighbors.iter().map(|row| row[k]).collect();
        let w = frontier_weight(d, &theirs);
        if w == f64::NEG_INFINITY {
            continue;
        }
        let better = match best {
            None => true,
            Some(b) => w > b.weight || (w == b.weight && d < b.distance),
        };
        if better {
            best = Some(FrontierChoice { index: k, weight: w, distance: d });
        }
    }
    best
}

/// Distance from a cost field to the nearest cell of `f`.
pub fn distance_to_frontier(map: &LogOddsMap, field: &[f64], f: &Frontier) -> f64 {
    f.cells
        .iter()
        .filter_map(|c| map.index(*c))
        .map(|i| field[i])
        .fold(f64::INFINITY, f64::min)
}

/// Frontier choice from precomputed cost fields on `map`.
pub fn select_frontier(
    map: &LogOddsMap,
    frontiers: &[Frontier],
    self_field: &[f64],
    neighbor_fields: &[&[f64]],
) -> Option<FrontierChoice> {
    let d_self: Vec<f64> = frontiers.iter().map(|f| distance_to_frontier(map, self_field, f)).collect();
    let d_neighbors: Vec<Vec<f64>> = neighbor_fields
        .iter()
        .map(|field| frontiers.iter().map(|f| distance_to_frontier(map, field, f)).collect())
        .collect();
    select_by_distances(&d_self, &d_neighbors)
}
