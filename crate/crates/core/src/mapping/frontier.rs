use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::{CellClass, LogOddsMap};
use crate::grid::{Cell, NEIGHBORS4, NEIGHBORS8};

pub const DEFAULT_MIN_FRONTIER: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frontier {
    /// Sorted.
    pub cells: Vec<Cell>,
    pub representative: Cell,
}

/// Explored-free cell with at least one unknown 4-neighbour.
pub fn is_frontier_cell(map: &LogOddsMap, cell: Cell) -> bool {
    map.classify(cell) == CellClass::FreeExplored
        && NEIGHBORS4
            .iter()
            .any(|(dr, dc)| map.classify(cell.offset(*dr, *dc)) == CellClass::Unknown)
}

/// Maximal 8-connected frontier clusters of at least `min_size` cells, ordered
/// by size (descending) then representative row and column.
pub fn extract_frontiers(map: &LogOddsMap, min_size: usize) -> Vec<Frontier> {
    let candidates: BTreeSet<Cell> = (0..map.len())
        .map(|i| map.cell_of(i))
        .filter(|c| is_frontier_cell(map, *c))
        .collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &seed in &candidates {
        if !seen.insert(seed) {
            continue;
        }
        let mut cluster = vec![seed];
        let mut queue = VecDeque::from([seed]);
        while let Some(c) = queue.pop_front() {
            for (dr, dc) in NEIGHBORS8 {
                let n = c.offset(dr, dc);
                if candidates.contains(&n) && seen.insert(n) {
                    cluster.push(n);
                    queue.push_back(n);
                }
            }
        }
        if cluster.len() < min_size {
            continue;
        }
        cluster.sort();
        let n = cluster.len() as f64;
        let mean_r = cluster.iter().map(|c| c.row as f64).sum::<f64>() / n;
        let mean_c = cluster.iter().map(|c| c.col as f64).sum::<f64>() / n;
        let representative = *cluster
            .iter()
            .min_by(|a, b| {
                let da = (a.row as f64 - mean_r).powi(2) + (a.col as f64 - mean_c).powi(2);
                let db = (b.row as f64 - mean_r).powi(2) + (b.col as f64 - mean_c).powi(2);
                da.total_cmp(&db).then(a.cmp(b))
            })
            .expect("non-empty");
        out.push(Frontier {
            cells: cluster,
            representative,
        });
    }
    out.sort_by(|a, b| {
        b.cells
            .len()
            .cmp(&a.cells.len())
            .then(a.representative.cmp(&b.representative))
    });
    out
}
