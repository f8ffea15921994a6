//! Grid planning on a robot's own map with obstacle inflation.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use ordered_float::OrderedFloat;
use serde::{Deserialize, Serialize};

use super::{CellClass, LogOddsMap};
use crate::grid::{step_cost, Cell, NEIGHBORS8};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannerConfig {
    /// Cost multiplier for entering an unknown cell, `>= 1`.
    pub unknown_penalty: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self { unknown_penalty: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannedPath {
    /// From start to goal inclusive.
    pub cells: Vec<Cell>,
    /// Metres, including unknown-cell penalties.
    pub cost: f64,
    /// Inflation radius the path was found at.
    pub inflation: u32,
}

/// Traversability of the stored window after dilating occupied cells.
pub struct InflatedGrid<'a> {
    map: &'a LogOddsMap,
    blocked: Vec<bool>,
    /// Cells exempt from inflation (start, goal).
    exempt: Vec<usize>,
}

impl<'a> InflatedGrid<'a> {
    pub fn new(map: &'a LogOddsMap, inflate: u32, exempt: &[Cell]) -> Self {
        let n = map.len();
        let mut blocked = vec![false; n];
        let r = inflate as i32;
        for idx in 0..n {
            if map.classify_at(idx) != CellClass::Occupied {
                continue;
            }
            let c = map.cell_of(idx);
            for dr in -r..=r {
                for dc in -r..=r {
                    if let Some(j) = map.index(c.offset(dr, dc)) {
                        blocked[j] = true;
                    }
                }
            }
        }
        let exempt: Vec<usize> = exempt.iter().filter_map(|c| map.index(*c)).collect();
        Self { map, blocked, exempt }
    }

    pub fn passable(&self, cell: Cell) -> bool {
        match self.map.index(cell) {
            None => false,
            Some(i) => {
                if self.exempt.contains(&i) {
                    self.map.classify_at(i) != CellClass::Occupied || self.exempt.first() == Some(&i)
                } else {
                    !self.blocked[i]
                }
            }
        }
    }

    pub fn is_blocked_idx(&self, idx: usize) -> bool {
        self.blocked[idx]
    }
}

/// Dijkstra costs (metres) from `from` over the inflated grid.
pub fn cost_field(map: &LogOddsMap, from: Cell, inflate: u32, cfg: &PlannerConfig) -> Vec<f64> {
    let grid = InflatedGrid::new(map, inflate, &[from]);
    let mut dist = vec![f64::INFINITY; map.len()];
    let Some(start) = map.index(from) else { return dist };
    dist[start] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((OrderedFloat(0.0), start)));
    while let Some(Reverse((OrderedFloat(d), idx))) = heap.pop() {
        if d > dist[idx] {
            continue;
        }
        let cell = map.cell_of(idx);
        for (dr, dc) in NEIGHBORS8 {
            let next = cell.offset(dr, dc);
            if !grid.passable(next) {
                continue;
            }
            if dr != 0 && dc != 0 && !(grid.passable(cell.offset(dr, 0)) && grid.passable(cell.offset(0, dc))) {
                continue;
            }
            let ni = map.index(next).expect("passable implies stored");
            let nd = d + transition_cost(map, ni, dr, dc, cfg);
            if nd < dist[ni] {
                dist[ni] = nd;
                heap.push(Reverse((OrderedFloat(nd), ni)));
            }
        }
    }
    dist
}

fn transition_cost(map: &LogOddsMap, to_idx: usize, dr: i32, dc: i32, cfg: &PlannerConfig) -> f64 {
    let base = step_cost(dr, dc) * map.resolution;
    if map.explored_at(to_idx) {
        base
    } else {
        base * cfg.unknown_penalty
    }
}

/// A* at a single inflation level.
pub fn plan_path_at(map: &LogOddsMap, from: Cell, to: Cell, inflate: u32, cfg: &PlannerConfig) -> Option<PlannedPath> {
    let start = map.index(from)?;
    let goal = map.index(to)?;
    // Start first: it may sit inside an occupied cell after a bad update.
    let grid = InflatedGrid::new(map, inflate, &[from, to]);
    if !grid.passable(to) {
        return None;
    }
    let h = |c: Cell| {
        let dr = (c.row - to.row).abs() as f64;
        let dc = (c.col - to.col).abs() as f64;
        (dr.max(dc) + (std::f64::consts::SQRT_2 - 1.0) * dr.min(dc)) * map.resolution
    };
    let mut g = vec![f64::INFINITY; map.len()];
    let mut parent = vec![usize::MAX; map.len()];
    g[start] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((OrderedFloat(h(from)), start)));
    while let Some(Reverse((_, idx))) = heap.pop() {
        if idx == goal {
            break;
        }
        let cell = map.cell_of(idx);
        let d = g[idx];
        for (dr, dc) in NEIGHBORS8 {
            let next = cell.offset(dr, dc);
            if !grid.passable(next) {
                continue;
            }
            if dr != 0 && dc != 0 && !(grid.passable(cell.offset(dr, 0)) && grid.passable(cell.offset(0, dc))) {
                continue;
            }
            let ni = map.index(next).expect("stored");
            let nd = d + transition_cost(map, ni, dr, dc, cfg);
            if nd < g[ni] {
                g[ni] = nd;
                parent[ni] = idx;
                heap.push(Reverse((OrderedFloat(nd + h(next)), ni)));
            }
        }
    }
    if !g[goal].is_finite() {
        return None;
    }
    let mut cells = vec![to];
    let mut cur = goal;
    while cur != start {
        cur = parent[cur];
        cells.push(map.cell_of(cur));
    }
    cells.reverse();
    Some(PlannedPath {
        cells,
        cost: g[goal],
        inflation: inflate,
    })
}

/// Plans at `inflate`, reducing the radius one step at a time down to zero.
pub fn plan_path(map: &LogOddsMap, from: Cell, to: Cell, inflate: u32, cfg: &PlannerConfig) -> Option<PlannedPath> {
    (0..=inflate)
        .rev()
        .find_map(|r| plan_path_at(map, from, to, r, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map_from(rows: &[&str]) -> LogOddsMap {
        let mut m = LogOddsMap::new(0, 0.25);
        for (r, line) in rows.iter().enumerate() {
            for (c, ch) in line.chars().enumerate() {
                let cell = Cell::new(r as i32, c as i32);
                match ch {
                    '#' => m.set_cell(cell, 2.0, true),
                    '.' => m.set_cell(cell, -1.0, true),
                    _ => m.set_cell(cell, 0.0, false),
                }
            }
        }
        m
    }

    #[test]
    fn straight_corridor() {
        let m = map_from(&["#######", ".......", "#######"]);
        let p = plan_path(&m, Cell::new(1, 0), Cell::new(1, 6), 0, &PlannerConfig::default()).unwrap();
        assert_eq!(p.cells.len(), 7);
        assert!((p.cost - 1.5).abs() < 1e-12);
    }

    #[test]
    fn narrow_gap_needs_inflation_zero() {
        let m = map_from(&[
            "#########", "#.......#", "#.......#", "####.####", "#.......#", "#.......#", "#########",
        ]);
        let cfg = PlannerConfig::default();
        assert!(plan_path_at(&m, Cell::new(1, 4), Cell::new(5, 4), 1, &cfg).is_none());
        let p = plan_path(&m, Cell::new(1, 4), Cell::new(5, 4), 1, &cfg).unwrap();
        assert_eq!(p.inflation, 0);
        assert!(p.cells.contains(&Cell::new(3, 4)));
    }

    #[test]
    fn unknown_cells_cost_more() {
        let m = map_from(&["...", "?..", "..."]);
        let field = cost_field(&m, Cell::new(0, 0), 0, &PlannerConfig::default());
        let down = field[m.index(Cell::new(1, 0)).unwrap()];
        assert!((down - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sealed_target_is_unreachable() {
        let m = map_from(&[".....", ".###.", ".#.#.", ".###.", "....."]);
        assert!(plan_path(&m, Cell::new(0, 0), Cell::new(2, 2), 1, &PlannerConfig::default()).is_none());
    }
}
