use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::grid::Cell;
use crate::gridworld::RobotId;

/// Log-odds increments and clamp.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogOddsParams {
    pub occ_hit: f64,
    pub free_miss: f64,
    pub sem_hit: f64,
    pub l_max: f64,
}

impl Default for LogOddsParams {
    fn default() -> Self {
        Self {
            occ_hit: 0.9,
            free_miss: 0.4,
            sem_hit: 0.9,
            l_max: 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellClass {
    Occupied,
    FreeExplored,
    Unknown,
}

const GROW_MARGIN: i32 = 8;

/// A robot's private map in its own frame. Storage grows on demand; cells
/// outside the stored window are unexplored with zero log-odds.
#[derive(Debug, Clone, PartialEq)]
pub struct LogOddsMap {
    pub frame_id: RobotId,
    pub resolution: f64,
    /// Local cell stored at index 0.
    origin: Cell,
    rows: usize,
    cols: usize,
    occupancy: Vec<f64>,
    explored: Vec<bool>,
    semantic: BTreeMap<String, Vec<f64>>,
}

impl LogOddsMap {
    pub fn new(frame_id: RobotId, resolution: f64) -> Self {
        Self {
            frame_id,
            resolution,
            origin: Cell::new(0, 0),
            rows: 0,
            cols: 0,
            occupancy: Vec::new(),
            explored: Vec::new(),
            semantic: BTreeMap::new(),
        }
    }

    /// Rebuilds a map from raw channel data (row-major over `rows x cols`).
    pub fn from_parts(
        frame_id: RobotId,
        resolution: f64,
        origin: Cell,
        rows: usize,
        cols: usize,
        occupancy: Vec<f64>,
        explored: Vec<bool>,
        semantic: BTreeMap<String, Vec<f64>>,
    ) -> Option<Self> {
        let n = rows * cols;
        if occupancy.len() != n || explored.len() != n || semantic.values().any(|v| v.len() != n) {
            return None;
        }
        Some(Self {
            frame_id,
            resolution,
            origin,
            rows,
            cols,
            occupancy,
            explored,
            semantic,
        })
    }

    pub fn origin(&self) -> Cell {
        self.origin
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, cell: Cell) -> Option<usize> {
        let r = cell.row - self.origin.row;
        let c = cell.col - self.origin.col;
        (r >= 0 && c >= 0 && (r as usize) < self.rows && (c as usize) < self.cols)
            .then(|| r as usize * self.cols + c as usize)
    }

    pub fn cell_of(&self, idx: usize) -> Cell {
        Cell::new(
            self.origin.row + (idx / self.cols) as i32,
            self.origin.col + (idx % self.cols) as i32,
        )
    }

    pub fn contains(&self, cell: Cell) -> bool {
        self.index(cell).is_some()
    }

    /// Inclusive bounding cells of the stored window, `None` if empty.
    pub fn bounds(&self) -> Option<(Cell, Cell)> {
        (!self.is_empty()).then(|| {
            (
                self.origin,
                self.origin.offset(self.rows as i32 - 1, self.cols as i32 - 1),
            )
        })
    }

    /// Grows storage so that every cell in `[lo, hi]` is addressable.
    pub fn ensure_contains(&mut self, lo: Cell, hi: Cell) {
        if let (Some(_), Some(_)) = (self.index(lo), self.index(hi)) {
            return;
        }
        let (new_lo, new_hi) = match self.bounds() {
            None => (lo.offset(-GROW_MARGIN, -GROW_MARGIN), hi.offset(GROW_MARGIN, GROW_MARGIN)),
            Some((b_lo, b_hi)) => {
                let mut n_lo = b_lo;
                let mut n_hi = b_hi;
                if lo.row < b_lo.row {
                    n_lo.row = lo.row - GROW_MARGIN;
                }
                if lo.col < b_lo.col {
                    n_lo.col = lo.col - GROW_MARGIN;
                }
                if hi.row > b_hi.row {
                    n_hi.row = hi.row + GROW_MARGIN;
                }
                if hi.col > b_hi.col {
                    n_hi.col = hi.col + GROW_MARGIN;
                }
                (n_lo, n_hi)
            }
        };
        let rows = (new_hi.row - new_lo.row + 1) as usize;
        let cols = (new_hi.col - new_lo.col + 1) as usize;
        let mut occupancy = vec![0.0; rows * cols];
        let mut explored = vec![false; rows * cols];
        let mut semantic: BTreeMap<String, Vec<f64>> =
            self.semantic.keys().map(|k| (k.clone(), vec![0.0; rows * cols])).collect();
        for idx in 0..self.len() {
            let cell = self.cell_of(idx);
            let ni = (cell.row - new_lo.row) as usize * cols + (cell.col - new_lo.col) as usize;
            occupancy[ni] = self.occupancy[idx];
            explored[ni] = self.explored[idx];
            for (k, v) in &self.semantic {
                semantic.get_mut(k).expect("same keys")[ni] = v[idx];
            }
        }
        self.origin = new_lo;
        self.rows = rows;
        self.cols = cols;
        self.occupancy = occupancy;
        self.explored = explored;
        self.semantic = semantic;
    }

    pub fn ensure_cells<'a>(&mut self, cells: impl IntoIterator<Item = &'a Cell>) {
        let mut it = cells.into_iter();
        let Some(first) = it.next() else { return };
        let (mut lo, mut hi) = (*first, *first);
        for c in it {
            lo.row = lo.row.min(c.row);
            lo.col = lo.col.min(c.col);
            hi.row = hi.row.max(c.row);
            hi.col = hi.col.max(c.col);
        }
        self.ensure_contains(lo, hi);
    }

    pub fn occupancy(&self, cell: Cell) -> f64 {
        self.index(cell).map(|i| self.occupancy[i]).unwrap_or(0.0)
    }

    pub fn occupancy_at(&self, idx: usize) -> f64 {
        self.occupancy[idx]
    }

    pub fn is_explored(&self, cell: Cell) -> bool {
        self.index(cell).map(|i| self.explored[i]).unwrap_or(false)
    }

    pub fn explored_at(&self, idx: usize) -> bool {
        self.explored[idx]
    }

    pub fn semantic(&self, category: &str, cell: Cell) -> f64 {
        match (self.semantic.get(category), self.index(cell)) {
            (Some(ch), Some(i)) => ch[i],
            _ => 0.0,
        }
    }

    pub fn semantic_channels(&self) -> &BTreeMap<String, Vec<f64>> {
        &self.semantic
    }

    pub fn occupancy_raw(&self) -> &[f64] {
        &self.occupancy
    }

    pub fn explored_raw(&self) -> &[bool] {
        &self.explored
    }

    /// Sets stored values directly; grows as needed.
    pub fn set_cell(&mut self, cell: Cell, occupancy: f64, explored: bool) {
        self.ensure_contains(cell, cell);
        let i = self.index(cell).expect("grown");
        self.occupancy[i] = occupancy;
        self.explored[i] = explored;
    }

    pub fn set_semantic(&mut self, category: &str, cell: Cell, value: f64) {
        self.ensure_contains(cell, cell);
        let i = self.index(cell).expect("grown");
        let n = self.len();
        self.semantic.entry(category.to_owned()).or_insert_with(|| vec![0.0; n])[i] = value;
    }

    /// Adds clamped evidence to the occupancy channel and marks the cell explored.
    pub fn add_occupancy(&mut self, cell: Cell, delta: f64, l_max: f64) {
        self.ensure_contains(cell, cell);
        let i = self.index(cell).expect("grown");
        self.occupancy[i] = (self.occupancy[i] + delta).clamp(-l_max, l_max);
        self.explored[i] = true;
    }

    pub fn add_semantic(&mut self, category: &str, cell: Cell, delta: f64, l_max: f64) {
        self.ensure_contains(cell, cell);
        let i = self.index(cell).expect("grown");
        let n = self.len();
        let ch = self.semantic.entry(category.to_owned()).or_insert_with(|| vec![0.0; n]);
        ch[i] = (ch[i] + delta).clamp(-l_max, l_max);
    }

    pub fn classify(&self, cell: Cell) -> CellClass {
        match self.index(cell) {
            Some(i) => self.classify_at(i),
            None => CellClass::Unknown,
        }
    }

    pub fn classify_at(&self, idx: usize) -> CellClass {
        if !self.explored[idx] {
            CellClass::Unknown
        } else if self.occupancy[idx] > 0.0 {
            CellClass::Occupied
        } else {
            CellClass::FreeExplored
        }
    }

    pub fn explored_count(&self) -> usize {
        self.explored.iter().filter(|e| **e).count()
    }

    pub fn occupied_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.len())
            .filter(|i| self.classify_at(*i) == CellClass::Occupied)
            .map(|i| self.cell_of(i))
    }

    pub fn explored_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.len()).filter(|i| self.explored[*i]).map(|i| self.cell_of(i))
    }
}

/// Classification of a cell; see [`LogOddsMap::classify`].
pub fn classify(map: &LogOddsMap, cell: Cell) -> CellClass {
    map.classify(cell)
}
