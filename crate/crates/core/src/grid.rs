//! Cell coordinates, headings and poses shared by every layer of the simulator.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

/// Integer grid coordinate. `row` grows with `y`, `col` grows with `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub row: i32,
    pub col: i32,
}

/// 8-neighbourhood offsets as `(d_row, d_col)`, axis-aligned first.
pub const NEIGHBORS8: [(i32, i32); 8] = [
    (-1, 0),
    (1, 0),
    (0, -1),
    (0, 1),
    (-1, -1),
    (-1, 1),
    (1, -1),
    (1, 1),
];

pub const NEIGHBORS4: [(i32, i32); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];

impl Cell {
    pub const fn new(row: i32, col: i32) -> Self {
        Self { row, col }
    }

    pub fn offset(self, d_row: i32, d_col: i32) -> Self {
        Self::new(self.row + d_row, self.col + d_col)
    }

    /// Metric centre of the cell.
    pub fn center(self, resolution: f64) -> (f64, f64) {
        (
            (self.col as f64 + 0.5) * resolution,
            (self.row as f64 + 0.5) * resolution,
        )
    }

    /// Cell containing the metric point `(x, y)`.
    pub fn containing(x: f64, y: f64, resolution: f64) -> Self {
        Self::new(
            (y / resolution).floor() as i32,
            (x / resolution).floor() as i32,
        )
    }

    pub fn chebyshev(self, other: Cell) -> i32 {
        (self.row - other.row).abs().max((self.col - other.col).abs())
    }

    /// Euclidean distance between cell centres, in cells.
    pub fn euclid(self, other: Cell) -> f64 {
        let dr = (self.row - other.row) as f64;
        let dc = (self.col - other.col) as f64;
        (dr * dr + dc * dc).sqrt()
    }
}

/// Cost of one 8-connected step in cells.
pub fn step_cost(d_row: i32, d_col: i32) -> f64 {
    if d_row != 0 && d_col != 0 {
        SQRT_2
    } else {
        1.0
    }
}

/// Euclidean distance from a point to the closest point of a cell square.
pub fn point_to_cell_distance(x: f64, y: f64, cell: Cell, resolution: f64) -> f64 {
    let x0 = cell.col as f64 * resolution;
    let y0 = cell.row as f64 * resolution;
    let dx = (x0 - x).max(0.0).max(x - (x0 + resolution));
    let dy = (y0 - y).max(0.0).max(y - (y0 + resolution));
    (dx * dx + dy * dy).sqrt()
}

pub const HEADING_STEPS: u8 = 12;

/// Heading quantised to multiples of 30 degrees, counter-clockwise from +x.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Heading(u8);

// cos/sin for k * 30 degrees, exact on the axes.
const HALF_SQRT_3: f64 = 0.866_025_403_784_438_6;
const UNIT: [(f64, f64); 12] = [
    (1.0, 0.0),
    (HALF_SQRT_3, 0.5),
    (0.5, HALF_SQRT_3),
    (0.0, 1.0),
    (-0.5, HALF_SQRT_3),
    (-HALF_SQRT_3, 0.5),
    (-1.0, 0.0),
    (-HALF_SQRT_3, -0.5),
    (-0.5, -HALF_SQRT_3),
    (0.0, -1.0),
    (0.5, -HALF_SQRT_3),
    (HALF_SQRT_3, -0.5),
];

impl Heading {
    pub fn new(steps: i32) -> Self {
        Self(steps.rem_euclid(HEADING_STEPS as i32) as u8)
    }

    /// Parses a heading given in degrees; must be a multiple of 30.
    pub fn from_degrees(deg: i64) -> Option<Self> {
        if deg % 30 != 0 {
            return None;
        }
        Some(Self::new((deg / 30) as i32))
    }

    pub fn steps(self) -> u8 {
        self.0
    }

    pub fn degrees(self) -> i64 {
        self.0 as i64 * 30
    }

    pub fn radians(self) -> f64 {
        self.0 as f64 * PI / 6.0
    }

    pub fn unit(self) -> (f64, f64) {
        UNIT[self.0 as usize]
    }

    pub fn rotated(self, steps: i32) -> Self {
        Self::new(self.0 as i32 + steps)
    }
}

/// Continuous robot pose in some frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading: Heading,
}

impl Pose {
    pub fn new(x: f64, y: f64, heading: Heading) -> Self {
        Self { x, y, heading }
    }

    pub fn at_cell(cell: Cell, resolution: f64, heading: Heading) -> Self {
        let (x, y) = cell.center(resolution);
        Self { x, y, heading }
    }

    pub fn cell(&self, resolution: f64) -> Cell {
        Cell::containing(self.x, self.y, resolution)
    }

    pub fn distance_to(&self, other: &Pose) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut a = a.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Cells crossed by the segment between two cell centres (supercover walk).
pub fn line_cells(from: Cell, to: Cell) -> Vec<Cell> {
    let mut out = vec![from];
    if from == to {
        return out;
    }
    let (dx, dy) = ((to.col - from.col) as f64, (to.row - from.row) as f64);
    let mut cell = from;
    let step_c = dx.signum() as i32;
    let step_r = dy.signum() as i32;
    let t_delta_x = if dx != 0.0 { 1.0 / dx.abs() } else { f64::INFINITY };
    let t_delta_y = if dy != 0.0 { 1.0 / dy.abs() } else { f64::INFINITY };
    let mut t_max_x = if dx != 0.0 { 0.5 / dx.abs() } else { f64::INFINITY };
    let mut t_max_y = if dy != 0.0 { 0.5 / dy.abs() } else { f64::INFINITY };
    while cell != to {
        if (t_max_x - t_max_y).abs() < 1e-12 {
            // Passing exactly through a corner touches both side cells.
            out.push(cell.offset(0, step_c));
            out.push(cell.offset(step_r, 0));
            cell = cell.offset(step_r, step_c);
            t_max_x += t_delta_x;
            t_max_y += t_delta_y;
        } else if t_max_x < t_max_y {
            cell = cell.offset(0, step_c);
            t_max_x += t_delta_x;
        } else {
            cell = cell.offset(step_r, 0);
            t_max_y += t_delta_y;
        }
        out.push(cell);
    }
    out
}
