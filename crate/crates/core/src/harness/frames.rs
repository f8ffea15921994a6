//! Private robot frames. Each robot's map lives in a frame rotated by a
//! multiple of 90 degrees and translated so its start cell is the origin;
//! cell warps between such frames are exact.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::FRAC_PI_2;

use crate::alignment::RigidTransform2D;
use crate::grid::{Cell, Pose};
use crate::gridworld::{Detection, Observation};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFrame {
    /// World to local.
    pub to_local: RigidTransform2D,
}

impl LocalFrame {
    pub fn identity() -> Self {
        Self { to_local: RigidTransform2D::identity() }
    }

    /// `quarter` turns about the world origin, then the integer shift that
    /// sends `start` to cell (0, 0).
    pub fn new(quarter: i32, start: Cell, resolution: f64) -> Self {
        let rot = RigidTransform2D::new(quarter as f64 * FRAC_PI_2, 0.0, 0.0);
        let moved = rot.warp_cell(start, resolution);
        let shift = RigidTransform2D::new(0.0, -moved.col as f64 * resolution, -moved.row as f64 * resolution);
        Self { to_local: shift.compose(&rot) }
    }

    /// Seeded quarter turn for robot `robot`.
    pub fn random(seed: u64, robot: usize, start: Cell, resolution: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0xD1B5_4A32_D192_ED03u64.wrapping_mul(robot as u64 + 1)));
        Self::new(rng.random_range(0..4), start, resolution)
    }

    pub fn cell(&self, c: Cell, resolution: f64) -> Cell {
        self.to_local.warp_cell(c, resolution)
    }

    pub fn pose(&self, p: &Pose) -> Pose {
        self.to_local.apply_pose(p)
    }

    pub fn observation(&self, obs: &Observation, resolution: f64) -> Observation {
        let mut visible: Vec<_> = obs.visible_cells.iter().map(|(c, o)| (self.cell(*c, resolution), *o)).collect();
        visible.sort_by_key(|(c, _)| *c);
        Observation {
            robot_id: obs.robot_id,
            pose: self.pose(&obs.pose),
            cell: self.cell(obs.cell, resolution),
            visible_cells: visible,
            detections: obs
                .detections
                .iter()
                .map(|d| Detection {
                    observed_cells: d.observed_cells.iter().map(|c| self.cell(*c, resolution)).collect(),
                    ..d.clone()
                })
                .collect(),
        }
    }

    /// Transform taking `src`-frame coordinates into this frame.
    pub fn relative_from(&self, src: &LocalFrame) -> RigidTransform2D {
        self.to_local.compose(&src.to_local.inverse())
    }
}
