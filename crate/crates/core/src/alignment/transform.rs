use serde::{Deserialize, Serialize};

use crate::grid::{wrap_angle, Cell, Pose};

/// Planar rigid motion `p -> R(theta) p + t`, metres and radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidTransform2D {
    pub theta: f64,
    pub tx: f64,
    pub ty: f64,
}

impl Default for RigidTransform2D {
    fn default() -> Self {
        Self::identity()
    }
}

impl RigidTransform2D {
    pub const fn identity() -> Self {
        Self { theta: 0.0, tx: 0.0, ty: 0.0 }
    }

    pub fn new(theta: f64, tx: f64, ty: f64) -> Self {
        Self { theta: wrap_angle(theta), tx, ty }
    }

    /// Exact cos/sin for multiples of 90 degrees.
    fn cos_sin(&self) -> (f64, f64) {
        let quarter = self.theta / std::f64::consts::FRAC_PI_2;
        if (quarter - quarter.round()).abs() < 1e-12 {
            match (quarter.round() as i64).rem_euclid(4) {
                0 => (1.0, 0.0),
                1 => (0.0, 1.0),
                2 => (-1.0, 0.0),
                _ => (0.0, -1.0),
            }
        } else {
            (self.theta.cos(), self.theta.sin())
        }
    }

    pub fn apply(&self, p: (f64, f64)) -> (f64, f64) {
        let (c, s) = self.cos_sin();
        (c * p.0 - s * p.1 + self.tx, s * p.0 + c * p.1 + self.ty)
    }

    /// Rotation only.
    pub fn rotate(&self, v: (f64, f64)) -> (f64, f64) {
        let (c, s) = self.cos_sin();
        (c * v.0 - s * v.1, s * v.0 + c * v.1)
    }

    pub fn inverse(&self) -> Self {
        let inv_rot = Self { theta: -self.theta, tx: 0.0, ty: 0.0 };
        let (tx, ty) = inv_rot.rotate((self.tx, self.ty));
        Self { theta: wrap_angle(-self.theta), tx: -tx, ty: -ty }
    }

    /// `self` after `first`: `p -> self(first(p))`.
    pub fn compose(&self, first: &Self) -> Self {
        let (tx, ty) = self.apply((first.tx, first.ty));
        Self { theta: wrap_angle(self.theta + first.theta), tx, ty }
    }

    /// Nearest cell to the warped centre of `cell`.
    pub fn warp_cell(&self, cell: Cell, resolution: f64) -> Cell {
        let (x, y) = self.apply(cell.center(resolution));
        Cell::containing(x, y, resolution)
    }

    /// Warps a pose. Headings snap to the nearest 30 degree step.
    pub fn apply_pose(&self, pose: &Pose) -> Pose {
        let (x, y) = self.apply((pose.x, pose.y));
        let steps = (self.theta / (std::f64::consts::PI / 6.0)).round() as i32;
        Pose::new(x, y, pose.heading.rotated(steps))
    }

    pub fn rotation_error(&self, other: &Self) -> f64 {
        wrap_angle(self.theta - other.theta).abs()
    }

    pub fn translation_error(&self, other: &Self) -> f64 {
        (self.tx - other.tx).hypot(self.ty - other.ty)
    }

    pub fn is_finite(&self) -> bool {
        self.theta.is_finite() && self.tx.is_finite() && self.ty.is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn inverse_round_trips(theta in -7.0f64..7.0, tx in -50.0f64..50.0, ty in -50.0f64..50.0,
                               px in -20.0f64..20.0, py in -20.0f64..20.0) {
            let t = RigidTransform2D::new(theta, tx, ty);
            let q = t.inverse().apply(t.apply((px, py)));
            prop_assert!((q.0 - px).abs() < 1e-9 && (q.1 - py).abs() < 1e-9);
            let id = t.inverse().compose(&t);
            prop_assert!(id.theta.abs() < 1e-9 || (id.theta.abs() - 2.0 * std::f64::consts::PI).abs() < 1e-9);
            prop_assert!(id.tx.abs() < 1e-9 && id.ty.abs() < 1e-9);
        }
    }

    #[test]
    fn quarter_turns_warp_cells_exactly() {
        let t = RigidTransform2D::new(std::f64::consts::FRAC_PI_2, 1.0, -0.5);
        let c = Cell::new(3, 7);
        let w = t.warp_cell(c, 0.25);
        assert_eq!(t.inverse().warp_cell(w, 0.25), c);
    }
}
