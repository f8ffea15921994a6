use super::{AlignmentConfig, RigidTransform2D};
use crate::grid::Cell;
use crate::mapping::{CellClass, InstanceRegistry, LogOddsMap};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Validation {
    pub iou: f64,
    /// Cells of A explored in both maps.
    pub overlap: usize,
    pub accepted: bool,
}

/// Obstacle IoU over the jointly explored region after warping B into A.
pub fn validate_alignment(a: &LogOddsMap, b: &LogOddsMap, t: &RigidTransform2D, cfg: &AlignmentConfig) -> Validation {
    let mut warped: Vec<Option<bool>> = vec![None; a.len()];
    if t.is_finite() {
        for idx in 0..b.len() {
            if !b.explored_at(idx) {
                continue;
            }
            let target = t.warp_cell(b.cell_of(idx), b.resolution);
            if let Some(ai) = a.index(target) {
                if a.explored_at(ai) {
                    let occ = b.classify_at(idx) == CellClass::Occupied;
                    let slot = warped[ai].get_or_insert(false);
                    *slot |= occ;
                }
            }
        }
    }
    let (mut overlap, mut inter, mut union) = (0usize, 0usize, 0usize);
    for (ai, w) in warped.iter().enumerate() {
        let Some(occ_b) = *w else { continue };
        overlap += 1;
        let occ_a = a.classify_at(ai) == CellClass::Occupied;
        inter += (occ_a && occ_b) as usize;
        union += (occ_a || occ_b) as usize;
    }
    let iou = if union == 0 { 0.0 } else { inter as f64 / union as f64 };
    Validation {
        iou,
        overlap,
        accepted: iou >= cfg.iou_min && overlap >= cfg.a_min,
    }
}

fn abs_max(dst: f64, src: f64) -> f64 {
    if src.abs() > dst.abs() {
        src
    } else {
        dst
    }
}

/// Folds `src` into `dst` through `t` (src frame to dst frame), keeping the
/// value of larger magnitude per cell and channel.
pub fn merge_maps(dst: &mut LogOddsMap, src: &LogOddsMap, t: &RigidTransform2D) {
    let carrying: Vec<(usize, Cell)> = (0..src.len())
        .filter(|&i| src.explored_at(i) || src.occupancy_at(i) != 0.0)
        .map(|i| (i, t.warp_cell(src.cell_of(i), src.resolution)))
        .collect();
    dst.ensure_cells(carrying.iter().map(|(_, c)| c));
    for &(si, cell) in &carrying {
        let merged = abs_max(dst.occupancy(cell), src.occupancy_at(si));
        let explored = dst.is_explored(cell) || src.explored_at(si);
        dst.set_cell(cell, merged, explored);
    }
    for (category, values) in src.semantic_channels() {
        for (si, v) in values.iter().enumerate() {
            if *v == 0.0 {
                continue;
            }
            let cell = t.warp_cell(src.cell_of(si), src.resolution);
            dst.ensure_contains(cell, cell);
            let merged = abs_max(dst.semantic(category, cell), *v);
            dst.set_semantic(category, cell, merged);
        }
    }
}

/// Re-expresses `src` records in dst's frame and fuses them.
pub fn merge_registries(
    dst: &mut InstanceRegistry,
    src: &InstanceRegistry,
    t: &RigidTransform2D,
    resolution: f64,
    r_assoc: f64,
) {
    for rec in &src.records {
        let cells: Vec<Cell> = rec.cells.iter().map(|c| t.warp_cell(*c, resolution)).collect();
        dst.fuse(
            &rec.category,
            cells,
            rec.best_score,
            rec.source_ids.iter().copied(),
            rec.observation_count,
            resolution,
            r_assoc,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(v: f64, explored: bool) -> LogOddsMap {
        let mut m = LogOddsMap::new(0, 0.25);
        m.set_cell(Cell::new(0, 0), v, explored);
        m
    }

    #[test]
    fn stronger_evidence_wins() {
        let id = RigidTransform2D::identity();
        for (d, s, want) in [(2.0, -0.5, 2.0), (-0.5, 2.0, 2.0)] {
            let mut dst = single(d, true);
            merge_maps(&mut dst, &single(s, true), &id);
            assert_eq!(dst.occupancy(Cell::new(0, 0)), want);
        }
        let mut dst = single(0.0, false);
        merge_maps(&mut dst, &single(-3.0, true), &id);
        assert_eq!(dst.occupancy(Cell::new(0, 0)), -3.0);
        assert!(dst.is_explored(Cell::new(0, 0)));
    }

    #[test]
    fn ties_keep_destination() {
        let mut dst = single(1.5, true);
        merge_maps(&mut dst, &single(-1.5, true), &RigidTransform2D::identity());
        assert_eq!(dst.occupancy(Cell::new(0, 0)), 1.5);
    }
}
