//! Corner and landmark correspondences between two occupancy maps.

use serde::{Deserialize, Serialize};

use super::{AlignError, AlignmentConfig};
use crate::grid::{Cell, NEIGHBORS4, NEIGHBORS8};
use crate::mapping::{CellClass, InstanceRegistry, LogOddsMap};

pub const DESCRIPTOR_BINS: usize = 8;
pub const DESCRIPTOR_ANNULUS: i32 = 2;
pub const DESCRIPTOR_RADIUS: i32 = DESCRIPTOR_BINS as i32 * DESCRIPTOR_ANNULUS;

/// Occupied fraction per concentric annulus, innermost first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialDescriptor {
    pub histogram: [f64; DESCRIPTOR_BINS],
}

/// `(bin, d_row, d_col)` for every offset inside the descriptor disc.
fn disc_offsets() -> &'static [(usize, i32, i32)] {
    use std::sync::OnceLock;
    static OFFSETS: OnceLock<Vec<(usize, i32, i32)>> = OnceLock::new();
    OFFSETS.get_or_init(|| {
        let mut v = Vec::new();
        for dr in -DESCRIPTOR_RADIUS..=DESCRIPTOR_RADIUS {
            for dc in -DESCRIPTOR_RADIUS..=DESCRIPTOR_RADIUS {
                let d2 = dr * dr + dc * dc;
                if d2 >= DESCRIPTOR_RADIUS * DESCRIPTOR_RADIUS {
                    continue;
                }
                // floor(sqrt(d2) / width) without floating point.
                let mut bin = 0;
                while ((bin + 1) * DESCRIPTOR_ANNULUS) * ((bin + 1) * DESCRIPTOR_ANNULUS) <= d2 {
                    bin += 1;
                }
                v.push((bin as usize, dr, dc));
            }
        }
        v
    })
}

fn annulus_sizes() -> [usize; DESCRIPTOR_BINS] {
    let mut n = [0; DESCRIPTOR_BINS];
    for (b, _, _) in disc_offsets() {
        n[*b] += 1;
    }
    n
}

impl RadialDescriptor {
    pub fn compute(map: &LogOddsMap, center: Cell) -> Self {
        let mut counts = [0usize; DESCRIPTOR_BINS];
        for &(b, dr, dc) in disc_offsets() {
            if map.classify(center.offset(dr, dc)) == CellClass::Occupied {
                counts[b] += 1;
            }
        }
        let sizes = annulus_sizes();
        let mut histogram = [0.0; DESCRIPTOR_BINS];
        for b in 0..DESCRIPTOR_BINS {
            histogram[b] = counts[b] as f64 / sizes[b] as f64;
        }
        Self { histogram }
    }

    /// L1 distance.
    pub fn distance(&self, other: &Self) -> f64 {
        self.histogram.iter().zip(&other.histogram).map(|(a, b)| (a - b).abs()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateSource {
    Corner,
    Landmark,
}

/// A putative correspondence `a` (frame A) <-> `b` (frame B), metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointPair {
    pub a: (f64, f64),
    pub b: (f64, f64),
    pub descriptor_distance: f64,
    pub source: CandidateSource,
}

fn occupied_image(map: &LogOddsMap) -> Vec<bool> {
    (0..map.len()).map(|i| map.classify_at(i) == CellClass::Occupied).collect()
}

/// Integer Harris response scaled by 25 (k = 0.04), indexed like the map.
pub fn harris_response(map: &LogOddsMap) -> Vec<i64> {
    let rows = map.rows() as i32;
    let cols = map.cols() as i32;
    let occ = occupied_image(map);
    let px = |r: i32, c: i32| -> i64 {
        if r < 0 || c < 0 || r >= rows || c >= cols {
            0
        } else {
            occ[(r * cols + c) as usize] as i64
        }
    };
    let n = map.len();
    let mut ixx = vec![0i64; n];
    let mut iyy = vec![0i64; n];
    let mut ixy = vec![0i64; n];
    for r in 0..rows {
        for c in 0..cols {
            let gx = (px(r - 1, c + 1) + 2 * px(r, c + 1) + px(r + 1, c + 1))
                - (px(r - 1, c - 1) + 2 * px(r, c - 1) + px(r + 1, c - 1));
            let gy = (px(r + 1, c - 1) + 2 * px(r + 1, c) + px(r + 1, c + 1))
                - (px(r - 1, c - 1) + 2 * px(r - 1, c) + px(r - 1, c + 1));
            let i = (r * cols + c) as usize;
            ixx[i] = gx * gx;
            iyy[i] = gy * gy;
            ixy[i] = gx * gy;
        }
    }
    let mut out = vec![0i64; n];
    for r in 0..rows {
        for c in 0..cols {
            let (mut sxx, mut syy, mut sxy) = (0, 0, 0);
            for dr in -1..=1 {
                for dc in -1..=1 {
                    let (rr, cc) = (r + dr, c + dc);
                    if rr < 0 || cc < 0 || rr >= rows || cc >= cols {
                        continue;
                    }
                    let j = (rr * cols + cc) as usize;
                    sxx += ixx[j];
                    syy += iyy[j];
                    sxy += ixy[j];
                }
            }
            let tr = sxx + syy;
            out[(r * cols + c) as usize] = 25 * (sxx * syy - sxy * sxy) - tr * tr;
        }
    }
    out
}

/// Occupied cells with a non-occupied 4-neighbour, and unobserved cells
/// closing an L of occupied 4-neighbours (room corners rays never reach).
fn is_boundary(map: &LogOddsMap, cell: Cell) -> bool {
    let occ = |dr: i32, dc: i32| map.classify(cell.offset(dr, dc)) == CellClass::Occupied;
    match map.classify(cell) {
        CellClass::Occupied => NEIGHBORS4.iter().any(|(dr, dc)| !occ(*dr, *dc)),
        CellClass::Unknown => (occ(-1, 0) || occ(1, 0)) && (occ(0, -1) || occ(0, 1)),
        _ => false,
    }
}

/// Corner cells on the occupied boundary, sorted by cell. Thresholding and
/// suppression consider boundary cells only.
pub fn detect_corners(map: &LogOddsMap, cfg: &AlignmentConfig) -> Vec<Cell> {
    let resp = harris_response(map);
    let eligible: Vec<bool> = (0..map.len()).map(|i| is_boundary(map, map.cell_of(i))).collect();
    let max = (0..map.len()).filter(|i| eligible[*i]).map(|i| resp[i]).max().unwrap_or(0);
    if max <= 0 {
        return Vec::new();
    }
    let mut corners = Vec::new();
    for idx in 0..map.len() {
        let r = resp[idx];
        if !eligible[idx] || r <= 0 || (r as f64) < cfg.corner_rel_threshold * max as f64 {
            continue;
        }
        let cell = map.cell_of(idx);
        // Plateaus survive so the detector commutes with quarter turns.
        let is_peak = NEIGHBORS8.iter().all(|(dr, dc)| match map.index(cell.offset(*dr, *dc)) {
            Some(j) => !eligible[j] || resp[j] <= r,
            None => true,
        });
        if is_peak {
            corners.push(cell);
        }
    }
    corners.sort();
    corners
}

fn cmp_pairs(x: &(f64, Cell, Cell), y: &(f64, Cell, Cell)) -> std::cmp::Ordering {
    x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2))
}

/// Corner correspondences ranked by descriptor distance.
pub fn corner_candidates(a: &LogOddsMap, b: &LogOddsMap, cfg: &AlignmentConfig) -> Result<Vec<PointPair>, AlignError> {
    let ca = detect_corners(a, cfg);
    let cb = detect_corners(b, cfg);
    if ca.len() < 3 || cb.len() < 3 {
        return Err(AlignError::NoFeatures);
    }
    let da: Vec<RadialDescriptor> = ca.iter().map(|c| RadialDescriptor::compute(a, *c)).collect();
    let db: Vec<RadialDescriptor> = cb.iter().map(|c| RadialDescriptor::compute(b, *c)).collect();
    let mut pool: Vec<(f64, Cell, Cell)> = Vec::new();
    for (i, pa) in ca.iter().enumerate() {
        let mut row: Vec<(f64, Cell, Cell)> =
            cb.iter().enumerate().map(|(j, pb)| (da[i].distance(&db[j]), *pa, *pb)).collect();
        row.sort_by(cmp_pairs);
        pool.extend(row.into_iter().take(cfg.top_k));
    }
    pool.sort_by(cmp_pairs);
    pool.truncate(cfg.c_max);
    Ok(pool
        .into_iter()
        .map(|(d, pa, pb)| PointPair {
            a: pa.center(a.resolution),
            b: pb.center(b.resolution),
            descriptor_distance: d,
            source: CandidateSource::Corner,
        })
        .collect())
}

/// Same-category centroid pairs whose surrounding obstacle structure agrees.
pub fn landmark_candidates(
    reg_a: &InstanceRegistry,
    reg_b: &InstanceRegistry,
    a: &LogOddsMap,
    b: &LogOddsMap,
    cfg: &AlignmentConfig,
) -> Vec<PointPair> {
    let mut out = Vec::new();
    for ra in reg_a.records.iter().filter(|r| !r.cells.is_empty()) {
        let ca = Cell::containing(ra.centroid.0, ra.centroid.1, a.resolution);
        let da = RadialDescriptor::compute(a, ca);
        for rb in reg_b.records.iter().filter(|r| r.category == ra.category && !r.cells.is_empty()) {
            let cb = Cell::containing(rb.centroid.0, rb.centroid.1, b.resolution);
            let d = da.distance(&RadialDescriptor::compute(b, cb));
            if d <= cfg.d_max {
                out.push(PointPair {
                    a: ra.centroid,
                    b: rb.centroid,
                    descriptor_distance: d,
                    source: CandidateSource::Landmark,
                });
            }
        }
    }
    out
}
