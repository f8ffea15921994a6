//! Frame-to-frame alignment of two robots' maps, validation, caching and the
//! abs-max merge.

mod features;
mod merge;
mod ransac;
mod transform;

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use features::{
    corner_candidates, detect_corners, harris_response, landmark_candidates, CandidateSource, PointPair,
    RadialDescriptor, DESCRIPTOR_ANNULUS, DESCRIPTOR_BINS, DESCRIPTOR_RADIUS,
};
pub use merge::{merge_maps, merge_registries, validate_alignment, Validation};
pub use ransac::{estimate_transform, fit_rigid, TransformEstimate};
pub use transform::RigidTransform2D;

use crate::gridworld::RobotId;
use crate::mapping::{InstanceRegistry, LogOddsMap};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignmentConfig {
    /// Harris response floor relative to the strongest response.
    pub corner_rel_threshold: f64,
    /// Nearest B corners kept per A corner.
    pub top_k: usize,
    pub c_max: usize,
    /// Landmark descriptor distance ceiling (L1).
    pub d_max: f64,
    pub ransac_iterations: usize,
    /// Inlier residual in multiples of the map resolution.
    pub eps_in_cells: f64,
    pub k_min: usize,
    pub iou_min: f64,
    pub a_min: usize,
}

impl Default for AlignmentConfig {
    fn default() -> Self {
        Self {
            corner_rel_threshold: 0.05,
            top_k: 3,
            c_max: 150,
            d_max: 0.75,
            ransac_iterations: 500,
            eps_in_cells: 1.5,
            k_min: 4,
            iou_min: 0.9,
            a_min: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AlignError {
    #[error("fewer than three corners in one of the maps")]
    NoFeatures,
    #[error("{0} candidate pairs, need at least two")]
    InsufficientCandidates(usize),
    #[error("best consensus {best_consensus} below the inlier minimum")]
    Failure { best_consensus: usize },
}

/// Outcome of one alignment attempt; `transform` maps B's frame into A's.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentResult {
    pub transform: RigidTransform2D,
    pub inlier_count: usize,
    pub iou: f64,
    pub overlap: usize,
    pub accepted: bool,
}

impl AlignmentResult {
    pub fn to_debug_json(&self) -> serde_json::Value {
        serde_json::json!({
            "theta": self.transform.theta,
            "t": [self.transform.tx, self.transform.ty],
            "iou": self.iou,
            "inliers": self.inlier_count,
            "overlap": self.overlap,
            "accepted": self.accepted,
        })
    }
}

/// Full pipeline: candidates, robust estimate, IoU gate.
pub fn align_maps<R: Rng + ?Sized>(
    a: &LogOddsMap,
    reg_a: &InstanceRegistry,
    b: &LogOddsMap,
    reg_b: &InstanceRegistry,
    cfg: &AlignmentConfig,
    rng: &mut R,
) -> Result<AlignmentResult, AlignError> {
    let mut cands = corner_candidates(a, b, cfg)?;
    cands.extend(landmark_candidates(reg_a, reg_b, a, b, cfg));
    let est = estimate_transform(&cands, cfg.ransac_iterations, cfg.eps_in_cells * a.resolution, cfg.k_min, rng)?;
    let (transform, v) = snap_translation(a, b, &est.transform, cfg);
    Ok(AlignmentResult {
        transform,
        inlier_count: est.inliers.len(),
        iou: v.iou,
        overlap: v.overlap,
        accepted: v.accepted && est.inliers.len() >= cfg.k_min,
    })
}

/// Best of the one-cell translation offsets: sub-cell error can shift thin
/// walls by a cell in the warp.
fn snap_translation(
    a: &LogOddsMap,
    b: &LogOddsMap,
    t: &RigidTransform2D,
    cfg: &AlignmentConfig,
) -> (RigidTransform2D, Validation) {
    const OFFSETS: [(i32, i32); 9] = [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];
    let res = a.resolution;
    let mut best = (*t, validate_alignment(a, b, t, cfg));
    for &(dx, dy) in &OFFSETS[1..] {
        let cand = RigidTransform2D { tx: t.tx + dx as f64 * res, ty: t.ty + dy as f64 * res, ..*t };
        let v = validate_alignment(a, b, &cand, cfg);
        if v.iou > best.1.iou {
            best = (cand, v);
        }
    }
    best
}

/// Accepted alignments held by one robot, each mapping a peer's frame into
/// the owner's.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TransformCache {
    pub owner: RobotId,
    entries: BTreeMap<(RobotId, RobotId), AlignmentResult>,
    /// Number of robust estimations run through this cache.
    pub estimate_calls: u64,
}

fn pair_key(a: RobotId, b: RobotId) -> (RobotId, RobotId) {
    (a.min(b), a.max(b))
}

impl TransformCache {
    pub fn new(owner: RobotId) -> Self {
        Self { owner, entries: BTreeMap::new(), estimate_calls: 0 }
    }

    pub fn get(&self, peer: RobotId) -> Option<&AlignmentResult> {
        self.entries.get(&pair_key(self.owner, peer))
    }

    pub fn transform_from(&self, peer: RobotId) -> Option<RigidTransform2D> {
        if peer == self.owner {
            return Some(RigidTransform2D::identity());
        }
        self.get(peer).map(|r| r.transform)
    }

    /// Stores accepted results only; returns whether it was stored.
    pub fn insert(&mut self, peer: RobotId, result: AlignmentResult) -> bool {
        if !result.accepted {
            return false;
        }
        self.entries.insert(pair_key(self.owner, peer), result);
        true
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(RobotId, RobotId), &AlignmentResult)> {
        self.entries.iter()
    }

    /// Cached transform if present, else a fresh estimate that is cached on
    /// acceptance.
    #[allow(clippy::too_many_arguments)]
    pub fn align_with<R: Rng + ?Sized>(
        &mut self,
        peer: RobotId,
        own: &LogOddsMap,
        own_reg: &InstanceRegistry,
        peer_map: &LogOddsMap,
        peer_reg: &InstanceRegistry,
        cfg: &AlignmentConfig,
        rng: &mut R,
    ) -> Result<AlignmentResult, AlignError> {
        if let Some(hit) = self.get(peer) {
            return Ok(hit.clone());
        }
        self.estimate_calls += 1;
        let result = align_maps(own, own_reg, peer_map, peer_reg, cfg, rng)?;
        self.insert(peer, result.clone());
        Ok(result)
    }
}
