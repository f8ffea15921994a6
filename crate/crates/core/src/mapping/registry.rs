use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::grid::Cell;
use crate::gridworld::centroid_of;

/// Geometric stand-in for an instance-memory entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub local_id: u32,
    pub category: String,
    pub cells: BTreeSet<Cell>,
    /// Metres, local frame.
    pub centroid: (f64, f64),
    pub best_score: f64,
    pub observation_count: u32,
    /// Oracle identities of the detections fused into this record (negative = spurious).
    pub source_ids: BTreeSet<i64>,
}

impl InstanceRecord {
    /// True if any fused detection came from a real instance in `valid`.
    pub fn matches_any(&self, valid: &BTreeSet<i64>) -> bool {
        self.source_ids.iter().any(|id| *id >= 0 && valid.contains(id))
    }

    pub fn is_spurious(&self) -> bool {
        self.source_ids.iter().all(|id| *id < 0)
    }
}

/// Per-robot list of instance records.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InstanceRegistry {
    pub records: Vec<InstanceRecord>,
    next_id: u32,
}

impl InstanceRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, local_id: u32) -> Option<&InstanceRecord> {
        self.records.iter().find(|r| r.local_id == local_id)
    }

    /// Fuses an observation into the closest same-category record within
    /// `r_assoc` metres of its centroid, or starts a new record.
    pub fn fuse(
        &mut self,
        category: &str,
        cells: impl IntoIterator<Item = Cell>,
        score: f64,
        source_ids: impl IntoIterator<Item = i64>,
        observations: u32,
        resolution: f64,
        r_assoc: f64,
    ) -> u32 {
        let cells: BTreeSet<Cell> = cells.into_iter().collect();
        if cells.is_empty() {
            return u32::MAX;
        }
        let centroid = centroid_of(cells.iter().copied(), resolution);
        let best = self
            .records
            .iter_mut()
            .filter(|r| r.category == category)
            .map(|r| {
                let d = (r.centroid.0 - centroid.0).hypot(r.centroid.1 - centroid.1);
                (d, r)
            })
            .filter(|(d, _)| *d <= r_assoc)
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.local_id.cmp(&b.1.local_id)));
        match best {
            Some((_, rec)) => {
                rec.cells.extend(cells);
                rec.centroid = centroid_of(rec.cells.iter().copied(), resolution);
                rec.best_score = rec.best_score.max(score);
                rec.observation_count = rec.observation_count.saturating_add(observations);
                rec.source_ids.extend(source_ids);
                rec.local_id
            }
            None => {
                let id = self.next_id;
                self.next_id += 1;
                self.records.push(InstanceRecord {
                    local_id: id,
                    category: category.to_owned(),
                    cells,
                    centroid,
                    best_score: score.clamp(0.0, 1.0),
                    observation_count: observations,
                    source_ids: source_ids.into_iter().collect(),
                });
                id
            }
        }
    }
}
