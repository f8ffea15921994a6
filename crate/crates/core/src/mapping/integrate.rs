use super::{InstanceRegistry, LogOddsMap, LogOddsParams};
use crate::gridworld::{Observation, Occupancy};

/// Default association radius for registry fusion, metres.
pub const DEFAULT_ASSOC_RADIUS: f64 = 0.5;

/// Folds one observation (already in the map's frame) into the map and registry.
pub fn integrate_observation(
    map: &mut LogOddsMap,
    registry: &mut InstanceRegistry,
    obs: &Observation,
    params: &LogOddsParams,
    r_assoc: f64,
) {
    map.ensure_cells(obs.visible_cells.iter().map(|(c, _)| c).chain(std::iter::once(&obs.cell)));
    for (cell, occ) in &obs.visible_cells {
        let delta = match occ {
            Occupancy::Obstacle => params.occ_hit,
            Occupancy::Free => -params.free_miss,
        };
        map.add_occupancy(*cell, delta, params.l_max);
    }
    for det in &obs.detections {
        for cell in &det.observed_cells {
            // Detection cells are a subset of visible cells, hence explored.
            if map.is_explored(*cell) {
                map.add_semantic(&det.category, *cell, params.sem_hit, params.l_max);
            }
        }
        registry.fuse(
            &det.category,
            det.observed_cells.iter().copied(),
            det.score,
            [det.instance_id],
            1,
            map.resolution,
            r_assoc,
        );
    }
}
