//! Private per-robot log-odds maps, the instance registry, frontier
//! extraction and grid planning.

mod frontier;
mod integrate;
mod logodds;
mod planner;
mod registry;
pub mod snapshot;

pub use frontier::{extract_frontiers, is_frontier_cell, Frontier, DEFAULT_MIN_FRONTIER};
pub use integrate::{integrate_observation, DEFAULT_ASSOC_RADIUS};
pub use logodds::{classify, CellClass, LogOddsMap, LogOddsParams};
pub use planner::{cost_field, plan_path, plan_path_at, InflatedGrid, PlannedPath, PlannerConfig};
pub use registry::{InstanceRecord, InstanceRegistry};
pub use snapshot::{decode_snapshot, encode_snapshot, MapSnapshot};
