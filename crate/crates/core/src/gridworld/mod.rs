//! Ground-truth scenes, episodes, robot kinematics and the observation model.

mod episode;
mod geodesic;
mod kinematics;
mod scene;
mod sensor;

use thiserror::Error;

use crate::grid::Cell;

pub use episode::{load_episode, Episode, EpisodeFile, GoalId, GoalSpec, Modality};
pub use geodesic::{distance_field, geodesic_distance};
pub use kinematics::{step_agent, Action, StepOutcome, FORWARD_STEP_M};
pub use scene::{centroid_of, load_scene, GridScene, InstanceFile, ObjectInstance, Occupancy, SceneFile, DEFAULT_RESOLUTION};
pub use sensor::{
    observe, visible_cells, Detection, DetectionNoise, DetectionOracle, NoiseProfile, Observation, ObservationStream,
    RobotId, SensorConfig,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SceneError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("invalid cell ({}, {})", .0.row, .0.col)]
    InvalidCell(Cell),
}
