use serde::{Deserialize, Serialize};

use super::GridScene;
use crate::grid::Pose;

/// Length of one `Forward` action in metres.
pub const FORWARD_STEP_M: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Forward,
    TurnLeft,
    TurnRight,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub pose: Pose,
    pub blocked: bool,
    /// Metres translated by this action.
    pub travelled: f64,
}

/// Applies one discrete action. Collisions leave the pose unchanged.
pub fn step_agent(scene: &GridScene, pose: Pose, action: Action) -> StepOutcome {
    match action {
        Action::Forward => {
            let (ux, uy) = pose.heading.unit();
            let next = Pose::new(
                pose.x + FORWARD_STEP_M * ux,
                pose.y + FORWARD_STEP_M * uy,
                pose.heading,
            );
            if scene.is_free(next.cell(scene.resolution)) {
                StepOutcome {
                    pose: next,
                    blocked: false,
                    travelled: FORWARD_STEP_M,
                }
            } else {
                StepOutcome {
                    pose,
                    blocked: true,
                    travelled: 0.0,
                }
            }
        }
        // Rows grow downward, so increasing heading turns clockwise on screen.
        Action::TurnLeft => turned(pose, -1),
        Action::TurnRight => turned(pose, 1),
        Action::Stop => turned(pose, 0),
    }
}

fn turned(pose: Pose, steps: i32) -> StepOutcome {
    StepOutcome {
        pose: Pose::new(pose.x, pose.y, pose.heading.rotated(steps)),
        blocked: false,
        travelled: 0.0,
    }
}
