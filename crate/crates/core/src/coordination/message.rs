use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::grid::{Cell, Pose};
use crate::gridworld::{GoalId, RobotId};
use crate::mapping::MapSnapshot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntentTarget {
    Goal(GoalId),
    /// Frontier representative in the sender's frame.
    ExploreFrontier(Cell),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intent {
    pub target: IntentTarget,
    /// In `[0, 1]`.
    pub score: f64,
    /// Unique per robot; lower ranks higher.
    pub priority: u32,
}

impl Intent {
    pub fn goal(&self) -> Option<GoalId> {
        match self.target {
            IntentTarget::Goal(g) => Some(g),
            IntentTarget::ExploreFrontier(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageKind {
    FullMap,
    Location,
    GoalStatus,
    Intent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Message {
    FullMap { sender: RobotId, snapshot: Box<MapSnapshot> },
    /// Pose in the sender's frame.
    Location { sender: RobotId, pose: Pose },
    GoalStatus { sender: RobotId, completed: BTreeSet<GoalId> },
    Intent { sender: RobotId, intent: Intent },
}

impl Message {
    pub fn sender(&self) -> RobotId {
        match self {
            Message::FullMap { sender, .. }
            | Message::Location { sender, .. }
            | Message::GoalStatus { sender, .. }
            | Message::Intent { sender, .. } => *sender,
        }
    }

    pub fn kind(&self) -> MessageKind {
        match self {
            Message::FullMap { .. } => MessageKind::FullMap,
            Message::Location { .. } => MessageKind::Location,
            Message::GoalStatus { .. } => MessageKind::GoalStatus,
            Message::Intent { .. } => MessageKind::Intent,
        }
    }

    /// Approximate wire size in bytes.
    pub fn payload_bytes(&self) -> usize {
        match self {
            Message::FullMap { snapshot, .. } => snapshot.payload_bytes(),
            Message::Location { .. } => 24,
            Message::GoalStatus { completed, .. } => 4 * completed.len(),
            Message::Intent { .. } => 24,
        }
    }
}

/// A message in flight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub receiver: RobotId,
    pub sent_step: u32,
    pub message: Message,
}
