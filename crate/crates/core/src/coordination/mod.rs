//! Range-limited pairwise exchange, intent deconfliction and frontier
//! weighting.

mod message;
mod protocol;
mod selection;

use serde::{Deserialize, Serialize};

pub use message::{Envelope, Intent, IntentTarget, Message, MessageKind};
pub use protocol::{resolve_intent, ApplyOutcome, CoordinationState, Outgoing, PeerState, Resolution};
pub use selection::{distance_to_frontier, frontier_weight, select_by_distances, select_frontier, FrontierChoice};

use crate::grid::Pose;
use crate::gridworld::RobotId;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommConfig {
    /// Radio range, metres.
    pub r_comm: f64,
    /// Minimum steps between full maps to the same neighbour.
    pub tau: u32,
}

impl Default for CommConfig {
    fn default() -> Self {
        Self { r_comm: 5.0, tau: 10 }
    }
}

/// Adjacency lists (ascending) of the range graph over world positions.
pub fn connectivity(positions: &[Pose], cfg: &CommConfig) -> Vec<Vec<RobotId>> {
    let n = positions.len();
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if positions[i].distance_to(&positions[j]) <= cfg.r_comm {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for row in &mut adj {
        row.sort_unstable();
    }
    adj
}
