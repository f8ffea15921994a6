use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{CommConfig, Intent, IntentTarget, Message};
use crate::alignment::{merge_maps, merge_registries, AlignError, AlignmentConfig, AlignmentResult, TransformCache};
use crate::grid::Pose;
use crate::gridworld::{GoalId, RobotId};
use crate::mapping::{decode_snapshot, InstanceRegistry, LogOddsMap, MapSnapshot};

/// What one robot remembers about one peer. The peer's transform lives in
/// the robot's [`TransformCache`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PeerState {
    pub last_fullmap_sent_step: Option<u32>,
    /// Own frame; set only once the peer's frame is aligned.
    pub last_known_pose: Option<Pose>,
    /// Frontier targets are stored in the own frame.
    pub last_known_intent: Option<Intent>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resolution {
    Keep,
    Yield,
}

/// Deconfliction between two intents; only same-goal pairs can yield.
pub fn resolve_intent(own: &Intent, incoming: &Intent) -> Resolution {
    match (own.target, incoming.target) {
        (IntentTarget::Goal(a), IntentTarget::Goal(b)) if a == b => {
            if incoming.score > own.score || (incoming.score == own.score && incoming.priority < own.priority) {
                Resolution::Yield
            } else {
                Resolution::Keep
            }
        }
        _ => Resolution::Keep,
    }
}

/// Content a robot offers on contact.
pub struct Outgoing<'a> {
    pub pose: Pose,
    pub completed: &'a BTreeSet<GoalId>,
    pub intent: Option<Intent>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ApplyOutcome {
    /// Fresh or cached alignment used for a full map.
    pub alignment: Option<AlignmentResult>,
    pub align_error: Option<AlignError>,
    pub merged: bool,
    /// Goals newly learned to be complete.
    pub completed: Vec<GoalId>,
}

/// Protocol state owned by one robot.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinationState {
    pub robot_id: RobotId,
    pub priority: u32,
    pub peers: BTreeMap<RobotId, PeerState>,
    pub cache: TransformCache,
    /// Goals known complete, found locally or reported by peers.
    pub completed: BTreeSet<GoalId>,
    pub merges: u64,
}

impl CoordinationState {
    pub fn new(robot_id: RobotId, priority: u32) -> Self {
        Self {
            robot_id,
            priority,
            peers: BTreeMap::new(),
            cache: TransformCache::new(robot_id),
            completed: BTreeSet::new(),
            merges: 0,
        }
    }

    pub fn wants_full_map(&self, peer: RobotId, step: u32, cfg: &CommConfig) -> bool {
        match self.peers.get(&peer).and_then(|p| p.last_fullmap_sent_step) {
            None => true,
            Some(last) => step.saturating_sub(last) >= cfg.tau,
        }
    }

    /// Messages for one connected neighbour. `snapshot` is invoked only when
    /// the cooldown allows a full map.
    pub fn plan_exchange(
        &mut self,
        peer: RobotId,
        step: u32,
        cfg: &CommConfig,
        out: &Outgoing,
        snapshot: impl FnOnce() -> MapSnapshot,
    ) -> Vec<Message> {
        let sender = self.robot_id;
        let mut msgs = Vec::with_capacity(4);
        if self.wants_full_map(peer, step, cfg) {
            msgs.push(Message::FullMap { sender, snapshot: Box::new(snapshot()) });
            self.peers.entry(peer).or_default().last_fullmap_sent_step = Some(step);
        }
        msgs.push(Message::Location { sender, pose: out.pose });
        msgs.push(Message::GoalStatus { sender, completed: out.completed.clone() });
        if let Some(intent) = out.intent {
            msgs.push(Message::Intent { sender, intent });
        }
        msgs
    }

    pub fn apply_message<R: Rng + ?Sized>(
        &mut self,
        msg: &Message,
        map: &mut LogOddsMap,
        registry: &mut InstanceRegistry,
        align: &AlignmentConfig,
        r_assoc: f64,
        rng: &mut R,
    ) -> ApplyOutcome {
        let mut outcome = ApplyOutcome::default();
        let sender = msg.sender();
        if sender == self.robot_id {
            return outcome;
        }
        match msg {
            Message::FullMap { snapshot, .. } => {
                let Ok((peer_map, peer_reg)) = decode_snapshot(snapshot) else { return outcome };
                match self.cache.align_with(sender, map, registry, &peer_map, &peer_reg, align, rng) {
                    Ok(result) => {
                        if result.accepted {
                            merge_maps(map, &peer_map, &result.transform);
                            merge_registries(registry, &peer_reg, &result.transform, map.resolution, r_assoc);
                            outcome.merged = true;
                            self.merges += 1;
                        }
                        outcome.alignment = Some(result);
                    }
                    Err(e) => outcome.align_error = Some(e),
                }
            }
            Message::Location { pose, .. } => {
                if let Some(t) = self.cache.transform_from(sender) {
                    self.peers.entry(sender).or_default().last_known_pose = Some(t.apply_pose(pose));
                }
            }
            Message::GoalStatus { completed, .. } => {
                for g in completed {
                    if self.completed.insert(*g) {
                        outcome.completed.push(*g);
                    }
                }
            }
            Message::Intent { intent, .. } => {
                let stored = match intent.target {
                    IntentTarget::Goal(_) => Some(*intent),
                    IntentTarget::ExploreFrontier(cell) => self.cache.transform_from(sender).map(|t| Intent {
                        target: IntentTarget::ExploreFrontier(t.warp_cell(cell, map.resolution)),
                        ..*intent
                    }),
                };
                if let Some(i) = stored {
                    self.peers.entry(sender).or_default().last_known_intent = Some(i);
                }
            }
        }
        outcome
    }

    /// Whether some peer's last intent outranks `own` on the same goal.
    pub fn outranked(&self, own: &Intent) -> bool {
        self.peers
            .values()
            .filter_map(|p| p.last_known_intent.as_ref())
            .any(|other| resolve_intent(own, other) == Resolution::Yield)
    }

    /// Peer poses in the own frame, ascending by peer id.
    pub fn known_poses(&self) -> Vec<(RobotId, Pose)> {
        self.peers.iter().filter_map(|(id, p)| p.last_known_pose.map(|pose| (*id, pose))).collect()
    }
}
