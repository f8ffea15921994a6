//! Post-hoc protocol checks over a recorded trace.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::trace::EpisodeTrace;
use crate::coordination::MessageKind;
use crate::gridworld::RobotId;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    /// Full maps sent to the same receiver less than `tau` steps apart.
    pub cooldown: Vec<String>,
    /// Messages received in the step they were sent, or never sent.
    pub causality: Vec<String>,
    /// Outcome goals lacking a matching validated stop.
    pub goals: Vec<String>,
    /// Merges without an accepted alignment.
    pub merges: Vec<String>,
    pub full_maps: usize,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.cooldown.is_empty() && self.causality.is_empty() && self.goals.is_empty() && self.merges.is_empty()
    }
}

pub fn audit_trace(trace: &EpisodeTrace) -> AuditReport {
    let mut report = AuditReport::default();
    let tau = trace.header.config.agent.comm.tau;

    let mut last_full: BTreeMap<(RobotId, RobotId), u32> = BTreeMap::new();
    let mut sent: BTreeSet<(u32, RobotId, RobotId, MessageKind)> = BTreeSet::new();
    for row in &trace.steps {
        for m in &row.sent {
            sent.insert((row.step, row.robot, m.to, m.kind));
            if m.kind != MessageKind::FullMap {
                continue;
            }
            report.full_maps += 1;
            if let Some(prev) = last_full.insert((row.robot, m.to), row.step) {
                if row.step - prev < tau {
                    report.cooldown.push(format!("{} -> {} at steps {prev} and {}", row.robot, m.to, row.step));
                }
            }
        }
    }

    for row in &trace.steps {
        for r in &row.received {
            if r.sent >= row.step {
                report.causality.push(format!("robot {} at step {} received a step-{} message", row.robot, row.step, r.sent));
            } else if !sent.contains(&(r.sent, r.from, row.robot, r.kind)) {
                report.causality.push(format!("robot {} at step {} received an unsent {:?}", row.robot, row.step, r.kind));
            }
        }
        for peer in &row.merges {
            if !row.alignments.iter().any(|a| a.peer == *peer && a.result.accepted) {
                report.merges.push(format!("robot {} merged {peer} at step {} unaligned", row.robot, row.step));
            }
        }
    }

    for g in &trace.footer.outcome.goals {
        if !g.found {
            continue;
        }
        let first_valid = trace
            .steps
            .iter()
            .find(|r| r.goal_event == Some(g.goal_id) && r.goal_valid == Some(true));
        match first_valid {
            Some(r) if Some(r.robot) == g.finder && Some(r.step + 1) == g.step => {}
            _ => report.goals.push(format!("goal {} has no matching validated stop", g.goal_id)),
        }
    }
    report
}
