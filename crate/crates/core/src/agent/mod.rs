//! Per-robot decision loop.

mod goals;
mod local;

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use goals::{
    all_matches, distance_to_instance, in_goal_range, match_goals, select_goal_region, GoalMatch, Infeasible,
};
pub use local::{next_waypoint, pick_waypoint, steer, Stuck};

use crate::alignment::{AlignError, AlignmentConfig, AlignmentResult};
use crate::coordination::{
    select_frontier, CommConfig, CoordinationState, Envelope, Intent, IntentTarget, Message, Outgoing,
};
use crate::grid::{Cell, Pose};
use crate::gridworld::{Action, GoalId, GoalSpec, Observation, RobotId};
use crate::mapping::{
    cost_field, encode_snapshot, extract_frontiers, integrate_observation, Frontier, InstanceRegistry, LogOddsMap,
    LogOddsParams, MapSnapshot, PlannerConfig, DEFAULT_ASSOC_RADIUS, DEFAULT_MIN_FRONTIER,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    /// Match confidence needed before navigating to a goal.
    pub s_min: f64,
    /// Goal-region dilation, cells.
    pub r_goal: i32,
    /// Obstacle inflation for planning, cells.
    pub r_safe: u32,
    /// Lookahead radius, cells.
    pub r_local: i32,
    /// Heading deadband, radians.
    pub deadband: f64,
    pub min_frontier: usize,
    /// Turns spent at a frontier target before it is abandoned.
    pub spin_limit: u32,
    /// Use peer poses in frontier weighting.
    pub use_neighbors: bool,
    pub logodds: LogOddsParams,
    pub planner: PlannerConfig,
    pub align: AlignmentConfig,
    pub comm: CommConfig,
    pub r_assoc: f64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            s_min: 0.8,
            r_goal: 4,
            r_safe: 1,
            r_local: 12,
            deadband: 15f64.to_radians(),
            min_frontier: DEFAULT_MIN_FRONTIER,
            spin_limit: 12,
            use_neighbors: true,
            logodds: LogOddsParams::default(),
            planner: PlannerConfig::default(),
            align: AlignmentConfig::default(),
            comm: CommConfig::default(),
            r_assoc: DEFAULT_ASSOC_RADIUS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Mode {
    Explore { target: Option<Cell> },
    GotoGoal { goal_id: GoalId, record: u32, target: Cell },
    Done,
}

impl Mode {
    pub fn label(&self) -> &'static str {
        match self {
            Mode::Explore { .. } => "explore",
            Mode::GotoGoal { .. } => "goto_goal",
            Mode::Done => "done",
        }
    }
}

/// Side information about one `decide` call, for tracing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DecisionLog {
    pub alignments: Vec<(RobotId, AlignmentResult)>,
    pub align_errors: Vec<(RobotId, AlignError)>,
    pub merges: Vec<RobotId>,
    pub waypoint: Option<Cell>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub action: Action,
    pub outbox: Vec<Envelope>,
    pub goal_event: Option<GoalId>,
    pub log: DecisionLog,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub robot_id: RobotId,
    /// Own frame.
    pub pose: Pose,
    pub cell: Cell,
    pub map: LogOddsMap,
    pub registry: InstanceRegistry,
    pub goals: Vec<GoalSpec>,
    pub pending: BTreeSet<GoalId>,
    pub mode: Mode,
    pub current_intent: Option<Intent>,
    pub coord: CoordinationState,
    /// Records found unusable as goal targets, with the step they may be retried.
    pub deferred: BTreeMap<u32, u32>,
    /// Frontier cells given up on.
    pub abandoned: BTreeSet<Cell>,
    spin: u32,
    rng: ChaCha8Rng,
}

/// Retry delay for a deferred goal record, steps.
const DEFER_STEPS: u32 = 20;

impl AgentState {
    pub fn new(robot_id: RobotId, priority: u32, resolution: f64, goals: Vec<GoalSpec>, seed: u64) -> Self {
        let pending = goals.iter().map(|g| g.goal_id).collect();
        Self {
            robot_id,
            pose: Pose::new(0.0, 0.0, crate::grid::Heading::new(0)),
            cell: Cell::new(0, 0),
            map: LogOddsMap::new(robot_id, resolution),
            registry: InstanceRegistry::new(),
            goals,
            pending,
            mode: Mode::Explore { target: None },
            current_intent: None,
            coord: CoordinationState::new(robot_id, priority),
            deferred: BTreeMap::new(),
            abandoned: BTreeSet::new(),
            spin: 0,
            rng: ChaCha8Rng::seed_from_u64(seed ^ (0x9E37_79B9_7F4A_7C15u64.wrapping_mul(robot_id as u64 + 1))),
        }
    }

    pub fn priority(&self) -> u32 {
        self.coord.priority
    }

    fn goal(&self, id: GoalId) -> Option<&GoalSpec> {
        self.goals.iter().find(|g| g.goal_id == id)
    }

    fn apply_inbox(&mut self, inbox: &[Message], cfg: &AgentConfig, log: &mut DecisionLog) {
        let mut order: Vec<&Message> = inbox.iter().collect();
        order.sort_by_key(|m| (m.sender(), m.kind()));
        for msg in order {
            let out = self.coord.apply_message(
                msg,
                &mut self.map,
                &mut self.registry,
                &cfg.align,
                cfg.r_assoc,
                &mut self.rng,
            );
            if let Some(a) = out.alignment {
                log.alignments.push((msg.sender(), a));
            }
            if let Some(e) = out.align_error {
                log.align_errors.push((msg.sender(), e));
            }
            if out.merged {
                log.merges.push(msg.sender());
            }
        }
        for g in &self.coord.completed {
            self.pending.remove(g);
        }
    }

    /// Pending goal matches not outranked by a peer's intent.
    fn eligible_matches(&self, cfg: &AgentConfig, step: u32) -> Vec<GoalMatch> {
        all_matches(&self.registry, &self.pending, &self.goals, cfg.s_min)
            .into_iter()
            .filter(|m| self.deferred.get(&m.record).is_none_or(|until| step >= *until))
            .filter(|m| {
                let mine = Intent { target: IntentTarget::Goal(m.goal_id), score: m.score, priority: self.priority() };
                !self.coord.outranked(&mine)
            })
            .collect()
    }

    /// Tries goal matches in order; returns the action if one is usable.
    fn pursue_goal(&mut self, cfg: &AgentConfig, step: u32, log: &mut DecisionLog) -> Option<(Action, Option<GoalId>)> {
        for m in self.eligible_matches(cfg, step) {
            let Some(rec) = self.registry.get(m.record).cloned() else { continue };
            let radius = self.goal(m.goal_id).map(|g| g.success_radius).unwrap_or(0.0);
            if in_goal_range(&self.map, &self.pose, self.cell, &rec, radius) {
                self.pending.remove(&m.goal_id);
                self.coord.completed.insert(m.goal_id);
                self.mode = if self.pending.is_empty() { Mode::Done } else { Mode::Explore { target: None } };
                self.current_intent = None;
                return Some((Action::Stop, Some(m.goal_id)));
            }
            let target = match select_goal_region(&self.map, &rec, self.cell, cfg.r_goal, radius, &cfg.planner) {
                Ok(t) => t,
                Err(Infeasible) => {
                    self.deferred.insert(m.record, step + DEFER_STEPS);
                    continue;
                }
            };
            if target == self.cell {
                // At the region but not in range with line of sight.
                self.deferred.insert(m.record, step + DEFER_STEPS);
                continue;
            }
            let Ok((wp, _)) = next_waypoint(&self.map, self.cell, target, cfg.r_safe, cfg.r_local, &cfg.planner) else {
                self.deferred.insert(m.record, step + DEFER_STEPS);
                continue;
            };
            self.mode = Mode::GotoGoal { goal_id: m.goal_id, record: m.record, target };
            self.current_intent = Some(Intent {
                target: IntentTarget::Goal(m.goal_id),
                score: m.score.clamp(0.0, 1.0),
                priority: self.priority(),
            });
            log.waypoint = Some(wp);
            return Some((steer(&self.map, &self.pose, self.cell, wp, cfg.deadband), None));
        }
        None
    }

    fn frontiers(&self, cfg: &AgentConfig) -> Vec<Frontier> {
        extract_frontiers(&self.map, cfg.min_frontier)
            .into_iter()
            .filter_map(|mut f| {
                f.cells.retain(|c| !self.abandoned.contains(c));
                if f.cells.is_empty() {
                    None
                } else {
                    if !f.cells.contains(&f.representative) {
                        f.representative = f.cells[0];
                    }
                    Some(f)
                }
            })
            .collect()
    }

    fn explore(&mut self, cfg: &AgentConfig, log: &mut DecisionLog) -> Option<Action> {
        loop {
            let frontiers = self.frontiers(cfg);
            if frontiers.is_empty() {
                return None;
            }
            let own = cost_field(&self.map, self.cell, 0, &cfg.planner);
            let neighbour_fields: Vec<Vec<f64>> = if cfg.use_neighbors {
                self.coord
                    .known_poses()
                    .iter()
                    .map(|(_, p)| cost_field(&self.map, p.cell(self.map.resolution), 0, &cfg.planner))
                    .collect()
            } else {
                Vec::new()
            };
            let refs: Vec<&[f64]> = neighbour_fields.iter().map(|v| v.as_slice()).collect();
            // A frontier under the robot still needs a turn to clear.
            let floor = 0.5 * self.map.resolution;
            let own_floored: Vec<f64> = own.iter().map(|d| d.max(floor)).collect();
            let choice = select_frontier(&self.map, &frontiers, &own_floored, &refs)?;
            let f = &frontiers[choice.index];
            let target = *f
                .cells
                .iter()
                .min_by(|a, b| {
                    let da = self.map.index(**a).map(|i| own[i]).unwrap_or(f64::INFINITY);
                    let db = self.map.index(**b).map(|i| own[i]).unwrap_or(f64::INFINITY);
                    da.total_cmp(&db).then(a.cmp(b))
                })
                .expect("non-empty");
            if target == self.cell {
                self.spin += 1;
                if self.spin > cfg.spin_limit {
                    self.abandoned.insert(target);
                    self.spin = 0;
                    continue;
                }
            } else {
                self.spin = 0;
            }
            let Ok((wp, _)) = next_waypoint(&self.map, self.cell, target, cfg.r_safe, cfg.r_local, &cfg.planner) else {
                self.abandoned.extend(f.cells.iter().copied());
                continue;
            };
            self.mode = Mode::Explore { target: Some(target) };
            self.current_intent =
                Some(Intent { target: IntentTarget::ExploreFrontier(f.representative), score: 0.5, priority: self.priority() });
            log.waypoint = Some(wp);
            return Some(steer(&self.map, &self.pose, self.cell, wp, cfg.deadband));
        }
    }

    /// One control step. `obs` is in the own frame; `neighbors` are the
    /// robots in radio range this step.
    pub fn decide(
        &mut self,
        obs: &Observation,
        inbox: &[Message],
        neighbors: &[RobotId],
        step: u32,
        cfg: &AgentConfig,
    ) -> Decision {
        let mut log = DecisionLog::default();
        integrate_observation(&mut self.map, &mut self.registry, obs, &cfg.logodds, cfg.r_assoc);
        self.pose = obs.pose;
        self.cell = obs.cell;
        self.apply_inbox(inbox, cfg, &mut log);
        if let Mode::GotoGoal { goal_id, .. } = self.mode {
            if !self.pending.contains(&goal_id) {
                self.mode = Mode::Explore { target: None };
            }
        }

        let (action, goal_event) = if self.pending.is_empty() {
            self.mode = Mode::Done;
            self.current_intent = None;
            (Action::Stop, None)
        } else if let Some(r) = self.pursue_goal(cfg, step, &mut log) {
            r
        } else if let Some(a) = self.explore(cfg, &mut log) {
            (a, None)
        } else {
            self.mode = Mode::Done;
            self.current_intent = None;
            (Action::Stop, None)
        };

        let outbox = self.build_outbox(neighbors, step, cfg);
        Decision { action, outbox, goal_event, log }
    }

    fn build_outbox(&mut self, neighbors: &[RobotId], step: u32, cfg: &AgentConfig) -> Vec<Envelope> {
        let mut snapshot: Option<MapSnapshot> = None;
        let completed = self.coord.completed.clone();
        let out = Outgoing { pose: self.pose, completed: &completed, intent: self.current_intent };
        let mut outbox = Vec::new();
        for &peer in neighbors {
            if peer == self.robot_id {
                continue;
            }
            let (map, registry) = (&self.map, &self.registry);
            let msgs = self.coord.plan_exchange(peer, step, &cfg.comm, &out, || {
                snapshot.get_or_insert_with(|| encode_snapshot(map, registry)).clone()
            });
            outbox.extend(msgs.into_iter().map(|message| Envelope { receiver: peer, sent_step: step, message }));
        }
        outbox
    }
}
