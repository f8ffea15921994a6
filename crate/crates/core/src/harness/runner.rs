//! The synchronous world loop.

use std::collections::BTreeMap;

use log::debug;

use super::frames::LocalFrame;
use super::trace::{AlignmentRecord, EpisodeTrace, ReceivedRecord, RobotFinal, SentRecord, StepRecord, TraceFooter, TraceHeader};
use super::{HarnessError, RunConfig};
use crate::agent::{distance_to_instance, AgentState, Mode};
use crate::coordination::{connectivity, Envelope};
use crate::grid::Pose;
use crate::gridworld::{
    observe, step_agent, DetectionOracle, Episode, EpisodeFile, GoalSpec, GridScene, ObservationStream, SceneFile,
};
use crate::mapping::encode_snapshot;
use crate::metrics::{optimal_makespan, EpisodeOutcome, GoalOutcome, MakespanInstance, DEFAULT_MAX_REPRESENTATIVES};

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRun {
    pub trace: EpisodeTrace,
    pub outcome: EpisodeOutcome,
    pub d_star: Option<f64>,
}

/// Ground truth: the world pose lies within the success radius of some
/// valid instance of `goal`.
pub fn validate_goal_event(scene: &GridScene, goal: &GoalSpec, pose: &Pose) -> bool {
    goal.valid_instance_ids.iter().filter_map(|id| scene.instance(*id)).any(|inst| {
        distance_to_instance(pose.x, pose.y, &inst.footprint, scene.resolution) <= goal.success_radius + 1e-9
    })
}

fn prepare(scene: &GridScene, episode: &Episode, cfg: &RunConfig) -> Result<Episode, HarnessError> {
    if episode.scene_id != scene.scene_id {
        return Err(HarnessError::Config(format!(
            "episode {} targets scene {}, got {}",
            episode.episode_id, episode.scene_id, scene.scene_id
        )));
    }
    let mut ep = episode.clone();
    if let Some(n) = cfg.n {
        if n == 0 || n > ep.start_poses.len() {
            return Err(HarnessError::Config(format!(
                "{n} robots requested, episode has {} starts",
                ep.start_poses.len()
            )));
        }
        ep.start_poses.truncate(n);
    }
    if let Some(m) = cfg.max_steps {
        ep.max_steps = m;
    }
    ep.validate(scene)?;
    Ok(ep)
}

/// Runs one episode to termination: all goals found, every robot done, or
/// the step budget spent.
pub fn run_episode(scene: &GridScene, episode: &Episode, cfg: &RunConfig) -> Result<EpisodeRun, HarnessError> {
    let ep = prepare(scene, episode, cfg)?;
    let res = scene.resolution;
    let n = ep.start_poses.len();
    let frames: Vec<LocalFrame> = ep
        .start_poses
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let start = p.cell(res);
            if cfg.rotated_frames {
                LocalFrame::random(cfg.seed, i, start, res)
            } else {
                LocalFrame::new(0, start, res)
            }
        })
        .collect();
    let oracle = DetectionOracle::new(cfg.noise, &ep.goals);
    let mut streams: Vec<ObservationStream> =
        (0..n).map(|i| ObservationStream::new(cfg.seed ^ (i as u64).wrapping_mul(0xA076_1D64_78BD_642F))).collect();
    let mut agents: Vec<AgentState> =
        (0..n).map(|i| AgentState::new(i, i as u32, res, ep.goals.clone(), cfg.seed)).collect();
    let mut poses = ep.start_poses.clone();
    let mut distances = vec![0.0; n];
    let mut found: BTreeMap<u32, (usize, u32)> = BTreeMap::new();
    let mut in_flight: Vec<Envelope> = Vec::new();
    let mut rows = Vec::new();
    let mut steps = 0;

    for t in 0..ep.max_steps {
        let obs: Vec<_> = (0..n)
            .map(|i| {
                let world = observe(scene, i, &poses[i], &cfg.sensor, &oracle, &mut streams[i]);
                frames[i].observation(&world, res)
            })
            .collect();
        let neighbors = connectivity(&poses, &cfg.agent.comm);
        let mut inboxes: Vec<Vec<Envelope>> = vec![Vec::new(); n];
        for env in in_flight.drain(..) {
            inboxes[env.receiver].push(env);
        }
        // Every robot decides before any action or message takes effect.
        let decisions: Vec<_> = (0..n)
            .map(|i| {
                let msgs: Vec<_> = inboxes[i].iter().map(|e| e.message.clone()).collect();
                agents[i].decide(&obs[i], &msgs, &neighbors[i], t, &cfg.agent)
            })
            .collect();
        for (i, d) in decisions.into_iter().enumerate() {
            let before = poses[i];
            let moved = step_agent(scene, before, d.action);
            poses[i] = moved.pose;
            distances[i] += moved.travelled;
            let mut goal_valid = None;
            if let Some(g) = d.goal_event {
                let valid = ep.goal(g).is_some_and(|spec| validate_goal_event(scene, spec, &before));
                goal_valid = Some(valid);
                if valid {
                    found.entry(g).or_insert((i, t + 1));
                }
                debug!("step {t}: robot {i} stops for goal {g} (valid: {valid})");
            }
            let alignments = d
                .log
                .alignments
                .into_iter()
                .map(|(peer, result)| {
                    let truth = frames[i].relative_from(&frames[peer]);
                    AlignmentRecord {
                        peer,
                        rotation_error: result.transform.rotation_error(&truth),
                        translation_error: result.transform.translation_error(&truth),
                        result,
                    }
                })
                .collect();
            rows.push(StepRecord {
                step: t,
                robot: i,
                pose: before,
                action: d.action,
                blocked: moved.blocked,
                mode: agents[i].mode,
                waypoint: d.log.waypoint,
                sent: d
                    .outbox
                    .iter()
                    .map(|e| SentRecord { kind: e.message.kind(), to: e.receiver, bytes: e.message.payload_bytes() })
                    .collect(),
                received: inboxes[i]
                    .iter()
                    .map(|e| ReceivedRecord { from: e.message.sender(), kind: e.message.kind(), sent: e.sent_step })
                    .collect(),
                goal_event: d.goal_event,
                goal_valid,
                merges: d.log.merges,
                alignments,
                align_errors: d.log.align_errors.into_iter().map(|(p, e)| (p, e.to_string())).collect(),
            });
            in_flight.extend(d.outbox);
        }
        steps = t + 1;
        if found.len() == ep.goals.len() || agents.iter().all(|a| a.mode == Mode::Done) {
            break;
        }
    }

    let outcome = EpisodeOutcome {
        episode_id: ep.episode_id.clone(),
        goals: ep
            .goals
            .iter()
            .map(|g| {
                let hit = found.get(&g.goal_id);
                GoalOutcome { goal_id: g.goal_id, found: hit.is_some(), finder: hit.map(|h| h.0), step: hit.map(|h| h.1) }
            })
            .collect(),
        distances,
        steps,
        max_steps: ep.max_steps,
    };
    let d_star = optimal_makespan(&MakespanInstance::from_episode(scene, &ep, DEFAULT_MAX_REPRESENTATIVES))
        .ok()
        .map(|s| s.d_star)
        .filter(|d| d.is_finite());
    let robots = agents
        .iter()
        .map(|a| RobotFinal {
            robot: a.robot_id,
            pose: a.pose,
            snapshot: cfg.record_maps.then(|| encode_snapshot(&a.map, &a.registry)),
            known_poses: a.coord.known_poses(),
            transforms: (0..n)
                .filter(|p| *p != a.robot_id)
                .filter_map(|p| a.coord.cache.transform_from(p).map(|t| (p, t)))
                .collect(),
            estimate_calls: a.coord.cache.estimate_calls,
            merges: a.coord.merges,
        })
        .collect();
    let trace = EpisodeTrace {
        header: TraceHeader {
            episode: EpisodeFile::from_episode(&ep),
            scene: SceneFile::from_scene(scene),
            frames: frames.iter().map(|f| f.to_local).collect(),
            config: *cfg,
        },
        steps: rows,
        footer: TraceFooter { outcome: outcome.clone(), d_star, robots },
    };
    Ok(EpisodeRun { trace, outcome, d_star })
}
