//! Goal matching against the registry and goal-region targeting.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::grid::{line_cells, point_to_cell_distance, Cell, Pose, NEIGHBORS8};
use crate::gridworld::{GoalId, GoalSpec};
use crate::mapping::{cost_field, CellClass, InstanceRecord, InstanceRegistry, LogOddsMap, PlannerConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoalMatch {
    pub goal_id: GoalId,
    /// Registry `local_id`.
    pub record: u32,
    pub score: f64,
}

/// Every pending (goal, record) pair at or above `threshold`, best first.
pub fn all_matches(
    registry: &InstanceRegistry,
    pending: &BTreeSet<GoalId>,
    goals: &[GoalSpec],
    threshold: f64,
) -> Vec<GoalMatch> {
    let mut out = Vec::new();
    for goal in goals.iter().filter(|g| pending.contains(&g.goal_id)) {
        for rec in &registry.records {
            if rec.is_spurious() || !rec.matches_any(&goal.valid_instance_ids) || rec.best_score < threshold {
                continue;
            }
            out.push(GoalMatch { goal_id: goal.goal_id, record: rec.local_id, score: rec.best_score });
        }
    }
    out.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.goal_id.cmp(&b.goal_id)).then(a.record.cmp(&b.record)));
    out
}

/// Highest-scoring pending goal match, if any clears `threshold`.
pub fn match_goals(
    registry: &InstanceRegistry,
    pending: &BTreeSet<GoalId>,
    goals: &[GoalSpec],
    threshold: f64,
) -> Option<GoalMatch> {
    all_matches(registry, pending, goals, threshold).into_iter().next()
}

/// Euclidean distance from a position to the nearest footprint cell.
pub fn distance_to_instance(x: f64, y: f64, cells: &BTreeSet<Cell>, resolution: f64) -> f64 {
    cells
        .iter()
        .map(|c| point_to_cell_distance(x, y, *c, resolution))
        .fold(f64::INFINITY, f64::min)
}

/// Within `radius` of the record and with an unobstructed line to its nearest cell.
pub fn in_goal_range(map: &LogOddsMap, pose: &Pose, cell: Cell, rec: &InstanceRecord, radius: f64) -> bool {
    let res = map.resolution;
    let nearest = rec
        .cells
        .iter()
        .map(|c| (point_to_cell_distance(pose.x, pose.y, *c, res), *c))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let Some((d, target)) = nearest else { return false };
    if d > radius {
        return false;
    }
    line_cells(cell, target)
        .iter()
        .all(|c| rec.cells.contains(c) || map.classify(*c) != CellClass::Occupied)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("no reachable free cell near the instance")]
pub struct Infeasible;

/// Free cell beside the instance, on the reachable side nearest the robot.
pub fn select_goal_region(
    map: &LogOddsMap,
    rec: &InstanceRecord,
    from: Cell,
    r_goal: i32,
    success_radius: f64,
    planner: &PlannerConfig,
) -> Result<Cell, Infeasible> {
    if rec.cells.is_empty() {
        return Err(Infeasible);
    }
    let res = map.resolution;
    let mut ring = BTreeSet::new();
    for c in &rec.cells {
        for dr in -r_goal..=r_goal {
            for dc in -r_goal..=r_goal {
                if dr * dr + dc * dc > r_goal * r_goal {
                    continue;
                }
                let n = c.offset(dr, dc);
                if rec.cells.contains(&n) || map.classify(n) != CellClass::FreeExplored {
                    continue;
                }
                let (x, y) = n.center(res);
                if distance_to_instance(x, y, &rec.cells, res) <= success_radius {
                    ring.insert(n);
                }
            }
        }
    }
    if ring.is_empty() {
        return Err(Infeasible);
    }
    let field = cost_field(map, from, 0, planner);
    let dist = |c: &Cell| map.index(*c).map(|i| field[i]).unwrap_or(f64::INFINITY);
    // 8-connected clusters of the ring.
    let mut label: BTreeMap<Cell, usize> = BTreeMap::new();
    let mut clusters: Vec<Vec<Cell>> = Vec::new();
    for &seed in &ring {
        if label.contains_key(&seed) {
            continue;
        }
        let id = clusters.len();
        let mut members = vec![seed];
        label.insert(seed, id);
        let mut q = VecDeque::from([seed]);
        while let Some(c) = q.pop_front() {
            for (dr, dc) in NEIGHBORS8 {
                let n = c.offset(dr, dc);
                if ring.contains(&n) && !label.contains_key(&n) {
                    label.insert(n, id);
                    members.push(n);
                    q.push_back(n);
                }
            }
        }
        clusters.push(members);
    }
    let best = clusters
        .iter()
        .map(|m| (m.iter().map(dist).fold(f64::INFINITY, f64::min), m))
        .filter(|(d, _)| d.is_finite())
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1[0].cmp(&b.1[0])));
    let Some((_, members)) = best else { return Err(Infeasible) };
    let (cx, cy) = rec.centroid;
    members
        .iter()
        .filter(|c| dist(c).is_finite())
        .map(|c| {
            let (x, y) = c.center(res);
            ((x - cx).hypot(y - cy), dist(c), *c)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)))
        .map(|(_, _, c)| c)
        .ok_or(Infeasible)
}
