//! Exact min-max open-path makespan over goal clusters.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::grid::{point_to_cell_distance, Cell};
use crate::gridworld::{distance_field, Episode, GoalId, GridScene};

/// Representative cells kept per instance.
pub const DEFAULT_MAX_REPRESENTATIVES: usize = 5;
/// Goals above this count make the per-robot tables too large.
pub const MAX_GOALS: usize = 16;

/// Distances between robot starts and candidate goal cells ("nodes").
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MakespanInstance {
    pub starts: Vec<Cell>,
    pub goal_ids: Vec<GoalId>,
    /// Node cells, grouped by goal through `node_goal`.
    pub nodes: Vec<Cell>,
    /// Index into `goal_ids` for each node.
    pub node_goal: Vec<usize>,
    /// `start_dist[r][k]`, metres; infinite when unreachable.
    pub start_dist: Vec<Vec<f64>>,
    /// `node_dist[k][l]`, metres.
    pub node_dist: Vec<Vec<f64>>,
    /// Goals dropped because no start can reach them.
    pub excluded: Vec<GoalId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MakespanSolution {
    pub d_star: f64,
    /// Robot per goal, aligned with `goal_ids`.
    pub assignment: Vec<usize>,
    /// Per robot: visited goals in order with the chosen cell.
    pub routes: Vec<Vec<(GoalId, Cell)>>,
    pub robot_costs: Vec<f64>,
}

/// Cells whose centre lies within `radius` of any footprint cell.
pub fn success_cells(scene: &GridScene, footprint: &BTreeSet<Cell>, radius: f64) -> BTreeSet<Cell> {
    let res = scene.resolution;
    let reach = (radius / res).ceil() as i32 + 1;
    let mut out = BTreeSet::new();
    for c in footprint {
        for dr in -reach..=reach {
            for dc in -reach..=reach {
                let n = c.offset(dr, dc);
                if !scene.is_free(n) {
                    continue;
                }
                let (x, y) = n.center(res);
                if point_to_cell_distance(x, y, *c, res) <= radius {
                    out.insert(n);
                }
            }
        }
    }
    out
}

/// Up to `k` cells: the nearest to each start, then farthest-point spread.
pub fn representatives(cells: &[Cell], start_fields: &[&[f64]], scene: &GridScene, k: usize) -> Vec<Cell> {
    let dist = |field: &[f64], c: Cell| scene.index(c).map(|i| field[i]).unwrap_or(f64::INFINITY);
    let reachable: Vec<Cell> = cells
        .iter()
        .copied()
        .filter(|c| start_fields.iter().any(|f| dist(f, *c).is_finite()))
        .collect();
    if reachable.is_empty() {
        return Vec::new();
    }
    let mut chosen: Vec<Cell> = Vec::new();
    for f in start_fields {
        let best = reachable
            .iter()
            .copied()
            .filter(|c| dist(f, *c).is_finite())
            .min_by(|a, b| dist(f, *a).total_cmp(&dist(f, *b)).then(a.cmp(b)));
        if let Some(c) = best {
            if !chosen.contains(&c) {
                chosen.push(c);
            }
        }
    }
    while chosen.len() < k && chosen.len() < reachable.len() {
        let next = reachable
            .iter()
            .copied()
            .filter(|c| !chosen.contains(c))
            .max_by(|a, b| {
                let da = chosen.iter().map(|q| a.euclid(*q)).fold(f64::INFINITY, f64::min);
                let db = chosen.iter().map(|q| b.euclid(*q)).fold(f64::INFINITY, f64::min);
                da.total_cmp(&db).then(b.cmp(a))
            })
            .expect("some cell left");
        chosen.push(next);
    }
    chosen
}

impl MakespanInstance {
    /// Builds the instance from explicit node distances.
    pub fn from_matrices(
        starts: Vec<Cell>,
        goal_ids: Vec<GoalId>,
        nodes: Vec<Cell>,
        node_goal: Vec<usize>,
        start_dist: Vec<Vec<f64>>,
        node_dist: Vec<Vec<f64>>,
    ) -> Self {
        Self { starts, goal_ids, nodes, node_goal, start_dist, node_dist, excluded: Vec::new() }
    }

    /// Scene geodesics between starts and explicit goal clusters.
    pub fn from_clusters(scene: &GridScene, starts: &[Cell], clusters: &[(GoalId, Vec<Cell>)]) -> Self {
        let fields: Vec<Vec<f64>> = starts.iter().map(|s| distance_field(scene, *s)).collect();
        let mut goal_ids = Vec::new();
        let mut nodes = Vec::new();
        let mut node_goal = Vec::new();
        let mut excluded = Vec::new();
        for (gid, cells) in clusters {
            let live: Vec<Cell> = cells
                .iter()
                .copied()
                .filter(|c| scene.index(*c).is_some_and(|i| fields.iter().any(|f| f[i].is_finite())))
                .collect();
            if live.is_empty() {
                log::warn!("goal {gid} is unreachable from every start and is excluded from d*");
                excluded.push(*gid);
                continue;
            }
            let gi = goal_ids.len();
            goal_ids.push(*gid);
            for c in live {
                nodes.push(c);
                node_goal.push(gi);
            }
        }
        let at = |f: &[f64], c: Cell| scene.index(c).map(|i| f[i]).unwrap_or(f64::INFINITY);
        let start_dist = fields.iter().map(|f| nodes.iter().map(|c| at(f, *c)).collect()).collect();
        let node_dist = nodes
            .iter()
            .map(|c| {
                let f = distance_field(scene, *c);
                nodes.iter().map(|d| at(&f, *d)).collect()
            })
            .collect();
        Self { starts: starts.to_vec(), goal_ids, nodes, node_goal, start_dist, node_dist, excluded }
    }

    /// Instance for an episode with up to `k_rep` representatives per instance.
    pub fn from_episode(scene: &GridScene, episode: &Episode, k_rep: usize) -> Self {
        let starts: Vec<Cell> = episode.start_poses.iter().map(|p| p.cell(scene.resolution)).collect();
        let fields: Vec<Vec<f64>> = starts.iter().map(|s| distance_field(scene, *s)).collect();
        let refs: Vec<&[f64]> = fields.iter().map(|f| f.as_slice()).collect();
        let clusters: Vec<(GoalId, Vec<Cell>)> = episode
            .goals
            .iter()
            .map(|g| {
                let mut cells = BTreeSet::new();
                for id in &g.valid_instance_ids {
                    if let Some(inst) = scene.instance(*id) {
                        let region: Vec<Cell> = success_cells(scene, &inst.footprint, g.success_radius).into_iter().collect();
                        cells.extend(representatives(&region, &refs, scene, k_rep));
                    }
                }
                (g.goal_id, cells.into_iter().collect())
            })
            .collect();
        Self::from_clusters(scene, &starts, &clusters)
    }

    pub fn robots(&self) -> usize {
        self.starts.len()
    }

    pub fn goals(&self) -> usize {
        self.goal_ids.len()
    }
}

/// Held-Karp table for one robot over goal subsets.
struct RobotTable {
    /// `dp[mask * n_nodes + k]`: shortest open path from the start covering
    /// `mask`, ending at node `k` (whose goal is in `mask`).
    dp: Vec<f64>,
    parent: Vec<u32>,
    /// Best cost per mask.
    best: Vec<f64>,
}

const NO_PARENT: u32 = u32::MAX;

fn robot_table(inst: &MakespanInstance, r: usize) -> RobotTable {
    let m = inst.goals();
    let n = inst.nodes.len();
    let masks = 1usize << m;
    let mut dp = vec![f64::INFINITY; masks * n];
    let mut parent = vec![NO_PARENT; masks * n];
    for k in 0..n {
        let mask = 1usize << inst.node_goal[k];
        dp[mask * n + k] = inst.start_dist[r][k];
    }
    for mask in 1..masks {
        for k in 0..n {
            let cur = dp[mask * n + k];
            if !cur.is_finite() {
                continue;
            }
            for l in 0..n {
                let g = inst.node_goal[l];
                if mask & (1 << g) != 0 {
                    continue;
                }
                let next = mask | (1 << g);
                let cand = cur + inst.node_dist[k][l];
                if cand < dp[next * n + l] {
                    dp[next * n + l] = cand;
                    parent[next * n + l] = k as u32;
                }
            }
        }
    }
    let mut best = vec![f64::INFINITY; masks];
    best[0] = 0.0;
    for mask in 1..masks {
        best[mask] = (0..n).map(|k| dp[mask * n + k]).fold(f64::INFINITY, f64::min);
    }
    RobotTable { dp, parent, best }
}

fn route(inst: &MakespanInstance, t: &RobotTable, mask: usize) -> Vec<(GoalId, Cell)> {
    let n = inst.nodes.len();
    if mask == 0 {
        return Vec::new();
    }
    let mut k = (0..n)
        .filter(|k| t.dp[mask * n + k].is_finite())
        .min_by(|a, b| t.dp[mask * n + a].total_cmp(&t.dp[mask * n + b]).then(a.cmp(b)))
        .expect("finite cost");
    let mut m = mask;
    let mut out = Vec::new();
    loop {
        out.push((inst.goal_ids[inst.node_goal[k]], inst.nodes[k]));
        let p = t.parent[m * n + k];
        m &= !(1 << inst.node_goal[k]);
        if p == NO_PARENT {
            break;
        }
        k = p as usize;
    }
    out.reverse();
    out
}

struct Search<'a> {
    tables: &'a [RobotTable],
    m: usize,
    masks: Vec<usize>,
    assignment: Vec<usize>,
    best: f64,
    best_assignment: Option<Vec<usize>>,
}

impl Search<'_> {
    fn current_max(&self) -> f64 {
        self.masks.iter().zip(self.tables).map(|(mask, t)| t.best[*mask]).fold(0.0, f64::max)
    }

    /// Admissible: every unassigned goal must join some robot.
    fn insertion_bound(&self, from: usize, base: f64) -> f64 {
        let mut bound = base;
        for g in from..self.m {
            let cheapest = self
                .masks
                .iter()
                .zip(self.tables)
                .map(|(mask, t)| t.best[mask | (1 << g)])
                .fold(f64::INFINITY, f64::min);
            bound = bound.max(cheapest);
        }
        bound
    }

    fn dfs(&mut self, g: usize) {
        let base = self.current_max();
        if g == self.m {
            if base < self.best {
                self.best = base;
                self.best_assignment = Some(self.assignment.clone());
            }
            return;
        }
        let lb = self.insertion_bound(g, base);
        // Ties keep the lexicographically earlier assignment found first.
        if !lb.is_finite() || lb >= self.best {
            return;
        }
        for r in 0..self.tables.len() {
            self.masks[r] |= 1 << g;
            self.assignment[g] = r;
            self.dfs(g + 1);
            self.masks[r] &= !(1 << g);
        }
    }
}

/// Exact optimum over assignments, visit orders and cell choices.
pub fn optimal_makespan(inst: &MakespanInstance) -> Result<MakespanSolution, MetricsError> {
    let n = inst.robots();
    let m = inst.goals();
    if n == 0 {
        return Err(MetricsError::Infeasible("no robots".into()));
    }
    if m > MAX_GOALS {
        return Err(MetricsError::TooLarge(m));
    }
    for g in 0..m {
        let reachable = (0..inst.nodes.len())
            .filter(|k| inst.node_goal[*k] == g)
            .any(|k| (0..n).any(|r| inst.start_dist[r][k].is_finite()));
        if !reachable {
            return Err(MetricsError::Infeasible(format!("goal {} unreachable", inst.goal_ids[g])));
        }
    }
    let tables: Vec<RobotTable> = (0..n).map(|r| robot_table(inst, r)).collect();
    let mut s = Search {
        tables: &tables,
        m,
        masks: vec![0; n],
        assignment: vec![0; m],
        best: f64::INFINITY,
        best_assignment: None,
    };
    // The exact search prunes with `>=`, so seed it with a strict hair
    // above the greedy bound to keep the greedy assignment reachable.
    let greedy = greedy_makespan(inst, &tables);
    s.best = greedy * (1.0 + 1e-12) + 1e-12;
    s.dfs(0);
    let assignment = s
        .best_assignment
        .ok_or_else(|| MetricsError::Infeasible("no finite assignment".into()))?;
    let mut masks = vec![0usize; n];
    for (g, r) in assignment.iter().enumerate() {
        masks[*r] |= 1 << g;
    }
    let robot_costs: Vec<f64> = (0..n).map(|r| tables[r].best[masks[r]]).collect();
    let routes = (0..n).map(|r| route(inst, &tables[r], masks[r])).collect();
    Ok(MakespanSolution {
        d_star: robot_costs.iter().copied().fold(0.0, f64::max),
        assignment,
        routes,
        robot_costs,
    })
}

/// Goals in order, each to the robot whose cost grows least.
fn greedy_makespan(inst: &MakespanInstance, tables: &[RobotTable]) -> f64 {
    let mut masks = vec![0usize; inst.robots()];
    for g in 0..inst.goals() {
        let r = (0..masks.len())
            .min_by(|a, b| {
                let ca = tables[*a].best[masks[*a] | (1 << g)];
                let cb = tables[*b].best[masks[*b] | (1 << g)];
                ca.total_cmp(&cb).then(a.cmp(b))
            })
            .expect("robots");
        masks[r] |= 1 << g;
    }
    masks.iter().zip(tables).map(|(m, t)| t.best[*m]).fold(0.0, f64::max)
}

/// Makespan of sending each goal to the robot nearest its cluster, with
/// each robot visiting its goals in the given order through nearest cells.
pub fn nearest_robot_upper_bound(inst: &MakespanInstance) -> f64 {
    let n = inst.robots();
    let mut pos: Vec<Option<usize>> = vec![None; n];
    let mut cost = vec![0.0; n];
    for g in 0..inst.goals() {
        let nodes: Vec<usize> = (0..inst.nodes.len()).filter(|k| inst.node_goal[*k] == g).collect();
        let (r, k) = (0..n)
            .flat_map(|r| nodes.iter().map(move |k| (r, *k)))
            .min_by(|a, b| inst.start_dist[a.0][a.1].total_cmp(&inst.start_dist[b.0][b.1]))
            .expect("cluster");
        let leg = match pos[r] {
            None => inst.start_dist[r][k],
            Some(p) => inst.node_dist[p][k],
        };
        cost[r] += leg;
        pos[r] = Some(k);
    }
    cost.into_iter().fold(0.0, f64::max)
}
