//! Exhaustive min-max routing over goal clusters.

use rand::seq::SliceRandom;
use rand::Rng;
use semnav::grid::Cell;
use semnav::gridworld::{GridScene, Occupancy};

use super::dijkstra;

/// Walled square with random interior obstacles.
pub fn random_scene<R: Rng>(rng: &mut R, n: usize, density: f64) -> GridScene {
    let occ = (0..n * n)
        .map(|i| {
            let (r, c) = (i / n, i % n);
            let edge = r == 0 || c == 0 || r == n - 1 || c == n - 1;
            if edge || rng.random_bool(density) {
                Occupancy::Obstacle
            } else {
                Occupancy::Free
            }
        })
        .collect();
    GridScene::new("rand", n, n, 0.25, occ, Vec::new()).unwrap()
}

pub struct Case {
    pub scene: GridScene,
    pub starts: Vec<Cell>,
    pub clusters: Vec<Vec<Cell>>,
}

/// Distinct free starts and cluster cells; `None` when some cluster is
/// unreachable from every start.
pub fn random_case<R: Rng>(rng: &mut R, max_robots: usize, max_goals: usize, max_cluster: usize) -> Option<Case> {
    let scene = random_scene(rng, 15, 0.2);
    let mut free: Vec<Cell> = scene.cells().filter(|c| scene.is_free(*c)).collect();
    free.shuffle(rng);
    let n = rng.random_range(1..=max_robots);
    let m = rng.random_range(1..=max_goals);
    let starts = free[..n].to_vec();
    let mut used = n;
    let clusters: Vec<Vec<Cell>> = (0..m)
        .map(|_| {
            let k = rng.random_range(1..=max_cluster);
            let c = free[used..used + k].to_vec();
            used += k;
            c
        })
        .collect();
    let fields: Vec<Vec<f64>> = starts.iter().map(|c| dijkstra(&scene, *c)).collect();
    let reachable = clusters
        .iter()
        .all(|cl| cl.iter().any(|c| fields.iter().any(|f| f[scene.index(*c).unwrap()].is_finite())));
    reachable.then_some(Case { scene, starts, clusters })
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head);
            out.push(p);
        }
    }
    out
}

/// Optimal makespan by enumerating assignments, visit orders and cells.
pub fn brute_force_makespan(case: &Case) -> f64 {
    let s = &case.scene;
    let (n, m) = (case.starts.len(), case.clusters.len());
    let d = |from: Cell, to: Cell| dijkstra(s, from)[s.index(to).unwrap()];
    let start_d: Vec<Vec<Vec<f64>>> = case
        .starts
        .iter()
        .map(|st| case.clusters.iter().map(|cl| cl.iter().map(|c| d(*st, *c)).collect()).collect())
        .collect();
    let cells: Vec<Cell> = case.clusters.iter().flatten().copied().collect();
    let mut pair = std::collections::BTreeMap::new();
    for a in &cells {
        let f = dijkstra(s, *a);
        for b in &cells {
            pair.insert((*a, *b), f[s.index(*b).unwrap()]);
        }
    }

    let route = |r: usize, goals: &[usize]| -> f64 {
        if goals.is_empty() {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for order in permutations(goals) {
            let mut stack: Vec<(usize, Option<Cell>, f64)> = vec![(0, None, 0.0)];
            while let Some((depth, at, cost)) = stack.pop() {
                if depth == order.len() {
                    best = best.min(cost);
                    continue;
                }
                let g = order[depth];
                for (k, c) in case.clusters[g].iter().enumerate() {
                    let leg = match at {
                        None => start_d[r][g][k],
                        Some(p) => pair[&(p, *c)],
                    };
                    stack.push((depth + 1, Some(*c), cost + leg));
                }
            }
        }
        best
    };

    let mut best = f64::INFINITY;
    for code in 0..n.pow(m as u32) {
        let mut owned: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut x = code;
        for g in 0..m {
            owned[x % n].push(g);
            x /= n;
        }
        let span = owned.iter().enumerate().map(|(r, goals)| route(r, goals)).fold(0.0, f64::max);
        best = best.min(span);
    }
    best
}
