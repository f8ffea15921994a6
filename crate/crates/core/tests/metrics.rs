mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semnav::grid::Cell;
use semnav::gridworld::GoalId;
use semnav::metrics::{
    compute_mspl, compute_sr, nearest_robot_upper_bound, optimal_makespan, summarize, EpisodeMetrics, EpisodeOutcome,
    GoalOutcome, MakespanInstance, MetricsError,
};

use common::oracle::{brute_force_makespan, random_case};

/// Points on a line, distances are absolute differences.
fn line(starts: &[f64], goals: &[Vec<f64>]) -> MakespanInstance {
    let mut nodes = Vec::new();
    let mut node_goal = Vec::new();
    let mut pos = Vec::new();
    for (g, cells) in goals.iter().enumerate() {
        for x in cells {
            nodes.push(Cell::new(0, pos.len() as i32));
            node_goal.push(g);
            pos.push(*x);
        }
    }
    let start_dist = starts.iter().map(|s| pos.iter().map(|p| (p - s).abs()).collect()).collect();
    let node_dist = pos.iter().map(|a| pos.iter().map(|b| (a - b).abs()).collect()).collect();
    MakespanInstance::from_matrices(
        starts.iter().map(|_| Cell::new(0, 0)).collect(),
        (0..goals.len() as GoalId).collect(),
        nodes,
        node_goal,
        start_dist,
        node_dist,
    )
}

#[test]
fn line_examples() {
    // Two robots at the ends, one goal near each.
    let sol = optimal_makespan(&line(&[0.0, 10.0], &[vec![2.0], vec![8.0]])).unwrap();
    assert_eq!(sol.d_star, 2.0);
    assert_eq!(sol.assignment, [0, 1]);

    // One robot must sweep both goals; the nearer end goes first.
    let sol = optimal_makespan(&line(&[0.0], &[vec![-1.0], vec![3.0]])).unwrap();
    assert_eq!(sol.d_star, 5.0);
    assert_eq!(sol.routes[0].iter().map(|(g, _)| *g).collect::<Vec<_>>(), [0, 1]);

    // Any cell of a cluster satisfies its goal.
    let sol = optimal_makespan(&line(&[0.0], &[vec![-6.0, 1.5]])).unwrap();
    assert_eq!(sol.d_star, 1.5);
}

#[test]
fn degenerate_instances() {
    assert!(matches!(optimal_makespan(&line(&[], &[vec![1.0]])), Err(MetricsError::Infeasible(_))));
    let none = optimal_makespan(&line(&[0.0, 1.0], &[])).unwrap();
    assert_eq!(none.d_star, 0.0);
    let mut inst = line(&[0.0], &[vec![1.0]]);
    inst.start_dist[0][0] = f64::INFINITY;
    assert!(optimal_makespan(&inst).is_err());
}

#[test]
fn exact_solver_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    while checked < 60 {
        let Some(case) = random_case(&mut rng, 3, 3, 3) else { continue };
        let want = brute_force_makespan(&case);
        let tagged: Vec<(GoalId, Vec<Cell>)> =
            case.clusters.iter().cloned().enumerate().map(|(g, c)| (g as GoalId, c)).collect();
        let inst = MakespanInstance::from_clusters(&case.scene, &case.starts, &tagged);
        let got = optimal_makespan(&inst).unwrap();
        assert!((got.d_star - want).abs() < 1e-9, "case {checked}: {} vs {want}", got.d_star);
        assert!(got.d_star <= nearest_robot_upper_bound(&inst) + 1e-9);
        let worst = got.robot_costs.iter().copied().fold(0.0, f64::max);
        assert_eq!(worst, got.d_star);
        checked += 1;
    }
}

fn random_line(rng: &mut ChaCha8Rng, n: usize, m: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let starts = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
    let goals = (0..m)
        .map(|_| (0..rng.random_range(1..=3)).map(|_| rng.random_range(-20.0..20.0)).collect())
        .collect();
    (starts, goals)
}

#[test]
fn extra_robots_never_hurt_and_extra_goals_never_help() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let n = rng.random_range(1..=3);
        let m = rng.random_range(1..=5);
        let (mut starts, mut goals) = random_line(&mut rng, n, m);
        let base = optimal_makespan(&line(&starts, &goals)).unwrap().d_star;
        assert!(base <= nearest_robot_upper_bound(&line(&starts, &goals)) + 1e-9);

        starts.push(rng.random_range(-10.0..10.0));
        let more_robots = optimal_makespan(&line(&starts, &goals)).unwrap().d_star;
        assert!(more_robots <= base + 1e-9);
        starts.pop();

        goals.push(vec![rng.random_range(-20.0..20.0)]);
        let more_goals = optimal_makespan(&line(&starts, &goals)).unwrap().d_star;
        assert!(more_goals >= base - 1e-9);
    }
}

fn outcome(found: &[bool], steps: &[Option<u32>], distances: Vec<f64>, max_steps: u32) -> EpisodeOutcome {
    EpisodeOutcome {
        episode_id: "e".into(),
        goals: found
            .iter()
            .zip(steps)
            .enumerate()
            .map(|(g, (f, s))| GoalOutcome { goal_id: g as GoalId, found: *f, finder: f.then_some(0), step: *s })
            .collect(),
        distances,
        steps: max_steps,
        max_steps,
    }
}

#[test]
fn episode_rows_and_summary() {
    let full = outcome(&[true, true], &[Some(40), Some(90)], vec![6.0, 9.0], 500);
    let half = outcome(&[true, false], &[Some(10), None], vec![3.0, 2.0], 500);
    let r1 = EpisodeMetrics::evaluate(&full, 4.5).unwrap();
    assert_eq!((r1.sr, r1.mspl, r1.max_dj, r1.steps), (1.0, 0.5, 9.0, 90));
    let r2 = EpisodeMetrics::evaluate(&half, 1.5).unwrap();
    assert_eq!((r2.sr, r2.mspl, r2.steps), (0.5, 0.25, 500));

    let sum = summarize(&[full.clone(), half.clone()], &[r1, r2]).unwrap();
    assert_eq!(sum.episodes, 2);
    assert_eq!(sum.sr, 0.75);
    assert_eq!(sum.mspl, 0.375);
    assert_eq!(sum.mean_makespan, 6.0);
    assert_eq!(sum.mean_timesteps, 295.0);

    assert_eq!(compute_sr(&[]), Err(MetricsError::EmptySet));
    assert_eq!(summarize(&[], &[]), Err(MetricsError::EmptySet));
}

proptest! {
    #[test]
    fn mspl_is_bounded_by_success(sr in 0.0f64..=1.0, d_star in 0.0f64..50.0, ds in prop::collection::vec(0.0f64..80.0, 1..5)) {
        let v = compute_mspl(sr, d_star, &ds).unwrap();
        prop_assert!((0.0..=sr + 1e-12).contains(&v));
    }

    #[test]
    fn optimum_is_below_the_nearest_robot_bound(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(1..=4);
        let m = rng.random_range(1..=6);
        let (starts, goals) = random_line(&mut rng, n, m);
        let inst = line(&starts, &goals);
        prop_assert!(optimal_makespan(&inst).unwrap().d_star <= nearest_robot_upper_bound(&inst) + 1e-9);
    }
}
