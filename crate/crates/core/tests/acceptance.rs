//! One line per criterion; exits nonzero if any fails.

mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semnav::agent::{AgentConfig, AgentState, Mode};
use semnav::alignment::{align_maps, merge_maps, AlignmentConfig, RigidTransform2D};
use semnav::coordination::{Message, PeerState};
use semnav::grid::{Cell, Heading, Pose};
use semnav::gridworld::{
    observe, GoalId, GoalSpec, GridScene, Modality, Observation, ObservationStream, Occupancy, SensorConfig,
    DetectionOracle,
};
use semnav::harness::fixtures::{alignment_fixture, FixtureConfig};
use semnav::harness::scenegen::{EpisodeGenConfig, SceneGenConfig};
use semnav::harness::{generate_suite, run_batch, run_episode, BatchReport, RunConfig, SuiteSpec};
use semnav::mapping::{integrate_observation, CellClass, InstanceRegistry, LogOddsMap, LogOddsParams, DEFAULT_ASSOC_RADIUS};
use semnav::metrics::{compute_mspl, compute_spl, optimal_makespan, MakespanInstance};

use common::oracle::{brute_force_makespan, random_case};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn mspl_spl_identity() -> Verdict {
    let ep_cfg = EpisodeGenConfig { robots: 1, goals: 1, ..EpisodeGenConfig::default() };
    let suite = generate_suite(200, 101, &SceneGenConfig::default(), &ep_cfg);
    let mut worst = 0.0f64;
    let mut successes = 0;
    for item in &suite.episodes {
        let ep = item.episode.as_ref().unwrap();
        let run = run_episode(&suite.scenes[&ep.scene_id], ep, &RunConfig::new(ep.seed)).unwrap();
        let d_star = run.d_star.unwrap();
        let success = run.outcome.goals[0].found;
        successes += success as usize;
        let spl = compute_spl(success, d_star, run.outcome.distances[0]).unwrap();
        let mspl = compute_mspl(run.outcome.success_rate(), d_star, &run.outcome.distances).unwrap();
        worst = worst.max((spl - mspl).abs());
    }
    verdict(worst <= f64::EPSILON, format!("200 episodes, {successes} successes, max |SPL-MSPL| = {worst:e}"))
}

fn makespan_exactness() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(300);
    let (mut checked, mut mismatches) = (0, 0);
    while checked < 300 {
        let Some(case) = random_case(&mut rng, 3, 4, 3) else { continue };
        let want = brute_force_makespan(&case);
        let tagged: Vec<(GoalId, Vec<Cell>)> =
            case.clusters.iter().cloned().enumerate().map(|(g, c)| (g as GoalId, c)).collect();
        let got = optimal_makespan(&MakespanInstance::from_clusters(&case.scene, &case.starts, &tagged)).unwrap();
        if (got.d_star - want).abs() > 1e-9 {
            mismatches += 1;
        }
        checked += 1;
    }
    verdict(mismatches == 0, format!("{checked} instances, {mismatches} mismatches"))
}

fn transform_recovery() -> Verdict {
    let cfg = AlignmentConfig::default();
    let (mut accepted, mut wrong) = (0, 0);
    let (mut max_rot, mut max_trans) = (0.0f64, 0.0f64);
    let mut min_overlap = f64::INFINITY;
    for seed in 0..50 {
        let fx = alignment_fixture(seed, &FixtureConfig::default());
        min_overlap = min_overlap.min(fx.overlap);
        let r = align_maps(&fx.map_a, &fx.reg_a, &fx.map_b, &fx.reg_b, &cfg, &mut ChaCha8Rng::seed_from_u64(seed));
        let Ok(r) = r else { continue };
        if !r.accepted {
            continue;
        }
        accepted += 1;
        let rot = r.transform.rotation_error(&fx.truth).to_degrees();
        let trans = r.transform.translation_error(&fx.truth);
        max_rot = max_rot.max(rot);
        max_trans = max_trans.max(trans);
        if rot > 2.0 || trans > 0.5 {
            wrong += 1;
        }
    }
    let rate = accepted as f64 / 50.0;
    verdict(
        wrong == 0 && rate >= 0.8 && min_overlap >= 0.3,
        format!(
            "{accepted}/50 accepted ({:.0}%), {wrong} wrong, max error {max_rot:.2} deg / {max_trans:.3} m, min overlap {min_overlap:.2}",
            rate * 100.0
        ),
    )
}

fn logodds_correction() -> Verdict {
    let p = LogOddsParams::default();
    let k = (p.occ_hit / p.free_miss).ceil() as usize + 1;
    let cell = Cell::new(2, 3);
    let obs = |occ| Observation {
        robot_id: 0,
        pose: Pose::at_cell(Cell::new(0, 0), 0.25, Heading::new(0)),
        cell: Cell::new(0, 0),
        visible_cells: vec![(cell, occ)],
        detections: Vec::new(),
    };
    let mut m = LogOddsMap::new(0, 0.25);
    let mut reg = InstanceRegistry::new();
    integrate_observation(&mut m, &mut reg, &obs(Occupancy::Obstacle), &p, DEFAULT_ASSOC_RADIUS);
    for _ in 0..k {
        integrate_observation(&mut m, &mut reg, &obs(Occupancy::Free), &p, DEFAULT_ASSOC_RADIUS);
    }
    let class = m.classify(cell);
    verdict(
        class == CellClass::FreeExplored,
        format!("1 obstacle then {k} free observations -> {class:?} (l = {:.2})", m.occupancy(cell)),
    )
}

fn merge_rule() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let id = RigidTransform2D::identity();
    let cell = Cell::new(0, 0);
    let one = |v: f64| {
        let mut m = LogOddsMap::new(0, 0.25);
        m.set_cell(cell, v, true);
        m
    };
    let (mut pairs, mut bad) = (0, 0);
    while pairs < 1000 {
        let (x, y): (f64, f64) = (rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        if x.abs() == y.abs() {
            continue;
        }
        let mut ab = one(x);
        merge_maps(&mut ab, &one(y), &id);
        let mut ba = one(y);
        merge_maps(&mut ba, &one(x), &id);
        let mut again = ab.clone();
        merge_maps(&mut again, &one(y), &id);
        if ab.occupancy(cell) != ba.occupancy(cell) || again != ab {
            bad += 1;
        }
        pairs += 1;
    }
    verdict(bad == 0, format!("{pairs} cell pairs, {bad} violations"))
}

fn trend_suite() -> SuiteSpec {
    generate_suite(100, 7, &SceneGenConfig::default(), &EpisodeGenConfig::default())
}

fn comms_ablation(with: &BatchReport, without: &BatchReport) -> Verdict {
    let (a, b) = (with.team(2).unwrap(), without.team(2).unwrap());
    let drop = 1.0 - a.mean_makespan / b.mean_makespan;
    verdict(
        a.sr >= b.sr && drop >= 0.05,
        format!(
            "r_comm 5: SR {:.3}, makespan {:.2} m; r_comm 0.1: SR {:.3}, makespan {:.2} m; reduction {:.1}%",
            a.sr,
            a.mean_makespan,
            b.sr,
            b.mean_makespan,
            drop * 100.0
        ),
    )
}

fn team_scaling(report: &BatchReport) -> Verdict {
    let rows: Vec<_> = (1..=4).map(|n| report.team(n).unwrap()).collect();
    let mut pass = true;
    for w in rows.windows(2) {
        // SR in percentage points, timesteps in steps.
        pass &= (w[1].sr - w[0].sr) * 100.0 >= -2.0;
        pass &= w[1].mean_timesteps - w[0].mean_timesteps <= 2.0;
    }
    let table: Vec<String> = rows
        .iter()
        .enumerate()
        .map(|(i, s)| format!("n={} SR {:.3} steps {:.1}", i + 1, s.sr, s.mean_timesteps))
        .collect();
    verdict(pass, table.join("; "))
}

fn corridor() -> GridScene {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corridor_20x3.scene");
    semnav::gridworld::load_scene(path).unwrap()
}

fn conflict_resolution() -> Verdict {
    let s = corridor();
    let goals = vec![GoalSpec {
        goal_id: 0,
        modality: Modality::Category,
        valid_instance_ids: BTreeSet::from([1]),
        success_radius: 1.0,
        label: "chair".into(),
    }];
    let cfg = AgentConfig::default();
    let oracle = DetectionOracle::ground_truth();
    let sensor = SensorConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut ok, mut ties, mut ties_ok) = (0, 0, 0);
    for trial in 0..100u64 {
        // Both see the chair from outside its success radius.
        let cells = [Cell::new(rng.random_range(0..3), rng.random_range(5..=10)), Cell::new(rng.random_range(0..3), rng.random_range(5..=10))];
        let prio: [u32; 2] = if rng.random_bool(0.5) { [0, 1] } else { [1, 0] };
        let tie = rng.random_bool(0.5);
        let scores = if tie { [0.9, 0.9] } else { [rng.random_range(0.8..1.0), rng.random_range(0.8..1.0)] };
        let mut agents: Vec<AgentState> = (0..2).map(|i| AgentState::new(i, prio[i], 0.25, goals.clone(), trial)).collect();
        let obs: Vec<Observation> = (0..2)
            .map(|i| {
                let pose = Pose::at_cell(cells[i], 0.25, Heading::new(0));
                let mut o = observe(&s, i, &pose, &sensor, &oracle, &mut ObservationStream::new(trial));
                for d in &mut o.detections {
                    d.score = scores[i];
                }
                o
            })
            .collect();
        let first: Vec<_> = (0..2).map(|i| agents[i].decide(&obs[i], &[], &[1 - i], 0, &cfg)).collect();
        let both_pursue = agents.iter().all(|a| matches!(a.mode, Mode::GotoGoal { goal_id: 0, .. }));
        let inbox: Vec<Vec<Message>> = (0..2)
            .map(|i| first[1 - i].outbox.iter().filter(|e| e.receiver == i).map(|e| e.message.clone()).collect())
            .collect();
        for i in 0..2 {
            agents[i].decide(&obs[i], &inbox[i], &[1 - i], 1, &cfg);
        }
        let pursuing: Vec<usize> =
            (0..2).filter(|i| matches!(agents[*i].mode, Mode::GotoGoal { goal_id: 0, .. })).collect();
        let expected = if scores[0] != scores[1] {
            if scores[0] > scores[1] { 0 } else { 1 }
        } else if prio[0] < prio[1] {
            0
        } else {
            1
        };
        let good = both_pursue && pursuing == [expected];
        ok += good as usize;
        if tie {
            ties += 1;
            ties_ok += good as usize;
        }
    }
    verdict(ok == 100, format!("{ok}/100 scenarios with a single pursuer, ties resolved by priority {ties_ok}/{ties}"))
}

fn cooldown(reports: &[&BatchReport]) -> Verdict {
    let entries: Vec<_> = reports.iter().flat_map(|r| r.entries.iter()).collect();
    let violations: usize = entries.iter().map(|e| e.audit.cooldown.len()).sum();
    let full_maps: usize = entries.iter().map(|e| e.audit.full_maps).sum();
    let clean = entries.iter().filter(|e| e.audit.is_clean()).count();
    verdict(
        violations == 0,
        format!("{} traces, {full_maps} full maps, {violations} cooldown violations, {clean} fully clean", entries.len()),
    )
}

fn determinism(suite: &SuiteSpec, report: &BatchReport, base: &RunConfig) -> Verdict {
    let mut same = 0;
    let picks: Vec<_> = report.entries.iter().filter(|e| e.n == 2).take(10).collect();
    for e in &picks {
        let item = suite.episodes.iter().find(|x| x.source == e.source).unwrap();
        let ep = item.episode.as_ref().unwrap();
        let mut cfg = *base;
        cfg.seed = ep.seed ^ base.seed;
        cfg.n = Some(e.n);
        let again = run_episode(&suite.scenes[&ep.scene_id], ep, &cfg).unwrap();
        same += (again.trace.hash() == e.hash) as usize;
    }
    verdict(same == picks.len() && !picks.is_empty(), format!("{same}/{} re-runs reproduce the batch trace hash", picks.len()))
}

/// Open hall with unknown space past both short ends.
fn hall() -> LogOddsMap {
    let mut m = LogOddsMap::new(0, 0.25);
    for r in 0..12 {
        for c in 0..21 {
            m.set_cell(Cell::new(r, c), if r == 0 || r == 11 { 2.0 } else { -2.0 }, true);
        }
    }
    m
}

fn frontier_spread() -> Verdict {
    let cells = [Cell::new(5, 6), Cell::new(5, 9)];
    let pick = |use_neighbors: bool| -> Vec<Option<i32>> {
        let cfg = AgentConfig { use_neighbors, ..AgentConfig::default() };
        (0..2)
            .map(|i| {
                let goal = GoalSpec {
                    goal_id: 0,
                    modality: Modality::Category,
                    valid_instance_ids: BTreeSet::from([99]),
                    success_radius: 1.0,
                    label: String::new(),
                };
                let mut a = AgentState::new(i, i as u32, 0.25, vec![goal], 0);
                a.map = hall();
                let peer = Pose::at_cell(cells[1 - i], 0.25, Heading::new(0));
                a.coord.peers.insert(1 - i, PeerState { last_known_pose: Some(peer), ..PeerState::default() });
                let pose = Pose::at_cell(cells[i], 0.25, Heading::new(0));
                let obs = Observation { robot_id: i, pose, cell: cells[i], visible_cells: Vec::new(), detections: Vec::new() };
                a.decide(&obs, &[], &[], 0, &cfg);
                match a.mode {
                    Mode::Explore { target: Some(t) } => Some(t.col),
                    _ => None,
                }
            })
            .collect()
    };
    let with = pick(true);
    let without = pick(false);
    let spread = with[0].is_some() && with[1].is_some() && with[0] != with[1];
    let herd = without == [Some(0), Some(0)];
    verdict(spread && herd, format!("with neighbours target cols {with:?}, without {without:?}"))
}

fn main() {
    let mut failed = 0;
    let mut report = |n: u32, name: &str, start: Instant, v: Verdict| {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        failed += !v.pass as usize;
        println!("[{tag}] {n:>2} {name}: {} ({:.1}s)", v.detail, start.elapsed().as_secs_f64());
    };

    let t = Instant::now();
    report(1, "MSPL reduces to SPL", t, mspl_spl_identity());
    let t = Instant::now();
    report(2, "makespan exactness", t, makespan_exactness());
    let t = Instant::now();
    report(3, "transform recovery", t, transform_recovery());
    let t = Instant::now();
    report(4, "log-odds correction", t, logodds_correction());
    let t = Instant::now();
    report(5, "abs-max merge", t, merge_rule());

    let t = Instant::now();
    let suite = trend_suite();
    let base = RunConfig::new(0).with_comm(5.0, 10);
    let teams = run_batch(&suite, &[1, 2, 3, 4], &base, None).unwrap();
    let isolated = run_batch(&suite, &[2], &RunConfig::new(0).with_comm(0.1, 10), None).unwrap();
    let batch_time = t.elapsed().as_secs_f64();
    println!("       suite: {} episodes, batch runtime {batch_time:.1}s", suite.episodes.len());
    let t = Instant::now();
    report(6, "communication ablation", t, comms_ablation(&teams, &isolated));
    let t = Instant::now();
    report(7, "team-size trend", t, team_scaling(&teams));
    let t = Instant::now();
    report(8, "conflict resolution", t, conflict_resolution());
    let t = Instant::now();
    report(9, "full-map cooldown", t, cooldown(&[&teams, &isolated]));
    let t = Instant::now();
    report(10, "determinism", t, determinism(&suite, &teams, &base));
    let t = Instant::now();
    report(11, "frontier weighting", t, frontier_spread());

    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
