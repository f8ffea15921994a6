//! Two robots in a hall with unexplored space at both ends. Without the
//! neighbour term both head for the same nearer end; with it they split.

use std::collections::BTreeSet;

use semnav::agent::{AgentConfig, AgentState, Mode};
use semnav::coordination::PeerState;
use semnav::grid::{Cell, Heading, Pose};
use semnav::gridworld::{GoalSpec, Modality, Observation};
use semnav::mapping::LogOddsMap;

fn hall() -> LogOddsMap {
    let mut m = LogOddsMap::new(0, 0.25);
    for r in 0..12 {
        for c in 0..21 {
            m.set_cell(Cell::new(r, c), if r == 0 || r == 11 { 2.0 } else { -2.0 }, true);
        }
    }
    m
}

fn targets(use_neighbors: bool, cells: [Cell; 2]) -> Vec<Option<Cell>> {
    let cfg = AgentConfig { use_neighbors, ..AgentConfig::default() };
    let goal = GoalSpec {
        goal_id: 0,
        modality: Modality::Category,
        valid_instance_ids: BTreeSet::from([1]),
        success_radius: 1.0,
        label: "plant".into(),
    };
    (0..2)
        .map(|i| {
            let mut a = AgentState::new(i, i as u32, 0.25, vec![goal.clone()], 0);
            a.map = hall();
            let peer = Pose::at_cell(cells[1 - i], 0.25, Heading::new(0));
            a.coord.peers.insert(1 - i, PeerState { last_known_pose: Some(peer), ..PeerState::default() });
            let pose = Pose::at_cell(cells[i], 0.25, Heading::new(0));
            let obs = Observation { robot_id: i, pose, cell: cells[i], visible_cells: Vec::new(), detections: Vec::new() };
            a.decide(&obs, &[], &[], 0, &cfg);
            match a.mode {
                Mode::Explore { target } => target,
                _ => None,
            }
        })
        .collect()
}

fn main() {
    let cells = [Cell::new(5, 6), Cell::new(5, 9)];
    println!("robots at {cells:?}; frontiers at column 0 and column 20");
    println!("nearest frontier only: {:?}", targets(false, cells));
    println!("neighbour weighting:   {:?}", targets(true, cells));
}
