//! Lookahead waypoint selection and the heading controller.

use crate::grid::{line_cells, wrap_angle, Cell, Heading, Pose};
use crate::gridworld::{Action, FORWARD_STEP_M};
use crate::mapping::{plan_path, CellClass, LogOddsMap, PlannedPath, PlannerConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("no path to the target at any inflation")]
pub struct Stuck;

fn clear_line(map: &LogOddsMap, from: Cell, to: Cell) -> bool {
    line_cells(from, to).iter().all(|c| map.classify(*c) != CellClass::Occupied)
}

/// Farthest path cell within `r_local` (Chebyshev, cells) reachable in a
/// straight line, halving the radius when none qualifies.
pub fn pick_waypoint(map: &LogOddsMap, path: &PlannedPath, r_local: i32) -> Cell {
    let from = path.cells[0];
    if path.cells.len() == 1 {
        return from;
    }
    let mut r = r_local.max(1);
    loop {
        let hit = path
            .cells
            .iter()
            .enumerate()
            .skip(1)
            .take_while(|(_, c)| c.chebyshev(from) <= r)
            .filter(|(_, c)| clear_line(map, from, **c))
            .map(|(i, _)| i)
            .last();
        if let Some(i) = hit {
            return path.cells[i];
        }
        if r == 1 {
            return path.cells[1];
        }
        r = (r / 2).max(1);
    }
}

pub fn next_waypoint(
    map: &LogOddsMap,
    from: Cell,
    target: Cell,
    r_safe: u32,
    r_local: i32,
    planner: &PlannerConfig,
) -> Result<(Cell, PlannedPath), Stuck> {
    let path = plan_path(map, from, target, r_safe, planner).ok_or(Stuck)?;
    Ok((pick_waypoint(map, &path, r_local), path))
}

/// Greedy heading controller. Turns the short way toward the admissible
/// heading closest to the waypoint bearing; drives when already aligned.
pub fn steer(map: &LogOddsMap, pose: &Pose, cell: Cell, waypoint: Cell, deadband: f64) -> Action {
    if waypoint == cell {
        return Action::TurnLeft;
    }
    let res = map.resolution;
    let (wx, wy) = waypoint.center(res);
    let bearing = (wy - pose.y).atan2(wx - pose.x);
    let admissible = |h: Heading| {
        let (ux, uy) = h.unit();
        let dest = Cell::containing(pose.x + FORWARD_STEP_M * ux, pose.y + FORWARD_STEP_M * uy, res);
        map.classify(dest) != CellClass::Occupied
    };
    let err = |h: Heading| wrap_angle(h.radians() - bearing).abs();
    let current = pose.heading;
    if admissible(current) && err(current) <= deadband {
        return Action::Forward;
    }
    let best = (0..12)
        .map(Heading::new)
        .filter(|h| admissible(*h))
        .min_by(|a, b| {
            err(*a)
                .total_cmp(&err(*b))
                .then(turn_steps(current, *a).cmp(&turn_steps(current, *b)))
                .then(a.cmp(b))
        });
    match best {
        None => Action::TurnLeft,
        Some(h) if h == current => Action::Forward,
        Some(h) => {
            let diff = (h.steps() as i32 - current.steps() as i32).rem_euclid(12);
            if diff <= 6 {
                Action::TurnRight
            } else {
                Action::TurnLeft
            }
        }
    }
}

fn turn_steps(from: Heading, to: Heading) -> i32 {
    let d = (to.steps() as i32 - from.steps() as i32).rem_euclid(12);
    d.min(12 - d)
}
