//! SVG and PGM output for traces and maps.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::trace::EpisodeTrace;
use super::HarnessError;
use crate::alignment::{merge_maps, RigidTransform2D};
use crate::coordination::{distance_to_frontier, frontier_weight};
use crate::grid::{Cell, Pose};
use crate::gridworld::GridScene;
use crate::mapping::{cost_field, decode_snapshot, extract_frontiers, CellClass, LogOddsMap, PlannerConfig, DEFAULT_MIN_FRONTIER};
use crate::mapping::snapshot::encode_pgm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RenderKind {
    Trajectory,
    MergeOverlay,
    Frontier,
}

const PX: f64 = 12.0;
const ROBOT_COLORS: [&str; 6] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

struct Svg {
    body: String,
    w: f64,
    h: f64,
}

impl Svg {
    fn new() -> Self {
        Self { body: String::new(), w: 0.0, h: 0.0 }
    }

    fn extend(&mut self, x: f64, y: f64) {
        self.w = self.w.max(x);
        self.h = self.h.max(y);
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, opacity: f64) {
        let _ = writeln!(
            self.body,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="{fill}" fill-opacity="{opacity}"/>"#
        );
        self.extend(x + w, y + h);
    }

    fn text(&mut self, x: f64, y: f64, size: f64, s: &str) {
        let _ = writeln!(self.body, r#"<text x="{x:.2}" y="{y:.2}" font-size="{size}" font-family="sans-serif">{s}</text>"#);
    }

    fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\" viewBox=\"0 0 {:.0} {:.0}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.w + PX,
            self.h + PX,
            self.w + PX,
            self.h + PX,
            self.body
        )
    }
}

fn scene_layer(svg: &mut Svg, scene: &GridScene, goal_instances: &[i64]) {
    for c in scene.cells() {
        if !scene.is_free(c) {
            svg.rect(c.col as f64 * PX, c.row as f64 * PX, PX, PX, "#404040", 1.0);
        }
    }
    for inst in &scene.instances {
        let fill = if goal_instances.contains(&inst.instance_id) { "#e8b000" } else { "#a0a0a0" };
        for c in &inst.footprint {
            svg.rect(c.col as f64 * PX, c.row as f64 * PX, PX, PX, fill, 1.0);
        }
    }
}

fn to_px(p: &Pose, res: f64) -> (f64, f64) {
    (p.x / res * PX, p.y / res * PX)
}

/// Scene, per-robot world paths and goal stops; valid stops are discs,
/// rejected ones crosses.
pub fn trajectory_svg(trace: &EpisodeTrace) -> Result<String, HarnessError> {
    if trace.steps.is_empty() {
        return Err(HarnessError::EmptyTrace);
    }
    let scene = trace.header.scene.clone().into_scene()?;
    let res = scene.resolution;
    let goal_instances: Vec<i64> =
        trace.header.episode.goals.iter().flat_map(|g| g.valid_instance_ids.iter().copied()).collect();
    let mut svg = Svg::new();
    scene_layer(&mut svg, &scene, &goal_instances);
    for r in 0..trace.robots() {
        let color = ROBOT_COLORS[r % ROBOT_COLORS.len()];
        let pts: Vec<String> = trace
            .robot_steps(r)
            .map(|s| {
                let (x, y) = to_px(&s.pose, res);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            svg.body,
            r#"<polyline class="path" data-robot="{r}" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            pts.join(" ")
        );
        if let Some(first) = trace.robot_steps(r).next() {
            let (x, y) = to_px(&first.pose, res);
            let _ = writeln!(svg.body, r#"<rect class="start" x="{:.2}" y="{:.2}" width="8" height="8" fill="{color}"/>"#, x - 4.0, y - 4.0);
        }
        for s in trace.robot_steps(r).filter(|s| s.goal_event.is_some()) {
            let (x, y) = to_px(&s.pose, res);
            if s.goal_valid == Some(true) {
                let _ = writeln!(svg.body, r#"<circle class="goal" cx="{x:.2}" cy="{y:.2}" r="6" fill="{color}" stroke="black"/>"#);
            } else {
                let _ = writeln!(
                    svg.body,
                    r#"<path class="goal-rejected" d="M{:.2},{:.2} l10,10 m0,-10 l-10,10" stroke="black" stroke-width="2"/>"#,
                    x - 5.0,
                    y - 5.0
                );
            }
        }
    }
    Ok(svg.finish())
}

fn map_layer(svg: &mut Svg, map: &LogOddsMap, lo: Cell, dx: f64, dy: f64, occupied: &str, free: Option<&str>) {
    for c in map.explored_cells() {
        let (x, y) = (dx + (c.col - lo.col) as f64 * PX, dy + (c.row - lo.row) as f64 * PX);
        match map.classify(c) {
            CellClass::Occupied => svg.rect(x, y, PX, PX, occupied, 0.8),
            CellClass::FreeExplored => {
                if let Some(f) = free {
                    svg.rect(x, y, PX, PX, f, 0.6)
                }
            }
            _ => {}
        }
    }
}

fn union_bounds(maps: &[&LogOddsMap]) -> (Cell, Cell) {
    let mut lo = Cell::new(i32::MAX, i32::MAX);
    let mut hi = Cell::new(i32::MIN, i32::MIN);
    for m in maps {
        for c in m.explored_cells() {
            lo = Cell::new(lo.row.min(c.row), lo.col.min(c.col));
            hi = Cell::new(hi.row.max(c.row), hi.col.max(c.col));
        }
    }
    if lo.row > hi.row {
        (Cell::new(0, 0), Cell::new(0, 0))
    } else {
        (lo, hi)
    }
}

/// Occupied cells of `src` resampled into `dst`'s frame.
fn warped(src: &LogOddsMap, t: &RigidTransform2D, frame: usize) -> LogOddsMap {
    let mut out = LogOddsMap::new(frame, src.resolution);
    merge_maps(&mut out, src, t);
    out
}

/// Four panels: A alone, B alone, A (blue) with B warped into A's frame
/// (red), and the merged map.
pub fn merge_overlay_svg(a: &LogOddsMap, b: &LogOddsMap, t: &RigidTransform2D) -> String {
    let b_in_a = warped(b, t, a.frame_id);
    let mut merged = a.clone();
    merge_maps(&mut merged, b, t);
    let mut svg = Svg::new();
    let panels: [(&str, Vec<(&LogOddsMap, &str)>); 4] = [
        ("A", vec![(a, "#1f4fd6")]),
        ("B", vec![(b, "#d62728")]),
        ("overlay", vec![(a, "#1f4fd6"), (&b_in_a, "#d62728")]),
        ("merged", vec![(&merged, "#202020")]),
    ];
    let mut dx = 0.0;
    for (i, (title, layers)) in panels.iter().enumerate() {
        let maps: Vec<&LogOddsMap> = layers.iter().map(|(m, _)| *m).collect();
        let (lo, hi) = union_bounds(&maps);
        let (w, h) = ((hi.col - lo.col + 1) as f64 * PX, (hi.row - lo.row + 1) as f64 * PX);
        let _ = writeln!(svg.body, r#"<g class="panel" data-panel="{i}">"#);
        svg.text(dx, 14.0, 14.0, title);
        for (m, color) in layers {
            let free = (i != 2).then_some("#e6e6e6");
            map_layer(&mut svg, m, lo, dx, 20.0, color, free);
        }
        let _ = writeln!(svg.body, "</g>");
        svg.extend(dx + w, 20.0 + h);
        dx += w + 2.0 * PX;
    }
    svg.finish()
}

/// Frontier clusters of `map` annotated with their weight for a robot at
/// `own` given peers at `peers`.
pub fn frontier_svg(map: &LogOddsMap, own: Cell, peers: &[Cell], planner: &PlannerConfig) -> String {
    let frontiers = extract_frontiers(map, DEFAULT_MIN_FRONTIER);
    let own_field = cost_field(map, own, 0, planner);
    let peer_fields: Vec<Vec<f64>> = peers.iter().map(|p| cost_field(map, *p, 0, planner)).collect();
    let (lo, _) = union_bounds(&[map]);
    let mut svg = Svg::new();
    map_layer(&mut svg, map, lo, 0.0, 0.0, "#202020", Some("#e6e6e6"));
    for (k, f) in frontiers.iter().enumerate() {
        let d_self = distance_to_frontier(map, &own_field, f);
        let d_peers: Vec<f64> = peer_fields.iter().map(|pf| distance_to_frontier(map, pf, f)).collect();
        let w = frontier_weight(d_self, &d_peers);
        for c in &f.cells {
            svg.rect((c.col - lo.col) as f64 * PX, (c.row - lo.row) as f64 * PX, PX, PX, "#2ca02c", 0.9);
        }
        let r = f.representative;
        let label = if w.is_finite() { format!("f{k} w={w:.3}") } else { format!("f{k} unreachable") };
        svg.text((r.col - lo.col) as f64 * PX, (r.row - lo.row) as f64 * PX - 2.0, 10.0, &label);
    }
    for (cell, color) in std::iter::once((own, ROBOT_COLORS[0])).chain(peers.iter().map(|p| (*p, ROBOT_COLORS[1]))) {
        let (x, y) = (((cell.col - lo.col) as f64 + 0.5) * PX, ((cell.row - lo.row) as f64 + 0.5) * PX);
        let _ = writeln!(svg.body, r#"<circle class="robot" cx="{x:.2}" cy="{y:.2}" r="5" fill="{color}"/>"#);
    }
    svg.finish()
}

pub fn write_pgm(map: &LogOddsMap, path: &Path) -> Result<(), HarnessError> {
    std::fs::write(path, encode_pgm(map))?;
    Ok(())
}

pub fn render_merge_overlay(a: &LogOddsMap, b: &LogOddsMap, t: &RigidTransform2D, path: &Path) -> Result<(), HarnessError> {
    std::fs::write(path, merge_overlay_svg(a, b, t))?;
    Ok(())
}

pub fn render_frontiers(map: &LogOddsMap, own: Cell, peers: &[Cell], path: &Path) -> Result<(), HarnessError> {
    std::fs::write(path, frontier_svg(map, own, peers, &PlannerConfig::default()))?;
    Ok(())
}

fn final_map(trace: &EpisodeTrace, robot: usize) -> Result<LogOddsMap, HarnessError> {
    let snap = trace
        .footer
        .robots
        .get(robot)
        .and_then(|r| r.snapshot.as_ref())
        .ok_or_else(|| HarnessError::Trace(format!("no final map for robot {robot}")))?;
    decode_snapshot(snap).map(|(m, _)| m).map_err(|e| HarnessError::Trace(e.to_string()))
}

/// Writes the requested rendering of `trace` into `out_dir`; returns the
/// files written.
pub fn render_trace(trace: &EpisodeTrace, kind: RenderKind, out_dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    if trace.steps.is_empty() {
        return Err(HarnessError::EmptyTrace);
    }
    std::fs::create_dir_all(out_dir)?;
    let res = trace.header.scene.resolution_m;
    let mut written = Vec::new();
    match kind {
        RenderKind::Trajectory => {
            let p = out_dir.join("trajectory.svg");
            std::fs::write(&p, trajectory_svg(trace)?)?;
            written.push(p);
        }
        RenderKind::MergeOverlay => {
            for r in &trace.footer.robots {
                for (peer, t) in &r.transforms {
                    let a = final_map(trace, r.robot)?;
                    let b = final_map(trace, *peer)?;
                    let p = out_dir.join(format!("merge_{}_{}.svg", r.robot, peer));
                    render_merge_overlay(&a, &b, t, &p)?;
                    written.push(p);
                }
            }
        }
        RenderKind::Frontier => {
            for r in &trace.footer.robots {
                let map = final_map(trace, r.robot)?;
                let peers: Vec<Cell> = r.known_poses.iter().map(|(_, p)| p.cell(res)).collect();
                let p = out_dir.join(format!("frontiers_{}.svg", r.robot));
                render_frontiers(&map, r.pose.cell(res), &peers, &p)?;
                written.push(p);
                let pgm = out_dir.join(format!("map_{}.pgm", r.robot));
                write_pgm(&map, &pgm)?;
                written.push(pgm);
            }
        }
    }
    Ok(written)
}
