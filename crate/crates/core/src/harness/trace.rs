//! JSON-lines episode traces: one header line, one line per (step, robot),
//! one footer line.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{HarnessError, RunConfig};
use crate::agent::Mode;
use crate::alignment::{AlignmentResult, RigidTransform2D};
use crate::coordination::MessageKind;
use crate::grid::{Cell, Pose};
use crate::gridworld::{Action, EpisodeFile, GoalId, RobotId, SceneFile};
use crate::mapping::MapSnapshot;
use crate::metrics::EpisodeOutcome;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub episode: EpisodeFile,
    pub scene: SceneFile,
    /// World-to-local transform per robot.
    pub frames: Vec<RigidTransform2D>,
    pub config: RunConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentRecord {
    pub kind: MessageKind,
    pub to: RobotId,
    pub bytes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReceivedRecord {
    pub from: RobotId,
    pub kind: MessageKind,
    pub sent: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentRecord {
    pub peer: RobotId,
    pub result: AlignmentResult,
    /// Against the true peer-to-own transform, radians.
    pub rotation_error: f64,
    /// Metres.
    pub translation_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u32,
    pub robot: RobotId,
    /// World pose before the action.
    pub pose: Pose,
    pub action: Action,
    pub blocked: bool,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waypoint: Option<Cell>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sent: Vec<SentRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub received: Vec<ReceivedRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal_event: Option<GoalId>,
    /// Ground-truth verdict on `goal_event`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal_valid: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub merges: Vec<RobotId>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alignments: Vec<AlignmentRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub align_errors: Vec<(RobotId, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotFinal {
    pub robot: RobotId,
    /// Own-frame pose.
    pub pose: Pose,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<MapSnapshot>,
    pub known_poses: Vec<(RobotId, Pose)>,
    pub transforms: Vec<(RobotId, RigidTransform2D)>,
    pub estimate_calls: u64,
    pub merges: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFooter {
    pub outcome: EpisodeOutcome,
    pub d_star: Option<f64>,
    pub robots: Vec<RobotFinal>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum TraceLine {
    Header(Box<TraceHeader>),
    Step(Box<StepRecord>),
    Footer(Box<TraceFooter>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeTrace {
    pub header: TraceHeader,
    /// Ascending by (step, robot).
    pub steps: Vec<StepRecord>,
    pub footer: TraceFooter,
}

impl EpisodeTrace {
    pub fn robots(&self) -> usize {
        self.header.frames.len()
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let mut push = |line: &TraceLine| {
            out.push_str(&serde_json::to_string(line).expect("trace serialises"));
            out.push('\n');
        };
        push(&TraceLine::Header(Box::new(self.header.clone())));
        for s in &self.steps {
            push(&TraceLine::Step(Box::new(s.clone())));
        }
        push(&TraceLine::Footer(Box::new(self.footer.clone())));
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, HarnessError> {
        Self::read(text.as_bytes())
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self, HarnessError> {
        let mut header = None;
        let mut steps = Vec::new();
        let mut footer = None;
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: TraceLine =
                serde_json::from_str(&line).map_err(|e| HarnessError::Trace(format!("line {}: {e}", i + 1)))?;
            match parsed {
                TraceLine::Header(h) => header = Some(*h),
                TraceLine::Step(s) => steps.push(*s),
                TraceLine::Footer(f) => footer = Some(*f),
            }
        }
        match (header, footer) {
            (None, None) if steps.is_empty() => Err(HarnessError::EmptyTrace),
            (Some(header), Some(footer)) => Ok(Self { header, steps, footer }),
            _ => Err(HarnessError::Trace("missing header or footer".into())),
        }
    }

    /// SHA-256 of the JSON-lines encoding, hex.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_jsonl().as_bytes()))
    }

    pub fn write(&self, path: &Path) -> Result<(), HarnessError> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        f.write_all(self.to_jsonl().as_bytes())?;
        f.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        Self::read(std::io::BufReader::new(std::fs::File::open(path)?))
    }

    pub fn robot_steps(&self, robot: RobotId) -> impl Iterator<Item = &StepRecord> {
        self.steps.iter().filter(move |s| s.robot == robot)
    }
}
