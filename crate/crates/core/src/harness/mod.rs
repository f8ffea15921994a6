//! Episode runner, deterministic traces, batch evaluation, trace audits,
//! rendering and the synthetic scene generator.

mod audit;
mod batch;
pub mod fixtures;
mod frames;
mod render;
mod runner;
pub mod scenegen;
mod suite;
mod trace;

use serde::{Deserialize, Serialize};

pub use audit::{audit_trace, AuditReport};
pub use batch::{run_batch, BatchEntry, BatchReport, ErrorRow, TeamSummary};
pub use frames::LocalFrame;
pub use render::{
    frontier_svg, merge_overlay_svg, render_frontiers, render_merge_overlay, render_trace, trajectory_svg, write_pgm,
    RenderKind,
};
pub use runner::{run_episode, validate_goal_event, EpisodeRun};
pub use suite::{generate_suite, load_suite, SuiteEpisode, SuiteSpec};
pub use trace::{
    AlignmentRecord, EpisodeTrace, ReceivedRecord, RobotFinal, SentRecord, StepRecord, TraceFooter, TraceHeader,
};

use crate::agent::AgentConfig;
use crate::gridworld::{NoiseProfile, SceneError, SensorConfig};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("trace error: {0}")]
    Trace(String),
    #[error("empty trace")]
    EmptyTrace,
}

/// Everything besides the scene and episode that determines a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    /// Use only the first `n` start poses.
    pub n: Option<usize>,
    /// Overrides the episode budget.
    pub max_steps: Option<u32>,
    pub agent: AgentConfig,
    pub sensor: SensorConfig,
    pub noise: NoiseProfile,
    /// Give each robot a seeded quarter-turn frame; otherwise frames differ
    /// by translation only.
    pub rotated_frames: bool,
    /// Include per-robot final maps in the trace footer.
    pub record_maps: bool,
}

impl RunConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            n: None,
            max_steps: None,
            agent: AgentConfig::default(),
            sensor: SensorConfig::default(),
            noise: NoiseProfile::default(),
            rotated_frames: true,
            record_maps: true,
        }
    }

    pub fn with_comm(mut self, r_comm: f64, tau: u32) -> Self {
        self.agent.comm.r_comm = r_comm;
        self.agent.comm.tau = tau;
        self
    }

    pub fn with_robots(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }
}
