//! Success rate, SPL, the multi-agent MSPL and the optimal makespan.

mod makespan;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use makespan::{
    nearest_robot_upper_bound, optimal_makespan, representatives, success_cells, MakespanInstance, MakespanSolution,
    DEFAULT_MAX_REPRESENTATIVES, MAX_GOALS,
};

use crate::gridworld::{GoalId, RobotId};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("optimal distance is undefined")]
    UndefinedOptimal,
    #[error("empty episode set")]
    EmptySet,
    #[error("infeasible makespan instance: {0}")]
    Infeasible(String),
    #[error("{0} goals exceed the exact solver limit")]
    TooLarge(usize),
}

/// `S * d* / max(d, d*)`; a zero optimum reached at zero cost scores `S`.
pub fn compute_spl(success: bool, d_star: f64, d: f64) -> Result<f64, MetricsError> {
    if !d_star.is_finite() || d_star < 0.0 {
        return Err(MetricsError::UndefinedOptimal);
    }
    Ok(ratio(if success { 1.0 } else { 0.0 }, d_star, d))
}

fn ratio(scale: f64, d_star: f64, d: f64) -> f64 {
    if scale == 0.0 {
        return 0.0;
    }
    let denom = d.max(d_star);
    if denom == 0.0 {
        scale
    } else {
        scale * d_star / denom
    }
}

/// `SR * d* / max(d*, max_j d_j)`.
pub fn compute_mspl(sr: f64, d_star: f64, distances: &[f64]) -> Result<f64, MetricsError> {
    if !d_star.is_finite() || d_star < 0.0 {
        return Err(MetricsError::UndefinedOptimal);
    }
    let max_d = distances.iter().copied().fold(0.0, f64::max);
    Ok(ratio(sr, d_star, max_d))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalOutcome {
    pub goal_id: GoalId,
    pub found: bool,
    pub finder: Option<RobotId>,
    /// Steps elapsed when the goal was found, counting the stop.
    pub step: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeOutcome {
    pub episode_id: String,
    pub goals: Vec<GoalOutcome>,
    /// Metres translated per robot.
    pub distances: Vec<f64>,
    pub steps: u32,
    pub max_steps: u32,
}

impl EpisodeOutcome {
    pub fn robots(&self) -> usize {
        self.distances.len()
    }

    pub fn found(&self) -> usize {
        self.goals.iter().filter(|g| g.found).count()
    }

    pub fn success_rate(&self) -> f64 {
        if self.goals.is_empty() {
            0.0
        } else {
            self.found() as f64 / self.goals.len() as f64
        }
    }

    pub fn max_distance(&self) -> f64 {
        self.distances.iter().copied().fold(0.0, f64::max)
    }

    /// Step of the last goal event when every goal was found, else the budget.
    pub fn timesteps(&self) -> u32 {
        if !self.goals.is_empty() && self.goals.iter().all(|g| g.found) {
            self.goals.iter().filter_map(|g| g.step).max().unwrap_or(0)
        } else {
            self.max_steps
        }
    }
}

/// Found goals over all goals, pooled.
pub fn compute_sr(outcomes: &[EpisodeOutcome]) -> Result<f64, MetricsError> {
    let total: usize = outcomes.iter().map(|o| o.goals.len()).sum();
    if total == 0 {
        return Err(MetricsError::EmptySet);
    }
    let found: usize = outcomes.iter().map(|o| o.found()).sum();
    Ok(found as f64 / total as f64)
}

/// One CSV row per evaluated episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub episode_id: String,
    pub n: usize,
    pub m: usize,
    pub sr: f64,
    pub mspl: f64,
    pub d_star: f64,
    pub max_dj: f64,
    pub steps: u32,
}

impl EpisodeMetrics {
    pub fn evaluate(outcome: &EpisodeOutcome, d_star: f64) -> Result<Self, MetricsError> {
        let sr = outcome.success_rate();
        Ok(Self {
            episode_id: outcome.episode_id.clone(),
            n: outcome.robots(),
            m: outcome.goals.len(),
            sr,
            mspl: compute_mspl(sr, d_star, &outcome.distances)?,
            d_star,
            max_dj: outcome.max_distance(),
            steps: outcome.timesteps(),
        })
    }
}

pub const CSV_HEADER: &str = "episode_id,n,m,SR,MSPL,d_star,max_dj,steps";

pub fn write_csv<W: Write>(mut w: W, rows: &[EpisodeMetrics]) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{:.6},{:.6},{:.6},{:.6},{}",
            r.episode_id, r.n, r.m, r.sr, r.mspl, r.d_star, r.max_dj, r.steps
        )?;
    }
    Ok(())
}

/// Aggregate over a set of episodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub episodes: usize,
    pub sr: f64,
    pub mspl: f64,
    pub mean_makespan: f64,
    pub mean_timesteps: f64,
}

pub fn summarize(outcomes: &[EpisodeOutcome], rows: &[EpisodeMetrics]) -> Result<Summary, MetricsError> {
    if rows.is_empty() {
        return Err(MetricsError::EmptySet);
    }
    let n = rows.len() as f64;
    Ok(Summary {
        episodes: rows.len(),
        sr: compute_sr(outcomes)?,
        mspl: rows.iter().map(|r| r.mspl).sum::<f64>() / n,
        mean_makespan: rows.iter().map(|r| r.max_dj).sum::<f64>() / n,
        mean_timesteps: rows.iter().map(|r| r.steps as f64).sum::<f64>() / n,
    })
}
