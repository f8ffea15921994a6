//! Parallel evaluation of a suite over several team sizes.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::audit::{audit_trace, AuditReport};
use super::runner::run_episode;
use super::suite::SuiteSpec;
use super::trace::EpisodeTrace;
use super::{HarnessError, RunConfig};
use crate::metrics::{summarize, write_csv, EpisodeMetrics, EpisodeOutcome, Summary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub source: String,
    pub n: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchEntry {
    pub source: String,
    pub n: usize,
    pub outcome: EpisodeOutcome,
    pub metrics: EpisodeMetrics,
    pub audit: AuditReport,
    pub hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamSummary {
    pub n: usize,
    pub summary: Option<Summary>,
    pub errors: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchReport {
    pub entries: Vec<BatchEntry>,
    pub errors: Vec<ErrorRow>,
    pub teams: Vec<TeamSummary>,
}

impl BatchReport {
    pub fn team(&self, n: usize) -> Option<&Summary> {
        self.teams.iter().find(|t| t.n == n).and_then(|t| t.summary.as_ref())
    }

    pub fn entries_for(&self, n: usize) -> impl Iterator<Item = &BatchEntry> {
        self.entries.iter().filter(move |e| e.n == n)
    }

    pub fn audits_clean(&self) -> bool {
        self.entries.iter().all(|e| e.audit.is_clean())
    }

    /// `results.csv`, `errors.json` and `summary.json` under `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), HarnessError> {
        std::fs::create_dir_all(dir)?;
        let rows: Vec<EpisodeMetrics> = self.entries.iter().map(|e| e.metrics.clone()).collect();
        write_csv(std::fs::File::create(dir.join("results.csv"))?, &rows)?;
        std::fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&self.teams).expect("serialises"))?;
        std::fs::write(dir.join("errors.json"), serde_json::to_string_pretty(&self.errors).expect("serialises"))?;
        Ok(())
    }
}

/// Runs every episode at every team size. Per-episode seeds are the
/// episode seed mixed with `base.seed`. When `trace_dir` is given each trace
/// is written to `trace_dir/n<k>/<source>.jsonl`.
pub fn run_batch(
    suite: &SuiteSpec,
    teams: &[usize],
    base: &RunConfig,
    trace_dir: Option<&Path>,
) -> Result<BatchReport, HarnessError> {
    if suite.episodes.is_empty() || teams.is_empty() {
        return Err(HarnessError::Config("empty batch".into()));
    }
    let jobs: Vec<(usize, usize)> =
        teams.iter().flat_map(|n| (0..suite.episodes.len()).map(move |i| (*n, i))).collect();
    let results: Vec<Result<BatchEntry, ErrorRow>> = jobs
        .par_iter()
        .map(|&(n, i)| {
            let item = &suite.episodes[i];
            let fail = |error: String| ErrorRow { source: item.source.clone(), n, error };
            let ep = item.episode.as_ref().map_err(|e| fail(e.clone()))?;
            let scene =
                suite.scenes.get(&ep.scene_id).ok_or_else(|| fail(format!("unknown scene {}", ep.scene_id)))?;
            let mut cfg = *base;
            cfg.seed = ep.seed ^ base.seed;
            cfg.n = Some(n);
            let run = run_episode(scene, ep, &cfg).map_err(|e| fail(e.to_string()))?;
            let d_star = run.d_star.ok_or_else(|| fail("optimal makespan undefined".into()))?;
            let metrics = EpisodeMetrics::evaluate(&run.outcome, d_star).map_err(|e| fail(e.to_string()))?;
            if let Some(dir) = trace_dir {
                write_trace(dir, n, &item.source, &run.trace).map_err(|e| fail(e.to_string()))?;
            }
            Ok(BatchEntry {
                source: item.source.clone(),
                n,
                audit: audit_trace(&run.trace),
                hash: run.trace.hash(),
                outcome: run.outcome,
                metrics,
            })
        })
        .collect();

    let mut entries = Vec::new();
    let mut errors = Vec::new();
    for r in results {
        match r {
            Ok(e) => entries.push(e),
            Err(e) => errors.push(e),
        }
    }
    let teams = teams
        .iter()
        .map(|&n| {
            let mine: Vec<&BatchEntry> = entries.iter().filter(|e| e.n == n).collect();
            let outcomes: Vec<EpisodeOutcome> = mine.iter().map(|e| e.outcome.clone()).collect();
            let rows: Vec<EpisodeMetrics> = mine.iter().map(|e| e.metrics.clone()).collect();
            TeamSummary {
                n,
                summary: summarize(&outcomes, &rows).ok(),
                errors: errors.iter().filter(|e| e.n == n).count(),
            }
        })
        .collect();
    Ok(BatchReport { entries, errors, teams })
}

fn write_trace(dir: &Path, n: usize, source: &str, trace: &EpisodeTrace) -> Result<(), HarnessError> {
    let sub = dir.join(format!("n{n}"));
    std::fs::create_dir_all(&sub)?;
    trace.write(&sub.join(format!("{source}.jsonl")))
}
