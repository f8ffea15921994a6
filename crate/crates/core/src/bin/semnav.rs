use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::{info, warn};

use semnav::gridworld::{load_episode, load_scene};
use semnav::harness::scenegen::{EpisodeGenConfig, SceneGenConfig};
use semnav::harness::{
    audit_trace, generate_suite, load_suite, render_trace, run_batch, run_episode, EpisodeTrace, HarnessError,
    RenderKind, RunConfig,
};
use semnav::metrics::{summarize, write_csv, EpisodeMetrics};

/// Multi-robot semantic navigation simulator.
#[derive(Parser)]
#[command(name = "semnav", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode and write its trace and outcome.
    Run {
        #[arg(long)]
        episode: PathBuf,
        /// Scene file; defaults to `../scenes/<scene_id>.json` next to the episode.
        #[arg(long)]
        scene: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        agents: Option<usize>,
        #[arg(long, default_value_t = 5.0)]
        rcomm: f64,
        #[arg(long, default_value_t = 10)]
        tau: u32,
        #[arg(long)]
        max_steps: Option<u32>,
    },
    /// Evaluate a suite directory at several team sizes.
    Batch {
        #[arg(long)]
        suite: PathBuf,
        /// Team sizes, `a..b` inclusive or comma separated.
        #[arg(long, default_value = "1..4")]
        agents: String,
        #[arg(long, default_value_t = 5.0)]
        rcomm: f64,
        #[arg(long, default_value_t = 10)]
        tau: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Defaults to `<suite>/results`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write every trace.
        #[arg(long)]
        traces: bool,
    },
    /// Recompute metrics and audit every trace under a directory.
    Eval {
        #[arg(long)]
        traces: PathBuf,
    },
    /// Render a trace.
    Render {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, value_enum, default_value_t = Kind::Trajectory)]
        kind: Kind,
        /// Defaults to the trace's directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic suite.
    GenScenes {
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "suite")]
        out: PathBuf,
        #[arg(long, default_value_t = 4)]
        robots: usize,
        #[arg(long, default_value_t = 3)]
        goals: usize,
        #[arg(long, default_value_t = 400)]
        max_steps: u32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Trajectory,
    MergeOverlay,
    Frontier,
}

fn parse_teams(s: &str) -> Result<Vec<usize>, HarnessError> {
    let bad = || HarnessError::Config(format!("bad team sizes: {s}"));
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if a == 0 || b < a {
            return Err(bad());
        }
        Ok((a..=b).collect())
    } else {
        s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
    }
}

fn trace_files(dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    let mut entries: Vec<_> = std::fs::read_dir(dir)?.filter_map(|e| e.ok().map(|e| e.path())).collect();
    entries.sort();
    for p in entries {
        if p.is_dir() {
            trace_files(&p, out)?;
        } else if p.extension().is_some_and(|x| x == "jsonl") {
            out.push(p);
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run { episode, scene, seed, out, agents, rcomm, tau, max_steps } => {
            let ep = load_episode(&episode)?;
            let scene_path = scene.unwrap_or_else(|| {
                episode.parent().unwrap_or(Path::new(".")).join("..").join("scenes").join(format!("{}.json", ep.scene_id))
            });
            let scene = load_scene(&scene_path)?;
            let mut cfg = RunConfig::new(seed.unwrap_or(ep.seed)).with_comm(rcomm, tau);
            cfg.n = agents;
            cfg.max_steps = max_steps;
            let run = run_episode(&scene, &ep, &cfg)?;
            std::fs::create_dir_all(&out)?;
            let trace_path = out.join(format!("{}.jsonl", ep.episode_id));
            run.trace.write(&trace_path)?;
            std::fs::write(out.join("outcome.json"), serde_json::to_string_pretty(&run.outcome).expect("serialises"))?;
            println!(
                "{}: found {}/{} in {} steps, makespan {:.2} m, d* {}",
                ep.episode_id,
                run.outcome.found(),
                run.outcome.goals.len(),
                run.outcome.timesteps(),
                run.outcome.max_distance(),
                run.d_star.map(|d| format!("{d:.2} m")).unwrap_or_else(|| "undefined".into())
            );
            println!("trace {} sha256 {}", trace_path.display(), run.trace.hash());
        }
        Command::Batch { suite, agents, rcomm, tau, seed, out, traces } => {
            let teams = parse_teams(&agents)?;
            let spec = load_suite(&suite)?;
            let mut cfg = RunConfig::new(seed).with_comm(rcomm, tau);
            cfg.record_maps = false;
            let out = out.unwrap_or_else(|| suite.join("results"));
            let trace_dir = out.join("traces");
            let report = run_batch(&spec, &teams, &cfg, traces.then_some(trace_dir.as_path()))?;
            report.write(&out)?;
            for e in &report.errors {
                warn!("{} (n={}): {}", e.source, e.n, e.error);
            }
            println!("n,episodes,SR,MSPL,mean_makespan,mean_timesteps,errors");
            for t in &report.teams {
                match &t.summary {
                    Some(s) => println!(
                        "{},{},{:.4},{:.4},{:.3},{:.2},{}",
                        t.n, s.episodes, s.sr, s.mspl, s.mean_makespan, s.mean_timesteps, t.errors
                    ),
                    None => println!("{},0,,,,,{}", t.n, t.errors),
                }
            }
            if !report.audits_clean() {
                warn!("protocol audit found violations");
            }
            info!("results in {}", out.display());
        }
        Command::Eval { traces } => {
            let mut files = Vec::new();
            trace_files(&traces, &mut files)?;
            let mut by_team: BTreeMap<usize, (Vec<_>, Vec<_>)> = BTreeMap::new();
            let mut dirty = 0;
            for f in &files {
                let t = EpisodeTrace::load(f)?;
                let audit = audit_trace(&t);
                if !audit.is_clean() {
                    dirty += 1;
                    warn!("{}: {:?}", f.display(), audit);
                }
                let Some(d_star) = t.footer.d_star else {
                    warn!("{}: optimal makespan undefined", f.display());
                    continue;
                };
                let m = EpisodeMetrics::evaluate(&t.footer.outcome, d_star)
                    .map_err(|e| HarnessError::Trace(e.to_string()))?;
                let slot = by_team.entry(t.robots()).or_default();
                slot.0.push(t.footer.outcome.clone());
                slot.1.push(m);
            }
            let all: Vec<EpisodeMetrics> = by_team.values().flat_map(|v| v.1.iter().cloned()).collect();
            write_csv(std::io::stdout().lock(), &all)?;
            for (n, (outcomes, rows)) in &by_team {
                if let Ok(s) = summarize(outcomes, rows) {
                    println!(
                        "# n={n} episodes={} SR={:.4} MSPL={:.4} makespan={:.3} timesteps={:.2}",
                        s.episodes, s.sr, s.mspl, s.mean_makespan, s.mean_timesteps
                    );
                }
            }
            println!("# {} traces, {} with audit violations", files.len(), dirty);
        }
        Command::Render { trace, kind, out } => {
            let t = EpisodeTrace::load(&trace)?;
            let out = out.unwrap_or_else(|| trace.parent().unwrap_or(Path::new(".")).to_path_buf());
            let kind = match kind {
                Kind::Trajectory => RenderKind::Trajectory,
                Kind::MergeOverlay => RenderKind::MergeOverlay,
                Kind::Frontier => RenderKind::Frontier,
            };
            for p in render_trace(&t, kind, &out)? {
                println!("{}", p.display());
            }
        }
        Command::GenScenes { count, seed, out, robots, goals, max_steps } => {
            let ep_cfg = EpisodeGenConfig { robots, goals, max_steps, ..Default::default() };
            let spec = generate_suite(count, seed, &SceneGenConfig::default(), &ep_cfg);
            spec.write(&out)?;
            println!("{} episodes in {}", spec.episodes.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SEMNAV_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
