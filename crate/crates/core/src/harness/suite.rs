//! On-disk episode suites: `scenes/<scene_id>.json` and
//! `episodes/<episode_id>.json` under one directory.

use std::collections::BTreeMap;
use std::path::Path;

use super::scenegen::{generate_episode, generate_scene, EpisodeGenConfig, SceneGenConfig};
use super::HarnessError;
use crate::gridworld::{load_episode, load_scene, Episode, GridScene};

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteEpisode {
    /// File stem, used in error rows.
    pub source: String,
    pub episode: Result<Episode, String>,
}

#[derive(Debug, Clone)]
pub struct SuiteSpec {
    pub scenes: BTreeMap<String, GridScene>,
    pub episodes: Vec<SuiteEpisode>,
}

fn json_files(dir: &Path) -> Result<Vec<std::path::PathBuf>, HarnessError> {
    let mut out: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    out.sort();
    Ok(out)
}

/// Unreadable scenes are a hard error; unreadable episodes become entries
/// carrying the error.
pub fn load_suite(dir: &Path) -> Result<SuiteSpec, HarnessError> {
    let mut scenes = BTreeMap::new();
    for p in json_files(&dir.join("scenes"))? {
        let s = load_scene(&p)?;
        scenes.insert(s.scene_id.clone(), s);
    }
    let episodes = json_files(&dir.join("episodes"))?
        .into_iter()
        .map(|p| SuiteEpisode {
            source: p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
            episode: load_episode(&p).map_err(|e| e.to_string()),
        })
        .collect();
    Ok(SuiteSpec { scenes, episodes })
}

/// `count` episodes, one scene each, seeded from `seed`.
pub fn generate_suite(count: usize, seed: u64, scene_cfg: &SceneGenConfig, ep_cfg: &EpisodeGenConfig) -> SuiteSpec {
    let mut scenes = BTreeMap::new();
    let mut episodes = Vec::new();
    let mut k = 0u64;
    while episodes.len() < count {
        let s_seed = seed.wrapping_mul(1_000_003).wrapping_add(k);
        k += 1;
        let scene_id = format!("scene_{:04}", episodes.len());
        let scene = generate_scene(&scene_id, s_seed, scene_cfg);
        let episode_id = format!("ep_{:04}", episodes.len());
        let Some(ep) = generate_episode(&scene, &episode_id, s_seed ^ 0x5EED, ep_cfg) else { continue };
        episodes.push(SuiteEpisode { source: episode_id, episode: Ok(ep) });
        scenes.insert(scene_id, scene);
    }
    SuiteSpec { scenes, episodes }
}

impl SuiteSpec {
    pub fn write(&self, dir: &Path) -> Result<(), HarnessError> {
        std::fs::create_dir_all(dir.join("scenes"))?;
        std::fs::create_dir_all(dir.join("episodes"))?;
        for (id, s) in &self.scenes {
            std::fs::write(dir.join("scenes").join(format!("{id}.json")), s.to_json())?;
        }
        for e in &self.episodes {
            if let Ok(ep) = &e.episode {
                std::fs::write(dir.join("episodes").join(format!("{}.json", e.source)), ep.to_json())?;
            }
        }
        Ok(())
    }
}
