use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GridScene, SceneError};
use crate::grid::{Heading, Pose};

pub type GoalId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Category,
    Language,
    Image,
}

/// One goal of an episode. Modality only selects the detection noise profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalSpec {
    #[serde(rename = "id")]
    pub goal_id: GoalId,
    pub modality: Modality,
    pub valid_instance_ids: BTreeSet<i64>,
    #[serde(rename = "success_radius_m")]
    pub success_radius: f64,
    #[serde(default)]
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub episode_id: String,
    pub scene_id: String,
    pub start_poses: Vec<Pose>,
    pub goals: Vec<GoalSpec>,
    pub max_steps: u32,
    pub seed: u64,
}

/// On-disk episode schema. `starts` entries are `[x_m, y_m, heading_deg]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub episode_id: Option<String>,
    pub scene_id: String,
    pub starts: Vec<[f64; 3]>,
    pub goals: Vec<GoalSpec>,
    pub max_steps: u32,
    pub seed: u64,
}

impl EpisodeFile {
    pub fn into_episode(self, fallback_id: &str) -> Result<Episode, SceneError> {
        let start_poses = self
            .starts
            .iter()
            .map(|[x, y, deg]| {
                if deg.fract() != 0.0 {
                    return Err(SceneError::Validation(format!("heading {deg} is not integral")));
                }
                let heading = Heading::from_degrees(*deg as i64)
                    .ok_or_else(|| SceneError::Validation(format!("heading {deg} is not a multiple of 30")))?;
                Ok(Pose::new(*x, *y, heading))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Episode {
            episode_id: self.episode_id.unwrap_or_else(|| fallback_id.to_owned()),
            scene_id: self.scene_id,
            start_poses,
            goals: self.goals,
            max_steps: self.max_steps,
            seed: self.seed,
        })
    }

    pub fn from_episode(ep: &Episode) -> Self {
        Self {
            episode_id: Some(ep.episode_id.clone()),
            scene_id: ep.scene_id.clone(),
            starts: ep
                .start_poses
                .iter()
                .map(|p| [p.x, p.y, p.heading.degrees() as f64])
                .collect(),
            goals: ep.goals.clone(),
            max_steps: ep.max_steps,
            seed: ep.seed,
        }
    }
}

impl Episode {
    pub fn from_json(text: &str, fallback_id: &str) -> Result<Self, SceneError> {
        let file: EpisodeFile = serde_json::from_str(text).map_err(|e| SceneError::Parse(e.to_string()))?;
        file.into_episode(fallback_id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&EpisodeFile::from_episode(self)).expect("episode serialises")
    }

    /// Checks the episode against its scene.
    pub fn validate(&self, scene: &GridScene) -> Result<(), SceneError> {
        if self.scene_id != scene.scene_id {
            return Err(SceneError::Validation(format!(
                "episode targets scene {} but {} was supplied",
                self.scene_id, scene.scene_id
            )));
        }
        if self.start_poses.is_empty() {
            return Err(SceneError::Validation("episode has no robots".into()));
        }
        if self.goals.is_empty() {
            return Err(SceneError::Validation("episode has no goals".into()));
        }
        for (i, p) in self.start_poses.iter().enumerate() {
            if !scene.is_free(p.cell(scene.resolution)) {
                return Err(SceneError::Validation(format!("start pose {i} is not on a free cell")));
            }
        }
        let mut ids = BTreeSet::new();
        for g in &self.goals {
            if !ids.insert(g.goal_id) {
                return Err(SceneError::Validation(format!("duplicate goal id {}", g.goal_id)));
            }
            if !(g.success_radius > 0.0) {
                return Err(SceneError::Validation(format!("goal {} has non-positive radius", g.goal_id)));
            }
            if g.valid_instance_ids.is_empty() {
                return Err(SceneError::Validation(format!("goal {} has no valid instances", g.goal_id)));
            }
            if let Some(id) = g.valid_instance_ids.iter().find(|id| scene.instance(**id).is_none()) {
                return Err(SceneError::Validation(format!(
                    "goal {} references unknown instance {id}",
                    g.goal_id
                )));
            }
        }
        Ok(())
    }

    pub fn goal(&self, id: GoalId) -> Option<&GoalSpec> {
        self.goals.iter().find(|g| g.goal_id == id)
    }
}

pub fn load_episode(path: impl AsRef<Path>) -> Result<Episode, SceneError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| SceneError::Parse(format!("{}: {e}", path.display())))?;
    let stem = path
        .file_name()
        .and_then(|s| s.to_str())
        .map(|s| s.split('.').next().unwrap_or(s))
        .unwrap_or("episode");
    Episode::from_json(&text, stem)
}
