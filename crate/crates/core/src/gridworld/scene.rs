use std::collections::{BTreeSet, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SceneError;
use crate::grid::Cell;

pub const DEFAULT_RESOLUTION: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Occupancy {
    Free,
    Obstacle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectInstance {
    pub instance_id: i64,
    pub category: String,
    pub footprint: BTreeSet<Cell>,
    /// Mean of footprint cell centres, metres.
    pub centroid: (f64, f64),
}

impl ObjectInstance {
    pub fn new(instance_id: i64, category: impl Into<String>, footprint: BTreeSet<Cell>, resolution: f64) -> Self {
        let centroid = centroid_of(footprint.iter().copied(), resolution);
        Self {
            instance_id,
            category: category.into(),
            footprint,
            centroid,
        }
    }
}

/// Mean of cell centres in metres; `(0, 0)` for an empty iterator.
pub fn centroid_of(cells: impl IntoIterator<Item = Cell>, resolution: f64) -> (f64, f64) {
    let mut n = 0usize;
    let (mut sx, mut sy) = (0.0, 0.0);
    for c in cells {
        let (x, y) = c.center(resolution);
        sx += x;
        sy += y;
        n += 1;
    }
    if n == 0 {
        (0.0, 0.0)
    } else {
        (sx / n as f64, sy / n as f64)
    }
}

/// Ground-truth world.
#[derive(Debug, Clone, PartialEq)]
pub struct GridScene {
    pub scene_id: String,
    pub width: usize,
    pub height: usize,
    pub resolution: f64,
    occupancy: Vec<Occupancy>,
    pub instances: Vec<ObjectInstance>,
}

impl GridScene {
    /// Builds and validates a scene. `occupancy` is row-major, `height` rows of `width`.
    pub fn new(
        scene_id: impl Into<String>,
        width: usize,
        height: usize,
        resolution: f64,
        occupancy: Vec<Occupancy>,
        instances: Vec<ObjectInstance>,
    ) -> Result<Self, SceneError> {
        let scene = Self {
            scene_id: scene_id.into(),
            width,
            height,
            resolution,
            occupancy,
            instances,
        };
        scene.validate()?;
        Ok(scene)
    }

    fn validate(&self) -> Result<(), SceneError> {
        if !(self.resolution > 0.0 && self.resolution.is_finite()) {
            return Err(SceneError::Validation(format!(
                "resolution must be positive, got {}",
                self.resolution
            )));
        }
        if self.width == 0 || self.height == 0 {
            return Err(SceneError::Validation("empty grid".into()));
        }
        if self.occupancy.len() != self.width * self.height {
            return Err(SceneError::Validation("occupancy size mismatch".into()));
        }
        let mut ids = HashSet::new();
        for inst in &self.instances {
            if !ids.insert(inst.instance_id) {
                return Err(SceneError::Validation(format!(
                    "duplicate instance id {}",
                    inst.instance_id
                )));
            }
            if inst.footprint.is_empty() {
                return Err(SceneError::Validation(format!(
                    "instance {} has an empty footprint",
                    inst.instance_id
                )));
            }
            if let Some(c) = inst.footprint.iter().find(|c| !self.in_bounds(**c)) {
                return Err(SceneError::Validation(format!(
                    "instance {} cell ({}, {}) is out of bounds",
                    inst.instance_id, c.row, c.col
                )));
            }
        }
        Ok(())
    }

    pub fn in_bounds(&self, cell: Cell) -> bool {
        cell.row >= 0 && cell.col >= 0 && (cell.row as usize) < self.height && (cell.col as usize) < self.width
    }

    pub fn index(&self, cell: Cell) -> Option<usize> {
        self.in_bounds(cell)
            .then(|| cell.row as usize * self.width + cell.col as usize)
    }

    pub fn cell_of_index(&self, idx: usize) -> Cell {
        Cell::new((idx / self.width) as i32, (idx % self.width) as i32)
    }

    /// `None` outside the grid.
    pub fn occupancy(&self, cell: Cell) -> Option<Occupancy> {
        self.index(cell).map(|i| self.occupancy[i])
    }

    pub fn is_free(&self, cell: Cell) -> bool {
        self.occupancy(cell) == Some(Occupancy::Free)
    }

    pub fn cell_count(&self) -> usize {
        self.width * self.height
    }

    pub fn free_count(&self) -> usize {
        self.occupancy.iter().filter(|o| **o == Occupancy::Free).count()
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.cell_count()).map(|i| self.cell_of_index(i))
    }

    pub fn instance(&self, id: i64) -> Option<&ObjectInstance> {
        self.instances.iter().find(|i| i.instance_id == id)
    }

    /// Sorted, deduplicated category labels.
    pub fn categories(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.instances.iter().map(|i| i.category.as_str()).collect();
        set.into_iter().map(str::to_owned).collect()
    }

    pub fn from_json(text: &str) -> Result<Self, SceneError> {
        let file: SceneFile = serde_json::from_str(text).map_err(|e| SceneError::Parse(e.to_string()))?;
        file.into_scene()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SceneFile::from_scene(self)).expect("scene serialises")
    }
}

pub fn load_scene(path: impl AsRef<Path>) -> Result<GridScene, SceneError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| SceneError::Parse(format!("{}: {e}", path.display())))?;
    GridScene::from_json(&text)
}

/// On-disk scene schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneFile {
    pub scene_id: String,
    pub resolution_m: f64,
    pub grid: Vec<String>,
    #[serde(default)]
    pub instances: Vec<InstanceFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub id: i64,
    pub category: String,
    /// `[row, col]` pairs.
    pub cells: Vec<[i32; 2]>,
}

impl SceneFile {
    pub fn into_scene(self) -> Result<GridScene, SceneError> {
        let height = self.grid.len();
        let width = self.grid.first().map(|r| r.chars().count()).unwrap_or(0);
        let mut occupancy = Vec::with_capacity(width * height);
        for (r, line) in self.grid.iter().enumerate() {
            if line.chars().count() != width {
                return Err(SceneError::Parse(format!("grid row {r} has inconsistent width")));
            }
            for (c, ch) in line.chars().enumerate() {
                occupancy.push(match ch {
                    '.' => Occupancy::Free,
                    '#' => Occupancy::Obstacle,
                    other => {
                        return Err(SceneError::Parse(format!(
                            "unexpected grid character {other:?} at ({r}, {c})"
                        )))
                    }
                });
            }
        }
        let resolution = self.resolution_m;
        let instances = self
            .instances
            .into_iter()
            .map(|i| {
                let footprint = i.cells.iter().map(|[r, c]| Cell::new(*r, *c)).collect();
                ObjectInstance::new(i.id, i.category, footprint, resolution)
            })
            .collect();
        GridScene::new(self.scene_id, width, height, resolution, occupancy, instances)
    }

    pub fn from_scene(scene: &GridScene) -> Self {
        let grid = (0..scene.height)
            .map(|r| {
                (0..scene.width)
                    .map(|c| match scene.occupancy[r * scene.width + c] {
                        Occupancy::Free => '.',
                        Occupancy::Obstacle => '#',
                    })
                    .collect()
            })
            .collect();
        let instances = scene
            .instances
            .iter()
            .map(|i| InstanceFile {
                id: i.instance_id,
                category: i.category.clone(),
                cells: i.footprint.iter().map(|c| [c.row, c.col]).collect(),
            })
            .collect();
        Self {
            scene_id: scene.scene_id.clone(),
            resolution_m: scene.resolution,
            grid,
            instances,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn open_grid(n: usize) -> Vec<String> {
        vec![".".repeat(n); n]
    }

    #[test]
    fn minimal_scene_loads() {
        let file = SceneFile {
            scene_id: "tiny".into(),
            resolution_m: 0.25,
            grid: open_grid(8),
            instances: vec![InstanceFile {
                id: 1,
                category: "chair".into(),
                cells: vec![[5, 5]],
            }],
        };
        let scene = file.into_scene().unwrap();
        assert_eq!(scene.instances.len(), 1);
        assert_eq!(scene.free_count(), 64);
        assert_eq!(scene.instances[0].centroid, (1.375, 1.375));
    }

    #[test]
    fn out_of_bounds_instance_is_rejected() {
        let file = SceneFile {
            scene_id: "tiny".into(),
            resolution_m: 0.25,
            grid: open_grid(8),
            instances: vec![InstanceFile {
                id: 1,
                category: "chair".into(),
                cells: vec![[9, 9]],
            }],
        };
        assert!(matches!(file.into_scene(), Err(SceneError::Validation(_))));
    }

    #[test]
    fn bad_resolution_and_bad_json() {
        let text = r#"{"scene_id":"x","resolution_m":0.0,"grid":["..",".."]}"#;
        assert!(matches!(GridScene::from_json(text), Err(SceneError::Validation(_))));
        assert!(matches!(GridScene::from_json("{"), Err(SceneError::Parse(_))));
        let ragged = r#"{"scene_id":"x","resolution_m":0.25,"grid":["..","."]}"#;
        assert!(matches!(GridScene::from_json(ragged), Err(SceneError::Parse(_))));
    }

    #[test]
    fn json_round_trip() {
        let text = r##"{"scene_id":"x","resolution_m":0.25,"grid":["#..","..#"],
            "instances":[{"id":3,"category":"tv","cells":[[0,1],[0,2]]}]}"##;
        let scene = GridScene::from_json(text).unwrap();
        assert_eq!(GridScene::from_json(&scene.to_json()).unwrap(), scene);
    }
}
