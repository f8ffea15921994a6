//! Map snapshot encoding: a binary PGM of the cell classification plus a JSON
//! sidecar carrying log-odds values, semantic channels and the registry.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CellClass, InstanceRegistry, LogOddsMap};
use crate::grid::Cell;
use crate::gridworld::RobotId;

pub const PGM_OCCUPIED: u8 = 0;
pub const PGM_UNKNOWN: u8 = 128;
pub const PGM_FREE: u8 = 255;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotSidecar {
    pub frame_id: RobotId,
    pub resolution: f64,
    pub origin: Cell,
    pub rows: usize,
    pub cols: usize,
    pub occupancy: Vec<f64>,
    /// Sparse `(index, value)` pairs per category.
    pub semantic: BTreeMap<String, Vec<(usize, f64)>>,
    pub registry: InstanceRegistry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSnapshot {
    /// Base64 on the wire.
    #[serde(with = "pgm_base64")]
    pub pgm: Vec<u8>,
    pub sidecar: SnapshotSidecar,
}

mod pgm_base64 {
    use base64::Engine;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&base64::engine::general_purpose::STANDARD.encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let text = String::deserialize(d)?;
        base64::engine::general_purpose::STANDARD
            .decode(text)
            .map_err(serde::de::Error::custom)
    }
}

impl MapSnapshot {
    /// Approximate payload size: image bytes plus eight per stored value.
    pub fn payload_bytes(&self) -> usize {
        let sem: usize = self.sidecar.semantic.values().map(|v| v.len() * 16).sum();
        self.pgm.len() + 8 * self.sidecar.occupancy.len() + sem + 64 * self.sidecar.registry.len()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("malformed PGM: {0}")]
    Pgm(String),
    #[error("sidecar does not match image: {0}")]
    Mismatch(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub fn pgm_value(class: CellClass) -> u8 {
    match class {
        CellClass::Occupied => PGM_OCCUPIED,
        CellClass::Unknown => PGM_UNKNOWN,
        CellClass::FreeExplored => PGM_FREE,
    }
}

pub fn encode_pgm(map: &LogOddsMap) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", map.cols(), map.rows()).into_bytes();
    out.extend((0..map.len()).map(|i| pgm_value(map.classify_at(i))));
    out
}

/// Parses a binary PGM into `(cols, rows, pixels)`.
pub fn decode_pgm(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>), SnapshotError> {
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(SnapshotError::Pgm("truncated header".into()));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    if fields[0] != "P5" {
        return Err(SnapshotError::Pgm(format!("bad magic {}", fields[0])));
    }
    let parse = |s: &str| s.parse::<usize>().map_err(|_| SnapshotError::Pgm(format!("bad number {s}")));
    let cols = parse(&fields[1])?;
    let rows = parse(&fields[2])?;
    if parse(&fields[3])? != 255 {
        return Err(SnapshotError::Pgm("max value must be 255".into()));
    }
    let data = bytes.get(pos + 1..).unwrap_or(&[]);
    if data.len() != rows * cols {
        return Err(SnapshotError::Pgm(format!("expected {} pixels, found {}", rows * cols, data.len())));
    }
    Ok((cols, rows, data.to_vec()))
}

pub fn encode_snapshot(map: &LogOddsMap, registry: &InstanceRegistry) -> MapSnapshot {
    let semantic = map
        .semantic_channels()
        .iter()
        .map(|(k, v)| {
            let sparse = v.iter().enumerate().filter(|(_, x)| **x != 0.0).map(|(i, x)| (i, *x)).collect();
            (k.clone(), sparse)
        })
        .collect();
    MapSnapshot {
        pgm: encode_pgm(map),
        sidecar: SnapshotSidecar {
            frame_id: map.frame_id,
            resolution: map.resolution,
            origin: map.origin(),
            rows: map.rows(),
            cols: map.cols(),
            occupancy: map.occupancy_raw().to_vec(),
            semantic,
            registry: registry.clone(),
        },
    }
}

pub fn decode_snapshot(snap: &MapSnapshot) -> Result<(LogOddsMap, InstanceRegistry), SnapshotError> {
    let (cols, rows, pixels) = decode_pgm(&snap.pgm)?;
    let s = &snap.sidecar;
    if cols != s.cols || rows != s.rows || s.occupancy.len() != rows * cols {
        return Err(SnapshotError::Mismatch("dimensions".into()));
    }
    let explored: Vec<bool> = pixels.iter().map(|p| *p != PGM_UNKNOWN).collect();
    let n = rows * cols;
    let mut semantic = BTreeMap::new();
    for (k, sparse) in &s.semantic {
        let mut dense = vec![0.0; n];
        for (i, v) in sparse {
            *dense.get_mut(*i).ok_or_else(|| SnapshotError::Mismatch(format!("semantic index {i}")))? = *v;
        }
        semantic.insert(k.clone(), dense);
    }
    let map = LogOddsMap::from_parts(s.frame_id, s.resolution, s.origin, rows, cols, s.occupancy.clone(), explored, semantic)
        .ok_or_else(|| SnapshotError::Mismatch("channel sizes".into()))?;
    for (i, p) in pixels.iter().enumerate() {
        if pgm_value(map.classify_at(i)) != *p {
            return Err(SnapshotError::Mismatch(format!("pixel {i} disagrees with log-odds")));
        }
    }
    Ok((map, s.registry.clone()))
}

/// Writes `<stem>.pgm` and `<stem>.json` into `dir`.
pub fn write_snapshot(dir: &Path, stem: &str, snap: &MapSnapshot) -> Result<(), SnapshotError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(format!("{stem}.pgm")), &snap.pgm)?;
    std::fs::write(dir.join(format!("{stem}.json")), serde_json::to_vec_pretty(&snap.sidecar)?)?;
    Ok(())
}

pub fn read_snapshot(dir: &Path, stem: &str) -> Result<MapSnapshot, SnapshotError> {
    let pgm = std::fs::read(dir.join(format!("{stem}.pgm")))?;
    let sidecar = serde_json::from_slice(&std::fs::read(dir.join(format!("{stem}.json")))?)?;
    Ok(MapSnapshot { pgm, sidecar })
}
