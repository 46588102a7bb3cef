//! Scene files: a `roadside-scene 1` line, an optional `hash <sha256>` line,
//! then a TOML body with a strict schema.
//!
//! ```text
//! roadside-scene 1
//! hash 3f1a…
//! [grid]
//! origin_xy = [0.0, 0.0]
//! cell_size = 1.5
//! nx = 4
//! ny = 4
//!
//! [roi]
//! cells = [0, 1, 5]
//! weights = [{ cell = 5, weight = 3.0 }]
//!
//! [specs.lidar_32]
//! modality = "lidar"
//! …
//!
//! [[lidar_candidates]]
//! id = "pole_a_5m"
//! position = [0.0, 0.0, 5.0]
//! spec = "lidar_32"
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{check_magic, read_text, write_text};
use crate::hash::sha256_hex;
use crate::scene::{CandidateMount, GridSpec, Occluder, RegionOfInterest, Scene, SensorSpec};
use crate::{Error, Result};

pub const MAGIC: &str = "roadside-scene";
const KIND: &str = "scene";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightEntry {
    cell: usize,
    weight: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RoiBody {
    cells: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    weights: Vec<WeightEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneBody {
    grid: GridSpec,
    roi: RoiBody,
    #[serde(default)]
    specs: BTreeMap<String, SensorSpec>,
    #[serde(default)]
    occluders: Vec<Occluder>,
    #[serde(default)]
    lidar_candidates: Vec<CandidateMount>,
    #[serde(default)]
    radar_candidates: Vec<CandidateMount>,
}

/// Canonical TOML body; the scene hash is taken over exactly these bytes.
pub fn scene_body(scene: &Scene) -> String {
    let body = SceneBody {
        grid: scene.grid.clone(),
        roi: RoiBody {
            cells: scene.roi.cells.iter().copied().collect(),
            weights: scene
                .roi
                .weights
                .iter()
                .map(|(&cell, &weight)| WeightEntry { cell, weight })
                .collect(),
        },
        specs: scene.specs.clone(),
        occluders: scene.occluders.clone(),
        lidar_candidates: scene.lidar_candidates.clone(),
        radar_candidates: scene.radar_candidates.clone(),
    };
    toml::to_string(&body).expect("scene body is always representable in TOML")
}

pub fn write_scene(scene: &Scene) -> String {
    let body = scene_body(scene);
    format!("{MAGIC} 1\nhash {}\n{body}", sha256_hex(body.as_bytes()))
}

pub fn parse_scene(text: &str) -> Result<Scene> {
    let mut lines = text.split_inclusive('\n');
    check_magic(KIND, MAGIC, lines.next().map(str::trim_end))?;
    let mut offset = text.find('\n').map_or(text.len(), |i| i + 1);
    let mut header_lines = 1;
    let mut declared_hash = None;
    if let Some(second) = lines.next() {
        if let Some(h) = second.trim_end().strip_prefix("hash ") {
            declared_hash = Some(h.trim().to_string());
            offset += second.len();
            header_lines += 1;
        }
    }
    let body_text = &text[offset..];
    let body: SceneBody = toml::from_str(body_text).map_err(|e| {
        let line = e
            .span()
            .map(|s| header_lines + 1 + body_text[..s.start].matches('\n').count());
        Error::parse(KIND, line, e.message().to_string())
    })?;

    let scene = Scene {
        grid: body.grid,
        roi: RegionOfInterest {
            cells: body.roi.cells.iter().copied().collect::<BTreeSet<_>>(),
            weights: body.roi.weights.iter().map(|w| (w.cell, w.weight)).collect(),
        },
        occluders: body.occluders,
        specs: body.specs,
        lidar_candidates: body.lidar_candidates,
        radar_candidates: body.radar_candidates,
    };
    if let Some(h) = declared_hash {
        let actual = scene.content_hash();
        if h != actual {
            return Err(Error::parse(KIND, Some(2), format!("declared hash {h} does not match content hash {actual}")));
        }
    }
    Ok(scene)
}

pub fn save_scene(path: &Path, scene: &Scene) -> Result<()> {
    write_text(path, &write_scene(scene))
}

pub fn load_scene(path: &Path) -> Result<Scene> {
    parse_scene(&read_text(path)?)
}
