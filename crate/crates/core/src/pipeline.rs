//! End-to-end comparison of sensor configurations: visibility, placement,
//! coverage, simulated detections, late fusion and mAP.
//!
//! A pipeline file is TOML:
//!
//! ```toml
//! theta = 0.0
//! tau = 1.0
//!
//! [scenario]
//! seed = 7
//! duration_frames = 200
//!
//! [[configs]]
//! name = "2x16+radar"
//! budget = 3
//! lidar_specs = ["lidar_16"]
//!
//! [[configs]]
//! name = "1x64+radar"
//! budget = 2
//! lidar_specs = ["lidar_64"]
//! ```

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::coverage::{central_coverage, compare_configs, ConfigComparison, CoverageReport};
use crate::detection::DetectionBox;
use crate::fusion::{fuse_late, FusionConfig};
use crate::io::frame_file::pair_frames;
use crate::io::frame_file::Frame;
use crate::metrics::{compare_maps, evaluate_map, MapComparison, MapResult, MatchMode};
use crate::placement::{solve, PlacementProblem, Selection, Solver, DEFAULT_TAU};
use crate::scenario::{generate_scenario, ScenarioConfig};
use crate::scene::{Modality, Scene};
use crate::visibility::{build_visibility_with_workers, VisibilityConfig, VisibilityMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedSelection {
    #[serde(default)]
    pub lidar: Vec<String>,
    #[serde(default)]
    pub radar: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigSpec {
    pub name: String,
    #[serde(default)]
    pub budget: usize,
    #[serde(default = "default_solver")]
    pub solver: Solver,
    /// Candidate filters by spec name; absent means every candidate.
    pub lidar_specs: Option<Vec<String>>,
    pub radar_specs: Option<Vec<String>>,
    pub cost_limit: Option<f64>,
    /// Evaluate these mounts (by id) instead of optimizing.
    pub selection: Option<FixedSelection>,
}

fn default_solver() -> Solver {
    Solver::Bnb
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluationConfig {
    pub mode: MatchMode,
    /// Overrides the per-class default thresholds.
    pub threshold: Option<f64>,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        EvaluationConfig { mode: MatchMode::Iou, threshold: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub theta: f64,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default)]
    pub visibility: VisibilityConfig,
    #[serde(default)]
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub fusion: FusionConfig,
    #[serde(default)]
    pub evaluation: EvaluationConfig,
    pub configs: Vec<ConfigSpec>,
}

fn default_tau() -> f64 {
    DEFAULT_TAU
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| text[..s.start].matches('\n').count() + 1);
            Error::parse("pipeline config", line, e.message().to_string())
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigOutcome {
    pub name: String,
    pub lidar: Vec<String>,
    pub radar: Vec<String>,
    pub objective: f64,
    pub optimal: bool,
    pub coverage: CoverageReport,
    pub map: MapResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub scene_hash: String,
    pub configs: Vec<ConfigOutcome>,
    pub comparison: Option<ConfigComparison>,
    pub ap_deltas: Vec<MapComparison>,
}

fn candidate_rows(scene: &Scene, modality: Modality, filter: Option<&Vec<String>>) -> Vec<usize> {
    scene
        .candidates(modality)
        .iter()
        .enumerate()
        .filter(|(_, m)| filter.is_none_or(|f| f.contains(&m.spec)))
        .map(|(i, _)| i)
        .collect()
}

fn ids_to_rows(scene: &Scene, modality: Modality, ids: &[String]) -> Result<Vec<usize>> {
    ids.iter()
        .map(|id| {
            scene
                .candidates(modality)
                .iter()
                .position(|m| &m.id == id)
                .ok_or_else(|| Error::Invalid(format!("no {modality} candidate with id `{id}`")))
        })
        .collect()
}

/// Late-fuses per-frame lidar and radar detections.
pub fn fuse_frames(lidar: &[Frame], radar: &[Frame], cfg: &FusionConfig) -> Result<Vec<Frame>> {
    let empty: Vec<DetectionBox> = Vec::new();
    let mut ids: Vec<&str> = lidar.iter().chain(radar).map(|f| f.id.as_str()).collect();
    ids.sort_unstable();
    ids.dedup();
    ids.into_iter()
        .map(|id| {
            let dl = lidar.iter().find(|f| f.id == id).map_or(&empty, |f| &f.boxes);
            let dr = radar.iter().find(|f| f.id == id).map_or(&empty, |f| &f.boxes);
            Ok(Frame::new(id, fuse_late(dl, dr, cfg)?))
        })
        .collect()
}

fn run_config(
    scene: &Scene,
    vl: &VisibilityMatrix,
    vr: &VisibilityMatrix,
    cfg: &PipelineConfig,
    spec: &ConfigSpec,
) -> Result<ConfigOutcome> {
    let weights = scene.roi.weight_vector();
    let full = PlacementProblem::new(vl.clone(), vr.clone(), weights.clone(), spec.budget, cfg.tau)
        .and_then(|p| p.with_costs(scene.unit_costs(Modality::Lidar), scene.unit_costs(Modality::Radar)))
        .map_err(|e| e.in_stage("placement"))?;

    let (selection, objective, optimal) = match &spec.selection {
        Some(fixed) => {
            let sel = Selection::new(
                ids_to_rows(scene, Modality::Lidar, &fixed.lidar)?,
                ids_to_rows(scene, Modality::Radar, &fixed.radar)?,
            );
            let sol = crate::placement::evaluate_selection(&full, &sel).map_err(|e| e.in_stage("placement"))?;
            (sel, sol.objective, false)
        }
        None => {
            let rl = candidate_rows(scene, Modality::Lidar, spec.lidar_specs.as_ref());
            let rr = candidate_rows(scene, Modality::Radar, spec.radar_specs.as_ref());
            let pick = |v: &[f64], rows: &[usize]| rows.iter().map(|&i| v[i]).collect::<Vec<_>>();
            let sub = PlacementProblem::new(vl.select_rows(&rl)?, vr.select_rows(&rr)?, weights, spec.budget, cfg.tau)
                .and_then(|p| p.with_costs(pick(&full.lidar_costs, &rl), pick(&full.radar_costs, &rr)))
                .map(|p| p.with_cost_limit(spec.cost_limit))
                .and_then(|p| solve(&p, spec.solver))
                .map_err(|e| e.in_stage("placement"))?;
            let sel = Selection::new(
                sub.selection.lidar.iter().map(|&i| rl[i]),
                sub.selection.radar.iter().map(|&i| rr[i]),
            );
            (sel, sub.objective, sub.optimal)
        }
    };

    let coverage = central_coverage(&full, &selection, cfg.theta)
        .map_err(|e| e.in_stage("coverage"))?
        .named(&spec.name);
    let sim = generate_scenario(scene, vl, vr, &selection, &cfg.scenario).map_err(|e| e.in_stage("simulate"))?;
    let fused = fuse_frames(&sim.lidar, &sim.radar, &cfg.fusion).map_err(|e| e.in_stage("fuse"))?;
    let map = evaluate_map(&pair_frames(&fused, &sim.ground_truth), cfg.evaluation.mode, cfg.evaluation.threshold)
        .map_err(|e| e.in_stage("evaluate"))?;

    let ids = |m: Modality, rows: &[usize]| rows.iter().map(|&i| scene.candidates(m)[i].id.clone()).collect();
    Ok(ConfigOutcome {
        name: spec.name.clone(),
        lidar: ids(Modality::Lidar, &selection.lidar),
        radar: ids(Modality::Radar, &selection.radar),
        objective,
        optimal,
        coverage,
        map,
    })
}

/// Runs every configuration against precomputed visibility matrices.
pub fn run_with_matrices(
    scene: &Scene,
    vl: &VisibilityMatrix,
    vr: &VisibilityMatrix,
    cfg: &PipelineConfig,
) -> Result<PipelineReport> {
    if cfg.configs.is_empty() {
        return Err(Error::Invalid("pipeline lists no configs".into()));
    }
    let mut configs = Vec::with_capacity(cfg.configs.len());
    for spec in &cfg.configs {
        configs.push(run_config(scene, vl, vr, cfg, spec).map_err(|e| e.in_stage(format!("config `{}`", spec.name)))?);
    }
    let reports: Vec<CoverageReport> = configs.iter().map(|c| c.coverage.clone()).collect();
    let comparison = (reports.len() >= 2).then(|| compare_configs(&reports)).transpose()?;
    let mut ap_deltas = Vec::new();
    for (ia, a) in configs.iter().enumerate() {
        for b in &configs[ia + 1..] {
            ap_deltas.push(compare_maps(&a.name, &a.map, &b.name, &b.map));
        }
    }
    Ok(PipelineReport { scene_hash: scene.content_hash(), configs, comparison, ap_deltas })
}

/// Builds visibility with at most `workers` threads, then runs every config.
/// The report does not depend on `workers`.
pub fn run_pipeline(scene: &Scene, cfg: &PipelineConfig, workers: usize) -> Result<PipelineReport> {
    let (vl, vr) =
        build_visibility_with_workers(scene, &cfg.visibility, workers).map_err(|e| e.in_stage("visibility"))?;
    run_with_matrices(scene, &vl, &vr, cfg)
}

impl PipelineReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scene {}", self.scene_hash);
        for c in &self.configs {
            let _ = writeln!(s, "\n== {} ==", c.name);
            let _ = writeln!(s, "lidar: {}", if c.lidar.is_empty() { "-".into() } else { c.lidar.join(", ") });
            let _ = writeln!(s, "radar: {}", if c.radar.is_empty() { "-".into() } else { c.radar.join(", ") });
            let _ = writeln!(s, "objective {} ({})", c.objective, if c.optimal { "optimal" } else { "not proven optimal" });
            let _ = writeln!(
                s,
                "central coverage {:.1}% ({}/{} cells), cost {}",
                c.coverage.central_coverage * 100.0,
                c.coverage.covered_cells,
                c.coverage.total_roi_cells,
                c.coverage.total_cost
            );
            s.push_str(&c.map.to_text());
        }
        if let Some(cmp) = &self.comparison {
            s.push_str("\n== coverage and cost ==\n");
            s.push_str(&cmp.to_text());
        }
        for d in &self.ap_deltas {
            let _ = writeln!(s, "\n== AP: {} -> {} ==", d.name_a, d.name_b);
            s.push_str(&d.to_text());
        }
        s
    }
}
