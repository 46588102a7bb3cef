use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{Context as _, Result};
use clap::Args;
use roadside_core::coverage::{central_coverage, compare_configs, coverage_flags, CoverageReport};
use roadside_core::fusion::FusionConfig;
use roadside_core::io::frame_file::{pair_frames, parse_frames, write_frames, Frame};
use roadside_core::io::matrix_file::{parse_matrix, write_matrix};
use roadside_core::io::report::{grid_dump, parse_report, write_report};
use roadside_core::io::scene_file::parse_scene;
use roadside_core::metrics::{compare_maps, evaluate_map, MapComparison, MapResult, MatchMode};
use roadside_core::pipeline::{fuse_frames, run_pipeline, PipelineConfig, PipelineReport};
use roadside_core::placement::{export_milp as render_lp, solve, PlacementProblem, Selection, Solver, DEFAULT_TAU};
use roadside_core::scenario::{generate_scenario, ScenarioConfig};
use roadside_core::scene::{Modality, Scene};
use roadside_core::visibility::{build_visibility_with_workers, VisibilityConfig, VisibilityMatrix};
use roadside_core::Error;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::manifest::{beside, Run};

pub struct Context {
    pub config: Option<PathBuf>,
    pub workers: usize,
}

/// Missing or conflicting arguments; exits like a clap usage error.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

const SECTIONS: [&str; 8] = ["visibility", "optimize", "coverage", "simulate", "fuse", "evaluate", "pipeline", "export_milp"];

/// Keys naming files. They are left out of the run id so that moving files
/// around does not change outputs; file contents are hashed instead.
const PATH_KEYS: [&str; 14] = [
    "scene", "lidar", "radar", "solution", "out", "out_dir", "lp_out", "grid_out", "gt", "pred", "lidar_dets",
    "radar_dets", "pipeline", "config",
];

fn prune(v: Value) -> Value {
    match v {
        Value::Object(m) => Value::Object(
            m.into_iter()
                .filter(|(_, v)| !matches!(v, Value::Null | Value::Bool(false)) && v.as_array().is_none_or(|a| !a.is_empty()))
                .collect(),
        ),
        other => other,
    }
}

/// Overlays command-line flags on the matching table of the config file.
/// Returns the merged arguments and their echo for the manifest.
fn merge<T: Serialize + DeserializeOwned>(ctx: &Context, section: &str, flags: T) -> Result<(T, Value)> {
    let mut merged = serde_json::Map::new();
    if let Some(path) = &ctx.config {
        let text = roadside_core::io::read_text(path)?;
        let table: toml::Table = toml::from_str(&text).map_err(|e| Error::Parse {
            kind: "config",
            line: e.span().map(|s| text[..s.start].matches('\n').count() + 1),
            message: e.message().to_string(),
        })?;
        if let Some(k) = table.keys().find(|k| !SECTIONS.contains(&k.as_str())) {
            return Err(Error::Parse { kind: "config", line: None, message: format!("unknown section `{k}`") }.into());
        }
        if let Some(t) = table.get(section) {
            if let Value::Object(m) = serde_json::to_value(t)? {
                merged.extend(m);
            }
        }
    }
    if let Value::Object(m) = prune(serde_json::to_value(&flags)?) {
        merged.extend(m);
    }
    let value = Value::Object(merged);
    let args: T = serde_json::from_value(value.clone()).map_err(|e| Error::Parse {
        kind: "config",
        line: None,
        message: format!("[{section}]: {e}"),
    })?;
    let echo = match value {
        Value::Object(m) => Value::Object(m.into_iter().filter(|(k, _)| !PATH_KEYS.contains(&k.as_str())).collect()),
        other => other,
    };
    Ok((args, echo))
}

fn req<T: Clone>(v: &Option<T>, flag: &str) -> Result<T> {
    v.clone()
        .ok_or_else(|| Usage(format!("missing --{} (or `{}` in the config file)", flag, flag.replace('-', "_"))).into())
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.to_path_buf(), source: e })?;
    Ok(())
}

fn load_scene(run: &mut Run, path: &Path) -> Result<Scene> {
    parse_scene(&run.input("scene", path)?).with_context(|| format!("reading {}", path.display()))
}

fn load_matrix(run: &mut Run, role: &str, path: &Path, expected: Modality) -> Result<VisibilityMatrix> {
    let (m, _) = parse_matrix(&run.input(role, path)?).with_context(|| format!("reading {}", path.display()))?;
    if m.modality != expected {
        return Err(Error::Invalid(format!("{} holds a {} matrix, expected {expected}", path.display(), m.modality)).into());
    }
    Ok(m)
}

/// Warns when matrices were built from different scenes, or from a scene
/// other than the one given.
fn check_provenance(vl: &VisibilityMatrix, vr: &VisibilityMatrix, scene: Option<&Scene>) {
    if vl.scene_hash != vr.scene_hash {
        eprintln!("warning: lidar and radar matrices carry different scene hashes");
    }
    if let Some(s) = scene {
        let h = s.content_hash();
        for m in [vl, vr] {
            if m.scene_hash.as_deref() != Some(h.as_str()) {
                eprintln!("warning: {} matrix scene hash does not match the scene file", m.modality);
            }
        }
    }
}

fn check_shape(vl: &VisibilityMatrix, vr: &VisibilityMatrix, scene: &Scene) -> Result<()> {
    for (m, modality) in [(vl, Modality::Lidar), (vr, Modality::Radar)] {
        let rows = scene.candidates(modality).len();
        if m.rows() != rows || m.cols() != scene.roi.len() {
            return Err(Error::Invalid(format!(
                "{modality} matrix is {}x{}, scene has {rows} candidates and {} ROI cells",
                m.rows(),
                m.cols(),
                scene.roi.len()
            ))
            .into());
        }
    }
    Ok(())
}

fn build_problem(
    vl: VisibilityMatrix,
    vr: VisibilityMatrix,
    scene: Option<&Scene>,
    budget: usize,
    tau: f64,
    cost_limit: Option<f64>,
) -> Result<PlacementProblem> {
    let weights = match scene {
        Some(s) => {
            check_shape(&vl, &vr, s)?;
            s.roi.weight_vector()
        }
        None => vec![1.0; vl.cols()],
    };
    let mut p = PlacementProblem::new(vl, vr, weights, budget, tau)?;
    if let Some(s) = scene {
        p = p.with_costs(s.unit_costs(Modality::Lidar), s.unit_costs(Modality::Radar))?;
    }
    Ok(p.with_cost_limit(cost_limit))
}

fn ids(scene: Option<&Scene>, modality: Modality, rows: &[usize]) -> Vec<String> {
    match scene {
        Some(s) => rows.iter().map(|&i| s.candidates(modality)[i].id.clone()).collect(),
        None => rows.iter().map(|i| format!("{modality}#{i}")).collect(),
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PlacementRecord {
    pub solver: Solver,
    pub budget: usize,
    pub tau: f64,
    pub cost_limit: Option<f64>,
    pub objective: f64,
    pub optimal: bool,
    pub lidar: Vec<usize>,
    pub radar: Vec<usize>,
    pub lidar_ids: Vec<String>,
    pub radar_ids: Vec<String>,
    pub total_cost: f64,
    pub t: Vec<bool>,
    pub rho: Vec<f64>,
    pub scene_hash: Option<String>,
}

fn load_selection(run: &mut Run, role: &str, path: &Path) -> Result<Selection> {
    let rec: PlacementRecord = parse_report(&run.input(role, path)?, "placement")
        .with_context(|| format!("reading {}", path.display()))?
        .data;
    Ok(Selection::new(rec.lidar, rec.radar))
}

// ---------------------------------------------------------------- visibility

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VisibilityArgs {
    /// Scene file.
    #[arg(long)]
    scene: Option<PathBuf>,
    /// Directory for `lidar.matrix`, `radar.matrix` and `manifest.json`.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Sample points per cell; a perfect square [default: 9].
    #[arg(long)]
    samples_per_cell: Option<usize>,
    /// Target object height in metres [default: 1.7].
    #[arg(long)]
    object_height: Option<f64>,
    /// Line-of-sight probe height in metres [default: half the object height].
    #[arg(long)]
    sample_height: Option<f64>,
    /// Entries are clamped to 1 - epsilon [default: 1e-6].
    #[arg(long)]
    epsilon: Option<f64>,
}

pub fn visibility(ctx: &Context, flags: VisibilityArgs) -> Result<()> {
    let (a, echo) = merge(ctx, "visibility", flags)?;
    let mut run = Run::new("visibility", echo);
    let scene = load_scene(&mut run, &req(&a.scene, "scene")?)?;
    let out_dir = req(&a.out_dir, "out-dir")?;
    let d = VisibilityConfig::default();
    let cfg = VisibilityConfig {
        samples_per_cell: a.samples_per_cell.unwrap_or(d.samples_per_cell),
        object_height_m: a.object_height.unwrap_or(d.object_height_m),
        sample_height_m: a.sample_height.or(d.sample_height_m),
        epsilon: a.epsilon.unwrap_or(d.epsilon),
    };
    let (vl, vr) = build_visibility_with_workers(&scene, &cfg, ctx.workers)?;
    let id = run.id();
    create_dir(&out_dir)?;
    for m in [&vl, &vr] {
        let path = out_dir.join(format!("{}.matrix", m.modality));
        run.output(m.modality.as_str(), &path, &write_matrix(m, Some(&id)))?;
        let seen = m.values().iter().filter(|v| **v > 0.0).count();
        println!(
            "{}: {} candidates x {} cells, {} nonzero entries -> {}",
            m.modality,
            m.rows(),
            m.cols(),
            seen,
            path.display()
        );
    }
    println!("scene {}", scene.content_hash());
    run.finish(out_dir.join("manifest.json"))
}

// ------------------------------------------------------------------ optimize

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizeArgs {
    /// Lidar visibility matrix.
    #[arg(long)]
    lidar: Option<PathBuf>,
    /// Radar visibility matrix.
    #[arg(long)]
    radar: Option<PathBuf>,
    /// Scene file; supplies ROI weights, unit costs and candidate ids.
    #[arg(long)]
    scene: Option<PathBuf>,
    /// Maximum total number of sensors.
    #[arg(long)]
    budget: Option<usize>,
    /// Log-visibility threshold per modality [default: 1].
    #[arg(long)]
    tau: Option<f64>,
    /// exhaustive, bnb or greedy [default: bnb].
    #[arg(long)]
    solver: Option<String>,
    /// Optional cap on the summed unit cost of the selection.
    #[arg(long)]
    cost_limit: Option<f64>,
    /// Also write the model in LP format.
    #[arg(long)]
    lp_out: Option<PathBuf>,
    /// Placement record to write.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn optimize(ctx: &Context, flags: OptimizeArgs) -> Result<()> {
    let (a, echo) = merge(ctx, "optimize", flags)?;
    let mut run = Run::new("optimize", echo);
    let vl = load_matrix(&mut run, "lidar", &req(&a.lidar, "lidar")?, Modality::Lidar)?;
    let vr = load_matrix(&mut run, "radar", &req(&a.radar, "radar")?, Modality::Radar)?;
    let scene = a.scene.as_deref().map(|p| load_scene(&mut run, p)).transpose()?;
    check_provenance(&vl, &vr, scene.as_ref());
    let solver: Solver = a.solver.as_deref().unwrap_or("bnb").parse()?;
    let tau = a.tau.unwrap_or(DEFAULT_TAU);
    let budget = req(&a.budget, "budget")?;
    let scene_hash = vl.scene_hash.clone();
    let problem = build_problem(vl, vr, scene.as_ref(), budget, tau, a.cost_limit)?;
    let sol = solve(&problem, solver)?;
    let sel = &sol.selection;
    let record = PlacementRecord {
        solver,
        budget,
        tau,
        cost_limit: a.cost_limit,
        objective: sol.objective,
        optimal: sol.optimal,
        lidar: sel.lidar.clone(),
        radar: sel.radar.clone(),
        lidar_ids: ids(scene.as_ref(), Modality::Lidar, &sel.lidar),
        radar_ids: ids(scene.as_ref(), Modality::Radar, &sel.radar),
        total_cost: problem.selection_cost(sel),
        t: sol.t.clone(),
        rho: sol.rho.clone(),
        scene_hash,
    };
    println!("solver {solver:?}, budget {budget}, tau {tau}");
    println!("lidar: {}", if record.lidar_ids.is_empty() { "-".into() } else { record.lidar_ids.join(", ") });
    println!("radar: {}", if record.radar_ids.is_empty() { "-".into() } else { record.radar_ids.join(", ") });
    println!(
        "objective {} ({}), cells seen {}/{}, cost {}",
        record.objective,
        if record.optimal { "optimal" } else { "heuristic" },
        record.t.iter().filter(|t| **t).count(),
        record.t.len(),
        record.total_cost
    );

    let id = run.id();
    let mut manifest_at = None;
    if let Some(lp) = &a.lp_out {
        run.output("lp", lp, &format!("\\ run {id}\n{}", render_lp(&problem)))?;
        manifest_at = Some(beside(lp));
    }
    if let Some(out) = &a.out {
        run.output("placement", out, &write_report("placement", Some(&id), &record)?)?;
        manifest_at = Some(beside(out));
    }
    match manifest_at {
        Some(p) => run.finish(p),
        None => Ok(()),
    }
}

// ------------------------------------------------------------------ coverage

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoverageArgs {
    #[arg(long)]
    lidar: Option<PathBuf>,
    #[arg(long)]
    radar: Option<PathBuf>,
    /// Scene file; supplies unit costs and cell coordinates.
    #[arg(long)]
    scene: Option<PathBuf>,
    /// Placement record from `optimize`. Repeat to compare placements.
    #[arg(long)]
    solution: Vec<PathBuf>,
    /// Explicit lidar rows, comma separated (instead of --solution).
    #[arg(long, value_delimiter = ',')]
    select_lidar: Vec<usize>,
    /// Explicit radar rows, comma separated (instead of --solution).
    #[arg(long, value_delimiter = ',')]
    select_radar: Vec<usize>,
    /// Label for the explicit selection [default: manual].
    #[arg(long)]
    name: Option<String>,
    /// A cell is covered when some selected V exceeds theta [default: 0].
    #[arg(long)]
    theta: Option<f64>,
    /// Coverage record to write.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-cell covered flags of the first placement, for plotting.
    #[arg(long)]
    grid_out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct CoverageRecord {
    reports: Vec<CoverageReport>,
    comparison: Option<roadside_core::coverage::ConfigComparison>,
}

pub fn coverage(ctx: &Context, flags: CoverageArgs) -> Result<()> {
    let (a, echo) = merge(ctx, "coverage", flags)?;
    let mut run = Run::new("coverage", echo);
    let vl = load_matrix(&mut run, "lidar", &req(&a.lidar, "lidar")?, Modality::Lidar)?;
    let vr = load_matrix(&mut run, "radar", &req(&a.radar, "radar")?, Modality::Radar)?;
    let scene = a.scene.as_deref().map(|p| load_scene(&mut run, p)).transpose()?;
    check_provenance(&vl, &vr, scene.as_ref());
    let theta = a.theta.unwrap_or(0.0);
    let problem = build_problem(vl, vr, scene.as_ref(), 0, DEFAULT_TAU, None)?;

    let mut selections = Vec::new();
    for (k, path) in a.solution.iter().enumerate() {
        let name = path.file_stem().map_or_else(|| format!("solution{k}"), |s| s.to_string_lossy().into_owned());
        selections.push((name, load_selection(&mut run, &format!("solution{k}"), path)?));
    }
    if selections.is_empty() || !a.select_lidar.is_empty() || !a.select_radar.is_empty() {
        let name = a.name.clone().unwrap_or_else(|| "manual".into());
        selections.push((name, Selection::new(a.select_lidar.clone(), a.select_radar.clone())));
    }

    let mut reports = Vec::new();
    for (name, sel) in &selections {
        reports.push(central_coverage(&problem, sel, theta)?.named(name));
    }
    let comparison = (reports.len() >= 2).then(|| compare_configs(&reports)).transpose()?;
    match &comparison {
        Some(c) => print!("{}", c.to_text()),
        None => {
            let r = &reports[0];
            println!(
                "{}: central coverage {:.1}% ({}/{} cells; lidar {}, radar {}), cost {}",
                r.config_name,
                r.central_coverage * 100.0,
                r.covered_cells,
                r.total_roi_cells,
                r.lidar_covered_cells,
                r.radar_covered_cells,
                r.total_cost
            );
        }
    }

    let id = run.id();
    let mut manifest_at = None;
    if let Some(path) = &a.grid_out {
        let scene = scene.as_ref().ok_or_else(|| Usage("--grid-out needs --scene".into()))?;
        let flags = coverage_flags(&problem, &selections[0].1, theta)?;
        run.output("grid", path, &format!("# run {id}\n{}", grid_dump(scene, &flags)?))?;
        manifest_at = Some(beside(path));
    }
    if let Some(out) = &a.out {
        run.output("coverage", out, &write_report("coverage", Some(&id), &CoverageRecord { reports, comparison })?)?;
        manifest_at = Some(beside(out));
    }
    match manifest_at {
        Some(p) => run.finish(p),
        None => Ok(()),
    }
}

// ------------------------------------------------------------------ simulate

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateArgs {
    #[arg(long)]
    scene: Option<PathBuf>,
    #[arg(long)]
    lidar: Option<PathBuf>,
    #[arg(long)]
    radar: Option<PathBuf>,
    /// Placement record from `optimize`.
    #[arg(long)]
    solution: Option<PathBuf>,
    /// Explicit lidar rows, comma separated (instead of --solution).
    #[arg(long, value_delimiter = ',')]
    select_lidar: Vec<usize>,
    /// Explicit radar rows, comma separated (instead of --solution).
    #[arg(long, value_delimiter = ',')]
    select_radar: Vec<usize>,
    /// Random seed [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Number of frames [default: 100].
    #[arg(long)]
    frames: Option<usize>,
    /// Drop detector noise and score jitter.
    #[arg(long)]
    #[serde(default)]
    noiseless: bool,
    /// Directory for `ground_truth.frames`, `lidar.frames`, `radar.frames`.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Full scenario settings; config file only (`[simulate.scenario]`).
    #[arg(skip)]
    scenario: Option<ScenarioConfig>,
}

pub fn simulate(ctx: &Context, flags: SimulateArgs) -> Result<()> {
    let (a, echo) = merge(ctx, "simulate", flags)?;
    let mut run = Run::new("simulate", echo);
    let scene = load_scene(&mut run, &req(&a.scene, "scene")?)?;
    let vl = load_matrix(&mut run, "lidar", &req(&a.lidar, "lidar")?, Modality::Lidar)?;
    let vr = load_matrix(&mut run, "radar", &req(&a.radar, "radar")?, Modality::Radar)?;
    check_provenance(&vl, &vr, Some(&scene));
    let sel = match &a.solution {
        Some(p) if a.select_lidar.is_empty() && a.select_radar.is_empty() => load_selection(&mut run, "solution", p)?,
        Some(_) => return Err(Usage("give either --solution or --select-lidar/--select-radar".into()).into()),
        None => Selection::new(a.select_lidar.clone(), a.select_radar.clone()),
    };
    let mut cfg = a.scenario.clone().unwrap_or_default();
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(n) = a.frames {
        cfg.duration_frames = n;
    }
    if a.noiseless {
        cfg = cfg.noiseless();
    }
    let out = generate_scenario(&scene, &vl, &vr, &sel, &cfg)?;
    let id = run.id();
    let dir = req(&a.out_dir, "out-dir")?;
    create_dir(&dir)?;
    for (role, frames) in [("ground_truth", &out.ground_truth), ("lidar", &out.lidar), ("radar", &out.radar)] {
        let path = dir.join(format!("{role}.frames"));
        run.output(role, &path, &write_frames(frames, Some(&id)))?;
        let n: usize = frames.iter().map(|f| f.boxes.len()).sum();
        println!("{role}: {n} boxes in {} frames -> {}", frames.len(), path.display());
    }
    run.finish(dir.join("manifest.json"))
}

// ---------------------------------------------------------------------- fuse

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FuseArgs {
    /// Lidar detection frames.
    #[arg(long)]
    lidar_dets: Option<PathBuf>,
    /// Radar detection frames.
    #[arg(long)]
    radar_dets: Option<PathBuf>,
    /// Minimum IoU for merging a pair [default: 0.3].
    #[arg(long)]
    iou_threshold: Option<f64>,
    /// Fused frames to write.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn fuse(ctx: &Context, flags: FuseArgs) -> Result<()> {
    let (a, echo) = merge(ctx, "fuse", flags)?;
    let mut run = Run::new("fuse", echo);
    let load = |run: &mut Run, role: &str, p: &Path| -> Result<Vec<Frame>> {
        Ok(parse_frames(&run.input(role, p)?).with_context(|| format!("reading {}", p.display()))?.0)
    };
    let dl = load(&mut run, "lidar_dets", &req(&a.lidar_dets, "lidar-dets")?)?;
    let dr = load(&mut run, "radar_dets", &req(&a.radar_dets, "radar-dets")?)?;
    let cfg = FusionConfig { iou_threshold: a.iou_threshold.unwrap_or(FusionConfig::default().iou_threshold) };
    let fused = fuse_frames(&dl, &dr, &cfg)?;
    let count = |f: &[Frame]| f.iter().map(|f| f.boxes.len()).sum::<usize>();
    println!("lidar {} + radar {} -> fused {} boxes", count(&dl), count(&dr), count(&fused));
    let out = req(&a.out, "out")?;
    let id = run.id();
    run.output("fused", &out, &write_frames(&fused, Some(&id)))?;
    run.finish(beside(&out))
}

// ------------------------------------------------------------------ evaluate

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluateArgs {
    /// Ground-truth frames.
    #[arg(long)]
    gt: Option<PathBuf>,
    /// Prediction frames. Give twice to print per-class AP deltas.
    #[arg(long)]
    pred: Vec<PathBuf>,
    /// iou or center [default: iou].
    #[arg(long)]
    mode: Option<String>,
    /// Overrides the per-class thresholds (IoU 0.5 vehicles, 0.25
    /// pedestrian/motorcycle; centre distance 2 m).
    #[arg(long)]
    threshold: Option<f64>,
    /// Evaluation record to write.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct EvaluationRecord {
    results: Vec<(String, MapResult)>,
    comparison: Option<MapComparison>,
}

pub fn evaluate(ctx: &Context, flags: EvaluateArgs) -> Result<()> {
    let (a, echo) = merge(ctx, "evaluate", flags)?;
    let mut run = Run::new("evaluate", echo);
    if a.pred.is_empty() || a.pred.len() > 2 {
        return Err(Usage("give --pred once or twice".into()).into());
    }
    let mode: MatchMode = a.mode.as_deref().unwrap_or("iou").parse()?;
    let gt_path = req(&a.gt, "gt")?;
    let (gt, _) = parse_frames(&run.input("gt", &gt_path)?).with_context(|| format!("reading {}", gt_path.display()))?;
    let mut results = Vec::new();
    for (k, p) in a.pred.iter().enumerate() {
        let (pred, _) = parse_frames(&run.input(&format!("pred{k}"), p)?).with_context(|| format!("reading {}", p.display()))?;
        let name = p.file_stem().map_or_else(|| format!("pred{k}"), |s| s.to_string_lossy().into_owned());
        let map = evaluate_map(&pair_frames(&pred, &gt), mode, a.threshold).with_context(|| format!("evaluating {name}"))?;
        println!("== {name} ==");
        print!("{}", map.to_text());
        results.push((name, map));
    }
    let comparison = (results.len() == 2).then(|| compare_maps(&results[0].0, &results[0].1, &results[1].0, &results[1].1));
    if let Some(c) = &comparison {
        println!("== delta ==");
        print!("{}", c.to_text());
    }
    if let Some(out) = &a.out {
        let id = run.id();
        run.output("evaluation", out, &write_report("evaluation", Some(&id), &EvaluationRecord { results, comparison })?)?;
        run.finish(beside(out))?;
    }
    Ok(())
}

// ------------------------------------------------------------------ pipeline

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineArgs {
    #[arg(long)]
    scene: Option<PathBuf>,
    /// Pipeline file listing the configurations to compare.
    #[arg(long)]
    pipeline: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the scenario length.
    #[arg(long)]
    frames: Option<usize>,
    /// Directory for `report.txt`, `report.json` and `manifest.json`.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

pub fn pipeline(ctx: &Context, flags: PipelineArgs) -> Result<()> {
    let (a, echo) = merge(ctx, "pipeline", flags)?;
    let mut run = Run::new("pipeline", echo);
    let scene = load_scene(&mut run, &req(&a.scene, "scene")?)?;
    let cfg_path = req(&a.pipeline, "pipeline")?;
    let mut cfg = PipelineConfig::from_toml(&run.input("pipeline", &cfg_path)?)
        .with_context(|| format!("reading {}", cfg_path.display()))?;
    if let Some(s) = a.seed {
        cfg.scenario.seed = s;
    }
    if let Some(n) = a.frames {
        cfg.scenario.duration_frames = n;
    }
    let report: PipelineReport = run_pipeline(&scene, &cfg, ctx.workers)?;
    let text = report.to_text();
    print!("{text}");
    let id = run.id();
    let dir = req(&a.out_dir, "out-dir")?;
    create_dir(&dir)?;
    run.output("text", &dir.join("report.txt"), &format!("run {id}\n{text}"))?;
    run.output("record", &dir.join("report.json"), &write_report("pipeline", Some(&id), &report)?)?;
    run.finish(dir.join("manifest.json"))
}

// --------------------------------------------------------------- export-milp

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExportMilpArgs {
    #[arg(long)]
    lidar: Option<PathBuf>,
    #[arg(long)]
    radar: Option<PathBuf>,
    /// Scene file; supplies ROI weights and unit costs.
    #[arg(long)]
    scene: Option<PathBuf>,
    #[arg(long)]
    budget: Option<usize>,
    /// [default: 1]
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    cost_limit: Option<f64>,
    /// LP file to write.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn export_milp(ctx: &Context, flags: ExportMilpArgs) -> Result<()> {
    let (a, echo) = merge(ctx, "export_milp", flags)?;
    let mut run = Run::new("export-milp", echo);
    let vl = load_matrix(&mut run, "lidar", &req(&a.lidar, "lidar")?, Modality::Lidar)?;
    let vr = load_matrix(&mut run, "radar", &req(&a.radar, "radar")?, Modality::Radar)?;
    let scene = a.scene.as_deref().map(|p| load_scene(&mut run, p)).transpose()?;
    check_provenance(&vl, &vr, scene.as_ref());
    let problem = build_problem(vl, vr, scene.as_ref(), req(&a.budget, "budget")?, a.tau.unwrap_or(DEFAULT_TAU), a.cost_limit)?;
    let out = req(&a.out, "out")?;
    let id = run.id();
    let text = format!("\\ run {id}\n{}", render_lp(&problem));
    run.output("lp", &out, &text)?;
    println!("{} lines -> {}", text.lines().count(), out.display());
    run.finish(beside(&out))
}
