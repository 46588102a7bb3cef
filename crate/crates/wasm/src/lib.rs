//! Browser bindings for the static demo in `www/`.
//!
//! Each exported function wraps a plain Rust function returning
//! `roadside_core::Result`, so the logic is testable off the browser.

use roadside_core::coverage::{central_coverage, coverage_flags};
use roadside_core::demo::{intersection_scene, DemoOptions};
use roadside_core::detection::{DetectionBox, ObjectClass, Source};
use roadside_core::iou::{bev_corners, clip_convex, iou_3d, polygon_area, Point2};
use roadside_core::placement::{solve, PlacementProblem, Selection, Solver};
use roadside_core::scene::{Modality, Scene};
use roadside_core::visibility::{build_visibility, VisibilityConfig, VisibilityMatrix};
use roadside_core::{Error, Result};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("plain data serializes")
}

/// The demo intersection with its visibility matrices precomputed.
#[wasm_bindgen]
pub struct Planner {
    scene: Scene,
    vl: VisibilityMatrix,
    vr: VisibilityMatrix,
}

#[derive(Serialize)]
struct Mount {
    id: String,
    spec: String,
    x: f64,
    y: f64,
    z: f64,
}

#[derive(Serialize)]
struct Layout {
    nx: usize,
    ny: usize,
    cell_size: f64,
    origin: [f64; 2],
    /// Per grid cell ROI weight, 0 outside the ROI.
    weights: Vec<f64>,
    /// Occluder footprints as `[xmin, ymin, xmax, ymax, height]`.
    occluders: Vec<[f64; 5]>,
    lidar: Vec<Mount>,
    radar: Vec<Mount>,
}

#[derive(Serialize)]
struct Plan {
    lidar: Vec<usize>,
    radar: Vec<usize>,
    objective: f64,
    optimal: bool,
    coverage: f64,
    covered_cells: usize,
    cost: f64,
}

/// Per grid cell state codes returned by [`Planner::coverage`].
pub const OUTSIDE: u8 = 0;
pub const UNSEEN: u8 = 1;
pub const LIDAR_ONLY: u8 = 2;
pub const RADAR_ONLY: u8 = 3;
pub const BOTH: u8 = 4;

impl Planner {
    pub fn build(road_half_width: usize, buildings: bool) -> Result<Planner> {
        let opts = DemoOptions { road_half_width, buildings, ..DemoOptions::default() };
        let scene = intersection_scene(&opts);
        let (vl, vr) = build_visibility(&scene, &VisibilityConfig::default())?;
        Ok(Planner { scene, vl, vr })
    }

    fn problem(&self, budget: usize, tau: f64) -> Result<PlacementProblem> {
        PlacementProblem::new(self.vl.clone(), self.vr.clone(), self.scene.roi.weight_vector(), budget, tau)?
            .with_costs(self.scene.unit_costs(Modality::Lidar), self.scene.unit_costs(Modality::Radar))
    }

    fn layout_data(&self) -> Layout {
        let g = &self.scene.grid;
        let mounts = |m: Modality| {
            self.scene
                .candidates(m)
                .iter()
                .map(|c| Mount {
                    id: c.id.clone(),
                    spec: c.spec.clone(),
                    x: c.position[0],
                    y: c.position[1],
                    z: c.position[2],
                })
                .collect()
        };
        Layout {
            nx: g.nx,
            ny: g.ny,
            cell_size: g.cell_size,
            origin: g.origin_xy,
            weights: (0..g.num_cells())
                .map(|j| if self.scene.roi.column_of(j).is_some() { self.scene.roi.weight(j) } else { 0.0 })
                .collect(),
            occluders: self
                .scene
                .occluders
                .iter()
                .map(|o| [o.min_corner[0], o.min_corner[1], o.max_corner[0], o.max_corner[1], o.max_corner[2]])
                .collect(),
            lidar: mounts(Modality::Lidar),
            radar: mounts(Modality::Radar),
        }
    }

    pub fn plan(&self, budget: usize, tau: f64, solver: &str) -> Result<String> {
        let p = self.problem(budget, tau)?;
        let sol = solve(&p, solver.parse::<Solver>()?)?;
        let cov = central_coverage(&p, &sol.selection, 0.0)?;
        Ok(json(&Plan {
            lidar: sol.selection.lidar.clone(),
            radar: sol.selection.radar.clone(),
            objective: sol.objective,
            optimal: sol.optimal,
            coverage: cov.central_coverage,
            covered_cells: cov.covered_cells,
            cost: cov.total_cost,
        }))
    }

    pub fn cell_states(&self, lidar: &[u32], radar: &[u32]) -> Result<Vec<u8>> {
        let sel = Selection::new(lidar.iter().map(|&i| i as usize), radar.iter().map(|&i| i as usize));
        let flags = coverage_flags(&self.problem(sel.len(), 1.0)?, &sel, 0.0)?;
        let roi = &self.scene.roi;
        Ok((0..self.scene.grid.num_cells())
            .map(|j| match roi.column_of(j).map(|c| flags[c]) {
                None => OUTSIDE,
                Some((_, true, true)) => BOTH,
                Some((_, true, false)) => LIDAR_ONLY,
                Some((_, false, true)) => RADAR_ONLY,
                Some(_) => UNSEEN,
            })
            .collect())
    }
}

#[wasm_bindgen]
impl Planner {
    /// Builds the demo scene and ray-casts every candidate. Takes a moment.
    #[wasm_bindgen(constructor)]
    pub fn new(road_half_width: usize, buildings: bool) -> std::result::Result<Planner, JsError> {
        Planner::build(road_half_width, buildings).map_err(js)
    }

    /// Grid, ROI weights, occluders and candidate mounts as JSON.
    pub fn layout(&self) -> String {
        json(&self.layout_data())
    }

    /// Solves the placement and returns the chosen indices and coverage as JSON.
    pub fn optimize(&self, budget: usize, tau: f64, solver: &str) -> std::result::Result<String, JsError> {
        self.plan(budget, tau, solver).map_err(js)
    }

    /// One state code per grid cell for a hand-picked selection.
    pub fn coverage(&self, lidar: Vec<u32>, radar: Vec<u32>) -> std::result::Result<Vec<u8>, JsError> {
        self.cell_states(&lidar, &radar).map_err(js)
    }
}

#[derive(Serialize)]
struct Overlap {
    iou: f64,
    bev_intersection: f64,
    a: [Point2; 4],
    b: [Point2; 4],
    overlap: Vec<Point2>,
}

fn parse_box(v: &[f64]) -> Result<DetectionBox> {
    let [x, y, z, l, w, h, yaw] = v else {
        return Err(Error::Invalid(format!("box needs 7 numbers (x y z l w h yaw), got {}", v.len())));
    };
    let b = DetectionBox::new([*x, *y, *z], [*l, *w, *h], *yaw, ObjectClass::Car, 1.0, Source::Lidar);
    b.validate()?;
    Ok(b)
}

pub fn overlap_of(a: &[f64], b: &[f64]) -> Result<String> {
    let (a, b) = (parse_box(a)?, parse_box(b)?);
    let (ca, cb) = (bev_corners(&a), bev_corners(&b));
    let overlap = clip_convex(&ca, &cb);
    Ok(json(&Overlap {
        iou: iou_3d(&a, &b),
        bev_intersection: polygon_area(&overlap).max(0.0),
        a: ca,
        b: cb,
        overlap,
    }))
}

/// Rotated-box IoU with the footprints and their clipped overlap, as JSON.
/// Boxes are `[x, y, z, length, width, height, yaw]`.
#[wasm_bindgen]
pub fn box_overlap(a: &[f64], b: &[f64]) -> std::result::Result<String, JsError> {
    overlap_of(a, b).map_err(js)
}
