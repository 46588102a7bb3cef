//! Synthetic four-way intersection scenes.

use std::collections::BTreeMap;

use crate::scene::{CandidateMount, GridSpec, Occluder, RegionOfInterest, Scene, SensorSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct DemoOptions {
    pub n: usize,
    pub cell_size: f64,
    /// Half width of each road, in cells.
    pub road_half_width: usize,
    /// Adds a box-shaped building in each corner block.
    pub buildings: bool,
    pub pole_heights: Vec<f64>,
    /// ROI weight of the crosswalk cells; other road cells weigh 1.
    pub crosswalk_weight: f64,
}

impl Default for DemoOptions {
    fn default() -> Self {
        DemoOptions {
            n: 50,
            cell_size: 1.5,
            road_half_width: 5,
            buildings: true,
            pole_heights: vec![4.5, 6.0],
            crosswalk_weight: 3.0,
        }
    }
}

/// Demo sensor catalogue. Prices are illustrative relative units.
pub fn demo_specs() -> BTreeMap<String, SensorSpec> {
    [
        ("lidar_16", SensorSpec::lidar_16().with_cost(1.0)),
        ("lidar_32", SensorSpec::lidar_32().with_cost(2.2)),
        ("lidar_64", SensorSpec::lidar_64().with_cost(5.0)),
        ("radar_4d", SensorSpec::radar_4d().with_cost(0.5)),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

fn centered_grid(n: usize, cell_size: f64) -> GridSpec {
    let half = n as f64 * cell_size / 2.0;
    GridSpec { origin_xy: [-half, -half], cell_size, nx: n, ny: n }
}

/// Cross-shaped ROI of two crossing roads, with heavier crosswalk bands
/// just outside the junction box.
pub fn intersection_scene(opts: &DemoOptions) -> Scene {
    let grid = centered_grid(opts.n, opts.cell_size);
    let mid = opts.n / 2;
    let hw = opts.road_half_width.min(mid);
    let on_road = |i: usize| i + hw >= mid && i < mid + hw;
    let mut roi = RegionOfInterest::default();
    for row in 0..opts.n {
        for col in 0..opts.n {
            if on_road(row) || on_road(col) {
                let j = grid.index(row, col).expect("in range");
                roi.cells.insert(j);
                let crosswalk = |i: usize| i + hw + 2 == mid || i + hw + 1 == mid || i == mid + hw || i == mid + hw + 1;
                if (on_road(row) && crosswalk(col)) || (on_road(col) && crosswalk(row)) {
                    roi.weights.insert(j, opts.crosswalk_weight);
                }
            }
        }
    }

    let road_edge = hw as f64 * opts.cell_size;
    let far = opts.n as f64 * opts.cell_size / 2.0;
    let occluders = if opts.buildings {
        let (a, b) = (road_edge + 3.0, far - 2.0);
        [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)]
            .iter()
            .filter(|_| b > a)
            .map(|&(sx, sy): &(f64, f64)| {
                let xs = [sx * a, sx * b];
                let ys = [sy * a, sy * b];
                Occluder {
                    min_corner: [xs[0].min(xs[1]), ys[0].min(ys[1]), 0.0],
                    max_corner: [xs[0].max(xs[1]), ys[0].max(ys[1]), 12.0],
                }
            })
            .collect()
    } else {
        Vec::new()
    };

    let pole = road_edge + 1.0;
    let mut lidar_candidates = Vec::new();
    let mut radar_candidates = Vec::new();
    for (p, (sx, sy)) in [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)].into_iter().enumerate() {
        let (x, y): (f64, f64) = (sx * pole, sy * pole);
        let yaw = (-y).atan2(-x).to_degrees();
        for &h in &opts.pole_heights {
            for spec in ["lidar_16", "lidar_32", "lidar_64"] {
                lidar_candidates.push(CandidateMount::new(format!("p{p}_{h}m_{spec}"), [x, y, h], spec));
            }
            radar_candidates
                .push(CandidateMount::new(format!("p{p}_{h}m_radar"), [x, y, h], "radar_4d").with_pose(yaw, -5.0));
        }
    }

    Scene {
        grid,
        roi,
        occluders,
        specs: demo_specs(),
        lidar_candidates,
        radar_candidates,
    }
}

/// Open `n × n` grid, every cell in the ROI, one lidar mount at `position`.
pub fn single_mount_scene(n: usize, cell_size: f64, spec: SensorSpec, position: [f64; 3]) -> Scene {
    let grid = centered_grid(n, cell_size);
    let roi = RegionOfInterest::new(0..grid.num_cells());
    let mut specs = BTreeMap::new();
    specs.insert("lidar".to_string(), spec);
    Scene {
        grid,
        roi,
        occluders: Vec::new(),
        specs,
        lidar_candidates: vec![CandidateMount::new("mount", position, "lidar")],
        radar_candidates: Vec::new(),
    }
}
