//! Ray-cast visibility of ROI cells from candidate mounts.
//!
//! Each entry of a [`VisibilityMatrix`] is the fraction of a cell's sample
//! lattice that a candidate can see, clamped to `1 - epsilon` so that the
//! log transform used by the placement constraints stays finite.

use serde::{Deserialize, Serialize};

use crate::scene::{CandidateMount, Modality, Occluder, Point3, Scene, SensorSpec};
use crate::{Error, Result};

pub const DEFAULT_EPSILON: f64 = 1e-6;

/// Rounds to the 9-significant-digit decimal used on disk.
pub fn canonical_value(v: f64) -> f64 {
    format!("{v:.8e}").parse().expect("formatted float re-parses")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VisibilityConfig {
    /// Samples per cell footprint; must be a perfect square (n×n lattice).
    pub samples_per_cell: usize,
    pub object_height_m: f64,
    /// Height of the line-of-sight probe. `None` means half the object height.
    pub sample_height_m: Option<f64>,
    pub epsilon: f64,
}

impl Default for VisibilityConfig {
    fn default() -> Self {
        VisibilityConfig {
            samples_per_cell: 9,
            object_height_m: 1.7,
            sample_height_m: None,
            epsilon: DEFAULT_EPSILON,
        }
    }
}

impl VisibilityConfig {
    pub fn probe_height(&self) -> f64 {
        self.sample_height_m.unwrap_or(self.object_height_m / 2.0)
    }

    fn lattice_side(&self) -> Option<usize> {
        let n = (self.samples_per_cell as f64).sqrt().round() as usize;
        (n >= 1 && n * n == self.samples_per_cell).then_some(n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lattice_side().is_none() {
            return Err(Error::Invalid(format!(
                "samples_per_cell {} must be a positive perfect square",
                self.samples_per_cell
            )));
        }
        if !(self.object_height_m > 0.0 && self.object_height_m.is_finite()) {
            return Err(Error::Invalid(format!("object_height_m {} must be > 0", self.object_height_m)));
        }
        let h = self.probe_height();
        if !(h >= 0.0 && h.is_finite()) {
            return Err(Error::Invalid(format!("sample_height_m {h} must be >= 0")));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Invalid(format!("epsilon {} must lie in (0, 1)", self.epsilon)));
        }
        Ok(())
    }
}

/// Dense candidate × ROI-cell matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct VisibilityMatrix {
    pub modality: Modality,
    rows: usize,
    cols: usize,
    pub epsilon: f64,
    values: Vec<f64>,
    /// Hash of the scene the matrix was computed from, if known.
    pub scene_hash: Option<String>,
}

impl VisibilityMatrix {
    pub fn new(modality: Modality, rows: usize, cols: usize, epsilon: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::Invalid(format!(
                "matrix has {} values, expected {rows}x{cols}",
                values.len()
            )));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Invalid(format!("epsilon {epsilon} must lie in (0, 1)")));
        }
        let upper = 1.0 - epsilon;
        if let Some((k, v)) = values.iter().enumerate().find(|(_, v)| !(**v >= 0.0 && **v <= upper)) {
            return Err(Error::Invalid(format!(
                "entry ({}, {}) = {v} outside [0, 1 - epsilon]",
                k / cols.max(1),
                k % cols.max(1)
            )));
        }
        Ok(VisibilityMatrix {
            modality,
            rows,
            cols,
            epsilon,
            values,
            scene_hash: None,
        })
    }

    pub fn from_rows(modality: Modality, cols: usize, rows: &[Vec<f64>]) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::Invalid(format!("row of length {} in a {cols}-column matrix", r.len())));
        }
        let values = rows.iter().flatten().copied().collect();
        Self::new(modality, rows.len(), cols, DEFAULT_EPSILON, values)
    }

    pub fn zeros(modality: Modality, rows: usize, cols: usize) -> Self {
        Self::new(modality, rows, cols, DEFAULT_EPSILON, vec![0.0; rows * cols]).expect("zeros are valid")
    }

    pub fn with_scene_hash(mut self, hash: impl Into<String>) -> Self {
        self.scene_hash = Some(hash.into());
        self
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Keeps only the listed rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(rows.len() * self.cols);
        for &i in rows {
            if i >= self.rows {
                return Err(Error::IndexOutOfRange { what: "matrix row", index: i, len: self.rows });
            }
            values.extend_from_slice(self.row(i));
        }
        Ok(VisibilityMatrix {
            rows: rows.len(),
            values,
            ..self.clone()
        })
    }
}

/// Beam elevations in degrees, uniformly spaced over `[-vfov/2, vfov/2]`.
pub fn beam_elevations(spec: &SensorSpec) -> Result<Vec<f64>> {
    let beams = match (spec.modality, spec.beams) {
        (Modality::Lidar, Some(b)) if b >= 2 => b as usize,
        (Modality::Lidar, _) => return Err(Error::Invalid("lidar spec needs at least 2 beams".into())),
        (Modality::Radar, _) => return Err(Error::Invalid("beam elevations requested for a radar spec".into())),
    };
    let half = spec.vfov_deg / 2.0;
    let steps = (beams - 1) as f64;
    // i * vfov / steps keeps nested beam sets (steps2 = k * steps1) bit-identical.
    Ok((0..beams).map(|i| (i as f64 * spec.vfov_deg) / steps - half).collect())
}

/// Precomputed pose and sensor model of one mount.
struct MountModel<'a> {
    origin: Point3,
    cos_yaw: f64,
    sin_yaw: f64,
    cos_pitch: f64,
    sin_pitch: f64,
    spec: &'a SensorSpec,
    beams: Vec<f64>,
}

impl<'a> MountModel<'a> {
    fn new(mount: &CandidateMount, spec: &'a SensorSpec) -> Result<Self> {
        let beams = match spec.modality {
            Modality::Lidar => beam_elevations(spec)?,
            Modality::Radar => Vec::new(),
        };
        let (sin_yaw, cos_yaw) = mount.yaw_deg.to_radians().sin_cos();
        let (sin_pitch, cos_pitch) = mount.pitch_deg.to_radians().sin_cos();
        Ok(MountModel {
            origin: mount.position,
            cos_yaw,
            sin_yaw,
            cos_pitch,
            sin_pitch,
            spec,
            beams,
        })
    }

    /// Direction to `p` in the sensor frame as (azimuth, elevation) degrees.
    fn angles_to(&self, p: Point3) -> (f64, f64) {
        let dx = p[0] - self.origin[0];
        let dy = p[1] - self.origin[1];
        let dz = p[2] - self.origin[2];
        let x1 = self.cos_yaw * dx + self.sin_yaw * dy;
        let y1 = -self.sin_yaw * dx + self.cos_yaw * dy;
        // positive pitch tilts the boresight downward
        let x2 = self.cos_pitch * x1 - self.sin_pitch * dz;
        let z2 = self.sin_pitch * x1 + self.cos_pitch * dz;
        let az = y1.atan2(x2).to_degrees();
        let el = z2.atan2(x2.hypot(y1)).to_degrees();
        (az, el)
    }

    fn sample_covered(&self, xy: [f64; 2], cfg: &VisibilityConfig, occluders: &[Occluder]) -> bool {
        let horizontal = (xy[0] - self.origin[0]).hypot(xy[1] - self.origin[1]);
        if horizontal > self.spec.max_range_m {
            return false;
        }
        let probe = [xy[0], xy[1], cfg.probe_height()];
        let (az, el) = self.angles_to(probe);
        if self.spec.hfov_deg < 360.0 && az.abs() > self.spec.hfov_deg / 2.0 {
            return false;
        }
        let gate = match self.spec.modality {
            Modality::Radar => el.abs() <= self.spec.vfov_deg / 2.0,
            Modality::Lidar => {
                let (_, el_foot) = self.angles_to([xy[0], xy[1], 0.0]);
                let (_, el_head) = self.angles_to([xy[0], xy[1], cfg.object_height_m]);
                let (lo, hi) = if el_foot <= el_head { (el_foot, el_head) } else { (el_head, el_foot) };
                let first = self.beams.partition_point(|&b| b < lo);
                first < self.beams.len() && self.beams[first] <= hi
            }
        };
        gate && !occluders.iter().any(|o| segment_hits_box(self.origin, probe, o))
    }
}

/// Slab test of the closed segment `a → b` against an axis-aligned box.
pub fn segment_hits_box(a: Point3, b: Point3, occ: &Occluder) -> bool {
    let mut t_min = 0.0_f64;
    let mut t_max = 1.0_f64;
    for axis in 0..3 {
        let d = b[axis] - a[axis];
        let (lo, hi) = (occ.min_corner[axis], occ.max_corner[axis]);
        if d == 0.0 {
            if a[axis] < lo || a[axis] > hi {
                return false;
            }
            continue;
        }
        let (mut t1, mut t2) = ((lo - a[axis]) / d, (hi - a[axis]) / d);
        if t1 > t2 {
            std::mem::swap(&mut t1, &mut t2);
        }
        t_min = t_min.max(t1);
        t_max = t_max.min(t2);
        if t_min > t_max {
            return false;
        }
    }
    true
}

fn cell_value(
    scene: &Scene,
    model: &MountModel<'_>,
    cell: usize,
    side: usize,
    cfg: &VisibilityConfig,
) -> Result<f64> {
    let (row, col) = scene.grid.row_col(cell)?;
    let size = scene.grid.cell_size;
    let x0 = scene.grid.origin_xy[0] + col as f64 * size;
    let y0 = scene.grid.origin_xy[1] + row as f64 * size;
    let mut covered = 0usize;
    for a in 0..side {
        for b in 0..side {
            let xy = [
                x0 + (b as f64 + 0.5) / side as f64 * size,
                y0 + (a as f64 + 0.5) / side as f64 * size,
            ];
            if model.sample_covered(xy, cfg, &scene.occluders) {
                covered += 1;
            }
        }
    }
    let upper = 1.0 - cfg.epsilon;
    let v = canonical_value((covered as f64 / (side * side) as f64).min(upper));
    Ok(v.min(upper))
}

/// Fraction of cell `cell`'s sample lattice visible from `mount`.
pub fn cell_visibility(scene: &Scene, mount: &CandidateMount, cell: usize, cfg: &VisibilityConfig) -> Result<f64> {
    cfg.validate()?;
    let spec = scene.spec_of(mount)?;
    let model = MountModel::new(mount, spec)?;
    cell_value(scene, &model, cell, cfg.lattice_side().expect("validated"), cfg)
}

fn build_one(scene: &Scene, modality: Modality, cfg: &VisibilityConfig) -> Result<VisibilityMatrix> {
    let side = cfg.lattice_side().expect("validated");
    let cells: Vec<usize> = scene.roi.cells.iter().copied().collect();
    let mounts = scene.candidates(modality);

    let row = |mount: &CandidateMount| -> Result<Vec<f64>> {
        let model = MountModel::new(mount, scene.spec_of(mount)?)?;
        cells.iter().map(|&c| cell_value(scene, &model, c, side, cfg)).collect()
    };

    #[cfg(feature = "parallel")]
    let rows: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        mounts.par_iter().map(row).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Vec<f64>> = mounts.iter().map(row).collect::<Result<_>>()?;

    let values = rows.into_iter().flatten().collect();
    Ok(VisibilityMatrix::new(modality, mounts.len(), cells.len(), cfg.epsilon, values)?
        .with_scene_hash(scene.content_hash()))
}

/// Builds `(V^l, V^r)` for a scene. Entry `(i, j)` is the visibility of ROI
/// column `j` from candidate `i` of that modality.
pub fn build_visibility(scene: &Scene, cfg: &VisibilityConfig) -> Result<(VisibilityMatrix, VisibilityMatrix)> {
    crate::scene::ensure_valid(scene)?;
    cfg.validate()?;
    Ok((build_one(scene, Modality::Lidar, cfg)?, build_one(scene, Modality::Radar, cfg)?))
}

/// As [`build_visibility`], on a dedicated pool of `workers` threads.
/// `workers == 0` uses the global pool. Output does not depend on the count.
pub fn build_visibility_with_workers(
    scene: &Scene,
    cfg: &VisibilityConfig,
    workers: usize,
) -> Result<(VisibilityMatrix, VisibilityMatrix)> {
    #[cfg(feature = "parallel")]
    if workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Invalid(format!("cannot start {workers} workers: {e}")))?;
        return pool.install(|| build_visibility(scene, cfg));
    }
    let _ = workers;
    build_visibility(scene, cfg)
}

/// Entrywise `-ln(1 - v)`.
pub fn log_visibility(v: &VisibilityMatrix) -> Result<Vec<f64>> {
    v.values()
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            if !(0.0..1.0).contains(&x) {
                return Err(Error::Invalid(format!(
                    "visibility entry {k} = {x} cannot be log-transformed (matrix corrupted?)"
                )));
            }
            Ok(-(-x).ln_1p())
        })
        .collect()
}

/// `-ln(1 - v)` for a single probability.
pub fn log_miss(v: f64) -> f64 {
    -(-v).ln_1p()
}
