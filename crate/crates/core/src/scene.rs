//! World model: grid, region of interest, occluders and candidate mounts.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A 3D position in metres, `[x, y, z]`.
pub type Point3 = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Lidar,
    Radar,
}

impl Modality {
    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Lidar => "lidar",
            Modality::Radar => "radar",
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Modality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lidar" => Ok(Modality::Lidar),
            "radar" => Ok(Modality::Radar),
            other => Err(Error::Invalid(format!("unknown modality `{other}`"))),
        }
    }
}

/// Regular ground grid. Cell `j` sits at `row = j / nx`, `col = j % nx`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub origin_xy: [f64; 2],
    pub cell_size: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn num_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn row_col(&self, j: usize) -> Result<(usize, usize)> {
        if j >= self.num_cells() {
            return Err(Error::IndexOutOfRange {
                what: "grid cell",
                index: j,
                len: self.num_cells(),
            });
        }
        Ok((j / self.nx, j % self.nx))
    }

    pub fn index(&self, row: usize, col: usize) -> Option<usize> {
        (row < self.ny && col < self.nx).then(|| row * self.nx + col)
    }

    /// Cell containing the ground point `(x, y)`, if it lies on the grid.
    pub fn cell_at(&self, x: f64, y: f64) -> Option<usize> {
        let fx = (x - self.origin_xy[0]) / self.cell_size;
        let fy = (y - self.origin_xy[1]) / self.cell_size;
        if !(fx >= 0.0 && fy >= 0.0) {
            return None;
        }
        self.index(fy.floor() as usize, fx.floor() as usize)
    }

    /// Ground-level centre of cell `j`.
    pub fn cell_center(&self, j: usize) -> Result<Point3> {
        let (row, col) = self.row_col(j)?;
        Ok([
            self.origin_xy[0] + (col as f64 + 0.5) * self.cell_size,
            self.origin_xy[1] + (row as f64 + 0.5) * self.cell_size,
            0.0,
        ])
    }
}

/// Free-function form of [`GridSpec::cell_center`].
pub fn cell_center(grid: &GridSpec, j: usize) -> Result<Point3> {
    grid.cell_center(j)
}

/// Target cells requiring monitoring and their importance weights.
///
/// Cells without an explicit weight have weight 1.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RegionOfInterest {
    pub cells: BTreeSet<usize>,
    pub weights: BTreeMap<usize, f64>,
}

impl RegionOfInterest {
    pub fn new(cells: impl IntoIterator<Item = usize>) -> Self {
        RegionOfInterest {
            cells: cells.into_iter().collect(),
            weights: BTreeMap::new(),
        }
    }

    pub fn with_weight(mut self, cell: usize, weight: f64) -> Self {
        self.weights.insert(cell, weight);
        self
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn weight(&self, cell: usize) -> f64 {
        self.weights.get(&cell).copied().unwrap_or(1.0)
    }

    /// Weights in column order (ascending cell index).
    pub fn weight_vector(&self) -> Vec<f64> {
        self.cells.iter().map(|&c| self.weight(c)).collect()
    }

    /// Column position of `cell` in the visibility matrices.
    pub fn column_of(&self, cell: usize) -> Option<usize> {
        self.cells.contains(&cell).then(|| self.cells.range(..cell).count())
    }
}

/// Axis-aligned box obstacle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Occluder {
    pub min_corner: Point3,
    pub max_corner: Point3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorSpec {
    pub modality: Modality,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beams: Option<u32>,
    pub hfov_deg: f64,
    pub vfov_deg: f64,
    pub max_range_m: f64,
    pub rate_hz: f64,
    pub unit_cost: f64,
}

impl SensorSpec {
    pub fn lidar(beams: u32, vfov_deg: f64, max_range_m: f64) -> Self {
        SensorSpec {
            modality: Modality::Lidar,
            beams: Some(beams),
            hfov_deg: 360.0,
            vfov_deg,
            max_range_m,
            rate_hz: 20.0,
            unit_cost: 0.0,
        }
    }

    pub fn radar(hfov_deg: f64, vfov_deg: f64, max_range_m: f64) -> Self {
        SensorSpec {
            modality: Modality::Radar,
            beams: None,
            hfov_deg,
            vfov_deg,
            max_range_m,
            rate_hz: 20.0,
            unit_cost: 0.0,
        }
    }

    pub fn with_cost(mut self, unit_cost: f64) -> Self {
        self.unit_cost = unit_cost;
        self
    }

    /// High-resolution LiDAR: 64 beams, 45° VFOV, 90 m.
    pub fn lidar_64() -> Self {
        Self::lidar(64, 45.0, 90.0)
    }

    /// Mid-resolution LiDAR: 32 beams, 45° VFOV, 90 m.
    pub fn lidar_32() -> Self {
        Self::lidar(32, 45.0, 90.0)
    }

    /// Low-resolution LiDAR: 16 beams, 30° VFOV, 100 m.
    pub fn lidar_16() -> Self {
        Self::lidar(16, 30.0, 100.0)
    }

    /// 4D radar: 120° HFOV, 28° VFOV, 90 m.
    pub fn radar_4d() -> Self {
        Self::radar(120.0, 28.0, 90.0)
    }

    fn violations(&self, name: &str, out: &mut Vec<Violation>) {
        let mut push = |msg: String| out.push(Violation::new(ViolationKind::InvalidSpec, format!("spec {name}"), msg));
        match (self.modality, self.beams) {
            (Modality::Lidar, None) => push("lidar spec has no beam count".into()),
            (Modality::Lidar, Some(b)) if b < 2 => push(format!("lidar beam count {b} < 2")),
            (Modality::Radar, Some(_)) => push("radar spec carries a beam count".into()),
            _ => {}
        }
        if !(self.hfov_deg > 0.0 && self.hfov_deg <= 360.0) {
            push(format!("hfov_deg {} outside (0, 360]", self.hfov_deg));
        }
        if !(self.vfov_deg > 0.0 && self.vfov_deg < 180.0) {
            push(format!("vfov_deg {} outside (0, 180)", self.vfov_deg));
        }
        if !(self.max_range_m > 0.0 && self.max_range_m.is_finite()) {
            push(format!("max_range_m {} must be > 0", self.max_range_m));
        }
        if !(self.rate_hz > 0.0 && self.rate_hz.is_finite()) {
            push(format!("rate_hz {} must be > 0", self.rate_hz));
        }
        if !(self.unit_cost >= 0.0 && self.unit_cost.is_finite()) {
            push(format!("unit_cost {} must be >= 0", self.unit_cost));
        }
    }
}

/// A possible mounting point. `spec` names an entry of [`Scene::specs`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateMount {
    pub id: String,
    pub position: Point3,
    #[serde(default)]
    pub yaw_deg: f64,
    #[serde(default)]
    pub pitch_deg: f64,
    pub spec: String,
}

impl CandidateMount {
    pub fn new(id: impl Into<String>, position: Point3, spec: impl Into<String>) -> Self {
        CandidateMount {
            id: id.into(),
            position,
            yaw_deg: 0.0,
            pitch_deg: 0.0,
            spec: spec.into(),
        }
    }

    pub fn with_pose(mut self, yaw_deg: f64, pitch_deg: f64) -> Self {
        self.yaw_deg = yaw_deg;
        self.pitch_deg = pitch_deg;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub grid: GridSpec,
    pub roi: RegionOfInterest,
    pub occluders: Vec<Occluder>,
    pub specs: BTreeMap<String, SensorSpec>,
    pub lidar_candidates: Vec<CandidateMount>,
    pub radar_candidates: Vec<CandidateMount>,
}

impl Scene {
    pub fn candidates(&self, modality: Modality) -> &[CandidateMount] {
        match modality {
            Modality::Lidar => &self.lidar_candidates,
            Modality::Radar => &self.radar_candidates,
        }
    }

    pub fn spec_of(&self, mount: &CandidateMount) -> Result<&SensorSpec> {
        self.specs
            .get(&mount.spec)
            .ok_or_else(|| Error::Invalid(format!("candidate {} references unknown spec `{}`", mount.id, mount.spec)))
    }

    /// Unit costs of one candidate set, in scene order. Unknown specs cost 0.
    pub fn unit_costs(&self, modality: Modality) -> Vec<f64> {
        self.candidates(modality)
            .iter()
            .map(|m| self.specs.get(&m.spec).map_or(0.0, |s| s.unit_cost))
            .collect()
    }

    /// Canonical content hash, independent of file layout.
    pub fn content_hash(&self) -> String {
        crate::hash::sha256_hex(crate::io::scene_file::scene_body(self).as_bytes())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    InvalidGrid,
    EmptyRoi,
    CellOutOfBounds,
    NegativeWeight,
    WeightOutsideRoi,
    InvalidOccluder,
    InvalidSpec,
    UnknownSpec,
    WrongModality,
    BelowGround,
    DuplicateId,
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    /// The cell, candidate, spec or occluder the violation refers to.
    pub subject: String,
    pub message: String,
}

impl Violation {
    fn new(kind: ViolationKind, subject: impl Into<String>, message: impl Into<String>) -> Self {
        Violation {
            kind,
            subject: subject.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.subject, self.message)
    }
}

/// Checks every scene invariant. An empty report means the scene is valid.
pub fn validate_scene(scene: &Scene) -> Vec<Violation> {
    use ViolationKind::*;
    let mut out = Vec::new();

    let grid = &scene.grid;
    if !(grid.cell_size > 0.0 && grid.cell_size.is_finite()) {
        out.push(Violation::new(InvalidGrid, "grid", format!("cell_size {} must be > 0", grid.cell_size)));
    }
    if grid.nx == 0 || grid.ny == 0 {
        out.push(Violation::new(InvalidGrid, "grid", format!("grid {}x{} has no cells", grid.nx, grid.ny)));
    }
    if !grid.origin_xy.iter().all(|v| v.is_finite()) {
        out.push(Violation::new(NonFinite, "grid", "origin is not finite"));
    }

    if scene.roi.is_empty() {
        out.push(Violation::new(EmptyRoi, "roi", "region of interest has no cells"));
    }
    let n_cells = grid.num_cells();
    for &c in scene.roi.cells.range(n_cells..) {
        out.push(Violation::new(CellOutOfBounds, format!("cell {c}"), "cell out of grid bounds"));
    }
    for (&c, &w) in &scene.roi.weights {
        if !scene.roi.cells.contains(&c) {
            out.push(Violation::new(WeightOutsideRoi, format!("cell {c}"), "weighted cell is not in the ROI"));
        }
        if !(w >= 0.0 && w.is_finite()) {
            out.push(Violation::new(NegativeWeight, format!("cell {c}"), format!("weight {w} must be >= 0")));
        }
    }

    for (k, occ) in scene.occluders.iter().enumerate() {
        let finite = occ.min_corner.iter().chain(&occ.max_corner).all(|v| v.is_finite());
        if !finite {
            out.push(Violation::new(NonFinite, format!("occluder {k}"), "corner is not finite"));
        } else if (0..3).any(|a| occ.min_corner[a] > occ.max_corner[a]) {
            out.push(Violation::new(InvalidOccluder, format!("occluder {k}"), "min_corner exceeds max_corner"));
        }
    }

    for (name, spec) in &scene.specs {
        spec.violations(name, &mut out);
    }

    let mut seen = HashSet::new();
    for (expected, mounts) in [(Modality::Lidar, &scene.lidar_candidates), (Modality::Radar, &scene.radar_candidates)] {
        for m in mounts {
            let subject = format!("candidate {}", m.id);
            if !seen.insert(m.id.as_str()) {
                out.push(Violation::new(DuplicateId, subject.clone(), "duplicate id"));
            }
            if !m.position.iter().all(|v| v.is_finite()) || !m.yaw_deg.is_finite() || !m.pitch_deg.is_finite() {
                out.push(Violation::new(NonFinite, subject.clone(), "pose is not finite"));
            } else if m.position[2] <= 0.0 {
                out.push(Violation::new(BelowGround, subject.clone(), format!("z = {} is not above ground", m.position[2])));
            }
            match scene.specs.get(&m.spec) {
                None => out.push(Violation::new(UnknownSpec, subject, format!("unknown spec `{}`", m.spec))),
                Some(spec) if spec.modality != expected => out.push(Violation::new(
                    WrongModality,
                    subject,
                    format!("{} spec `{}` listed among {} candidates", spec.modality, m.spec, expected),
                )),
                Some(_) => {}
            }
        }
    }

    out
}

/// Fails with [`Error::Invalid`] listing every violation.
pub fn ensure_valid(scene: &Scene) -> Result<()> {
    let report = validate_scene(scene);
    if report.is_empty() {
        return Ok(());
    }
    let lines: Vec<String> = report.iter().map(|v| v.to_string()).collect();
    Err(Error::Invalid(format!("scene has {} violation(s): {}", report.len(), lines.join("; "))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_scene() -> Scene {
        let mut specs = BTreeMap::new();
        specs.insert("l16".to_string(), SensorSpec::lidar_16());
        Scene {
            grid: GridSpec { origin_xy: [0.0, 0.0], cell_size: 2.0, nx: 4, ny: 4 },
            roi: RegionOfInterest::new([0, 1, 4, 5]),
            occluders: vec![],
            specs,
            lidar_candidates: vec![CandidateMount::new("L0", [0.0, 0.0, 5.0], "l16")],
            radar_candidates: vec![],
        }
    }

    #[test]
    fn valid_scene_has_empty_report() {
        assert!(validate_scene(&tiny_scene()).is_empty());
    }

    #[test]
    fn roi_cell_outside_grid() {
        let mut s = tiny_scene();
        s.roi.cells.insert(16);
        let r = validate_scene(&s);
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].kind, ViolationKind::CellOutOfBounds);
        assert_eq!(r[0].message, "cell out of grid bounds");
        assert_eq!(r[0].subject, "cell 16");
    }

    #[test]
    fn duplicate_candidate_id() {
        let mut s = tiny_scene();
        s.lidar_candidates.push(CandidateMount::new("L0", [1.0, 1.0, 4.0], "l16"));
        let r = validate_scene(&s);
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].kind, ViolationKind::DuplicateId);
        assert_eq!(r[0].message, "duplicate id");
    }

    #[test]
    fn wrong_set_and_below_ground() {
        let mut s = tiny_scene();
        s.specs.insert("r".into(), SensorSpec::radar_4d());
        s.lidar_candidates.push(CandidateMount::new("X", [1.0, 1.0, 0.0], "r"));
        let kinds: Vec<_> = validate_scene(&s).into_iter().map(|v| v.kind).collect();
        assert_eq!(kinds, vec![ViolationKind::BelowGround, ViolationKind::WrongModality]);
    }

    #[test]
    fn spec_invariants() {
        let mut s = tiny_scene();
        s.specs.insert("bad".into(), SensorSpec { beams: Some(4), ..SensorSpec::radar(400.0, 180.0, 0.0) });
        let r = validate_scene(&s);
        assert_eq!(r.len(), 4, "{r:?}");
        assert!(r.iter().all(|v| v.kind == ViolationKind::InvalidSpec));
    }

    #[test]
    fn weights_must_be_in_roi_and_nonnegative() {
        let mut s = tiny_scene();
        s.roi = s.roi.with_weight(9, 1.0).with_weight(0, -2.0);
        let kinds: Vec<_> = validate_scene(&s).into_iter().map(|v| v.kind).collect();
        assert_eq!(kinds, vec![ViolationKind::NegativeWeight, ViolationKind::WeightOutsideRoi]);
    }

    #[test]
    fn cell_center_examples() {
        let grid = GridSpec { origin_xy: [0.0, 0.0], cell_size: 2.0, nx: 4, ny: 3 };
        assert_eq!(cell_center(&grid, 0).unwrap(), [1.0, 1.0, 0.0]);
        assert_eq!(cell_center(&grid, 5).unwrap(), [3.0, 3.0, 0.0]);
        assert!(matches!(cell_center(&grid, 12), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn cell_index_round_trip() {
        let grid = GridSpec { origin_xy: [-3.0, 7.5], cell_size: 0.5, nx: 7, ny: 5 };
        for j in 0..grid.num_cells() {
            let (r, c) = grid.row_col(j).unwrap();
            assert_eq!(grid.index(r, c), Some(j));
            let p = grid.cell_center(j).unwrap();
            assert_eq!(grid.cell_at(p[0], p[1]), Some(j));
        }
    }

    #[test]
    fn validation_is_idempotent() {
        let mut s = tiny_scene();
        s.roi.cells.insert(99);
        assert_eq!(validate_scene(&s), validate_scene(&s));
    }

    #[test]
    fn roi_column_order() {
        let roi = RegionOfInterest::new([9, 2, 5]).with_weight(5, 3.0);
        assert_eq!(roi.column_of(2), Some(0));
        assert_eq!(roi.column_of(9), Some(2));
        assert_eq!(roi.column_of(3), None);
        assert_eq!(roi.weight_vector(), vec![1.0, 3.0, 1.0]);
    }
}
