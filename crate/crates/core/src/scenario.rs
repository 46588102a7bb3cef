//! Seeded synthetic traffic with visibility-driven simulated detections.
//!
//! Agents spawn at grid edges and move in straight lines along a row or
//! column. Each frame, every agent standing in an ROI cell yields a
//! ground-truth box. Each modality then detects it with probability equal to
//! the summed visibility of the selected sensors of that modality at the
//! cell, capped at 1.
//!
//! Ground truth and detections draw from separate ChaCha streams, so two
//! sensor selections simulated with the same seed see the same traffic, and
//! each agent consumes the same number of draws whether or not it is
//! detected.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::detection::{normalize_yaw, DetectionBox, ObjectClass, Source};
use crate::io::frame_file::Frame;
use crate::placement::Selection;
use crate::scene::{ensure_valid, Modality, Scene};
use crate::visibility::VisibilityMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSpec {
    /// Per-axis centre noise σ (m).
    pub position_sigma: f64,
    /// Per-dimension size noise σ (m).
    pub size_sigma: f64,
    pub yaw_sigma: f64,
    /// Velocity noise σ (m/s); only radar boxes carry velocity.
    pub velocity_sigma: f64,
}

impl NoiseSpec {
    fn validate(&self, name: &str) -> Result<()> {
        let all = [self.position_sigma, self.size_sigma, self.yaw_sigma, self.velocity_sigma];
        if all.iter().all(|s| *s >= 0.0 && s.is_finite()) {
            Ok(())
        } else {
            Err(Error::Invalid(format!("{name} noise sigmas must be finite and >= 0")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub duration_frames: usize,
    /// Seconds per frame.
    pub frame_dt: f64,
    /// Mean spawns per frame for each class (Poisson).
    pub class_mix: BTreeMap<ObjectClass, f64>,
    /// `[min, max]` speed in m/s per class. Missing classes use `[1, 1]`.
    pub speed_ranges: BTreeMap<ObjectClass, [f64; 2]>,
    pub lidar_noise: NoiseSpec,
    pub radar_noise: NoiseSpec,
    /// Scores are `(0.5 + 0.5·p)·(1 − score_jitter·u)` with `u ~ U[0, 1)`.
    pub score_jitter: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let class_mix = [
            (ObjectClass::Car, 0.3),
            (ObjectClass::Truck, 0.05),
            (ObjectClass::Motorcycle, 0.05),
            (ObjectClass::Bus, 0.03),
            (ObjectClass::Pedestrian, 0.3),
            (ObjectClass::GolfCart, 0.03),
        ]
        .into_iter()
        .collect();
        let speed_ranges = [
            (ObjectClass::Car, [6.0, 12.0]),
            (ObjectClass::Truck, [5.0, 10.0]),
            (ObjectClass::Motorcycle, [6.0, 14.0]),
            (ObjectClass::Bus, [5.0, 9.0]),
            (ObjectClass::Pedestrian, [0.8, 1.8]),
            (ObjectClass::GolfCart, [3.0, 6.0]),
        ]
        .into_iter()
        .collect();
        ScenarioConfig {
            seed: 0,
            duration_frames: 100,
            frame_dt: 0.1,
            class_mix,
            speed_ranges,
            lidar_noise: NoiseSpec { position_sigma: 0.15, size_sigma: 0.1, yaw_sigma: 0.05, velocity_sigma: 0.0 },
            radar_noise: NoiseSpec { position_sigma: 0.4, size_sigma: 0.3, yaw_sigma: 0.15, velocity_sigma: 0.2 },
            score_jitter: 0.3,
        }
    }
}

impl ScenarioConfig {
    /// Same traffic, no detector noise and no score jitter.
    pub fn noiseless(mut self) -> Self {
        self.lidar_noise = NoiseSpec::default();
        self.radar_noise = NoiseSpec::default();
        self.score_jitter = 0.0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.frame_dt > 0.0 && self.frame_dt.is_finite()) {
            return Err(Error::Invalid(format!("frame_dt {} must be > 0", self.frame_dt)));
        }
        if let Some((c, r)) = self.class_mix.iter().find(|(_, r)| !(**r >= 0.0 && r.is_finite())) {
            return Err(Error::Invalid(format!("spawn rate {r} for {c} must be >= 0")));
        }
        if let Some((c, s)) = self
            .speed_ranges
            .iter()
            .find(|(_, s)| !(s[0] >= 0.0 && s[1] >= s[0] && s[1].is_finite()))
        {
            return Err(Error::Invalid(format!("speed range {s:?} for {c} must satisfy 0 <= min <= max")));
        }
        if !(0.0..=1.0).contains(&self.score_jitter) {
            return Err(Error::Invalid(format!("score_jitter {} outside [0, 1]", self.score_jitter)));
        }
        self.lidar_noise.validate("lidar")?;
        self.radar_noise.validate("radar")
    }
}

/// Nominal `(length, width, height)` per class in metres.
pub fn class_dimensions(class: ObjectClass) -> [f64; 3] {
    match class {
        ObjectClass::Car => [4.5, 1.8, 1.5],
        ObjectClass::Truck => [8.0, 2.5, 3.2],
        ObjectClass::Motorcycle => [2.2, 0.8, 1.4],
        ObjectClass::Bus => [12.0, 2.6, 3.2],
        ObjectClass::Pedestrian => [0.6, 0.6, 1.7],
        ObjectClass::GolfCart => [2.4, 1.2, 1.8],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutput {
    pub ground_truth: Vec<Frame>,
    pub lidar: Vec<Frame>,
    pub radar: Vec<Frame>,
}

struct Agent {
    class: ObjectClass,
    position: [f64; 2],
    velocity: [f64; 2],
}

pub fn frame_id(k: usize) -> String {
    format!("{k:06}")
}

fn check_inputs(scene: &Scene, vl: &VisibilityMatrix, vr: &VisibilityMatrix, sel: &Selection) -> Result<()> {
    ensure_valid(scene)?;
    for (m, modality, picked) in [(vl, Modality::Lidar, &sel.lidar), (vr, Modality::Radar, &sel.radar)] {
        let n = scene.candidates(modality).len();
        if m.modality != modality || m.rows() != n || m.cols() != scene.roi.len() {
            return Err(Error::Invalid(format!(
                "{modality} matrix is {}x{} ({}), scene needs {n}x{}",
                m.rows(),
                m.cols(),
                m.modality,
                scene.roi.len()
            )));
        }
        if let Some(&i) = picked.iter().find(|&&i| i >= n) {
            let what = if modality == Modality::Lidar { "lidar candidate" } else { "radar candidate" };
            return Err(Error::IndexOutOfRange { what, index: i, len: n });
        }
    }
    Ok(())
}

/// Per-column detection probability of one modality, `min(1, Σ_selected V)`.
/// Values within `epsilon` of 1 count as certain detection.
fn detection_probability(m: &VisibilityMatrix, rows: &[usize]) -> Vec<f64> {
    (0..m.cols())
        .map(|j| {
            let p: f64 = rows.iter().map(|&i| m.get(i, j)).sum();
            if p >= 1.0 - m.epsilon {
                1.0
            } else {
                p
            }
        })
        .collect()
}

fn normal(sigma: f64) -> Normal<f64> {
    Normal::new(0.0, sigma).expect("sigma validated")
}

struct Detector<'a> {
    noise: &'a NoiseSpec,
    source: Source,
    jitter: f64,
}

impl Detector<'_> {
    /// Draws a fixed number of variates regardless of the outcome.
    fn observe(&self, rng: &mut ChaCha8Rng, gt: &DetectionBox, p: f64) -> Option<DetectionBox> {
        let hit = rng.random::<f64>() < p;
        let u: f64 = rng.random();
        let pos = normal(self.noise.position_sigma);
        let size = normal(self.noise.size_sigma);
        let yaw = normal(self.noise.yaw_sigma);
        let vel = normal(self.noise.velocity_sigma);
        let dc: [f64; 3] = std::array::from_fn(|_| pos.sample(rng));
        let ds: [f64; 3] = std::array::from_fn(|_| size.sample(rng));
        let dyaw = yaw.sample(rng);
        let dv: [f64; 2] = std::array::from_fn(|_| vel.sample(rng));
        if !hit {
            return None;
        }
        let score = ((0.5 + 0.5 * p) * (1.0 - self.jitter * u)).clamp(0.0, 1.0);
        let mut b = DetectionBox::new(
            std::array::from_fn(|k| gt.center[k] + dc[k]),
            std::array::from_fn(|k| (gt.size[k] + ds[k]).max(0.1)),
            gt.yaw + dyaw,
            gt.class,
            score,
            self.source,
        );
        if self.source == Source::Radar {
            let v = gt.velocity.unwrap_or([0.0, 0.0]);
            b.velocity = Some([v[0] + dv[0], v[1] + dv[1]]);
        }
        Some(b)
    }
}

fn spawn(rng: &mut ChaCha8Rng, scene: &Scene, class: ObjectClass, speeds: [f64; 2]) -> Agent {
    let g = &scene.grid;
    let (w, h) = (g.nx as f64 * g.cell_size, g.ny as f64 * g.cell_size);
    let heading = rng.random_range(0..4u8);
    let lane_x = g.origin_xy[0] + (rng.random_range(0..g.nx) as f64 + 0.5) * g.cell_size;
    let lane_y = g.origin_xy[1] + (rng.random_range(0..g.ny) as f64 + 0.5) * g.cell_size;
    let speed = if speeds[1] > speeds[0] { rng.random_range(speeds[0]..speeds[1]) } else { speeds[0] };
    let (x0, y0) = (g.origin_xy[0], g.origin_xy[1]);
    let (position, dir) = match heading {
        0 => ([x0, lane_y], [1.0, 0.0]),
        1 => ([x0 + w, lane_y], [-1.0, 0.0]),
        2 => ([lane_x, y0], [0.0, 1.0]),
        _ => ([lane_x, y0 + h], [0.0, -1.0]),
    };
    Agent { class, position, velocity: [dir[0] * speed, dir[1] * speed] }
}

/// Simulates `cfg.duration_frames` frames of traffic and per-modality
/// detections for the sensors in `sel`.
pub fn generate_scenario(
    scene: &Scene,
    vl: &VisibilityMatrix,
    vr: &VisibilityMatrix,
    sel: &Selection,
    cfg: &ScenarioConfig,
) -> Result<ScenarioOutput> {
    cfg.validate()?;
    check_inputs(scene, vl, vr, sel)?;
    let pl = detection_probability(vl, &sel.lidar);
    let pr = detection_probability(vr, &sel.radar);

    let mut traffic = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut sensing = ChaCha8Rng::seed_from_u64(cfg.seed);
    sensing.set_stream(1);
    let lidar = Detector { noise: &cfg.lidar_noise, source: Source::Lidar, jitter: cfg.score_jitter };
    let radar = Detector { noise: &cfg.radar_noise, source: Source::Radar, jitter: cfg.score_jitter };

    let g = &scene.grid;
    let inside = |p: [f64; 2]| {
        p[0] >= g.origin_xy[0]
            && p[1] >= g.origin_xy[1]
            && p[0] <= g.origin_xy[0] + g.nx as f64 * g.cell_size
            && p[1] <= g.origin_xy[1] + g.ny as f64 * g.cell_size
    };

    let mut agents: Vec<Agent> = Vec::new();
    let mut out = ScenarioOutput { ground_truth: Vec::new(), lidar: Vec::new(), radar: Vec::new() };
    for k in 0..cfg.duration_frames {
        for (&class, &rate) in &cfg.class_mix {
            if rate <= 0.0 {
                continue;
            }
            let n = Poisson::new(rate).expect("rate validated").sample(&mut traffic) as usize;
            let speeds = cfg.speed_ranges.get(&class).copied().unwrap_or([1.0, 1.0]);
            for _ in 0..n {
                agents.push(spawn(&mut traffic, scene, class, speeds));
            }
        }

        let id = frame_id(k);
        let (mut gt, mut dl, mut dr) = (Vec::new(), Vec::new(), Vec::new());
        for a in &agents {
            let Some(col) = g.cell_at(a.position[0], a.position[1]).and_then(|c| scene.roi.column_of(c)) else {
                continue;
            };
            let dims = class_dimensions(a.class);
            let b = DetectionBox::new(
                [a.position[0], a.position[1], dims[2] / 2.0],
                dims,
                normalize_yaw(a.velocity[1].atan2(a.velocity[0])),
                a.class,
                1.0,
                Source::GroundTruth,
            )
            .with_velocity(a.velocity);
            dl.extend(lidar.observe(&mut sensing, &b, pl[col]));
            dr.extend(radar.observe(&mut sensing, &b, pr[col]));
            gt.push(b);
        }
        out.ground_truth.push(Frame::new(id.clone(), gt));
        out.lidar.push(Frame::new(id.clone(), dl));
        out.radar.push(Frame::new(id, dr));

        for a in &mut agents {
            a.position[0] += a.velocity[0] * cfg.frame_dt;
            a.position[1] += a.velocity[1] * cfg.frame_dt;
        }
        agents.retain(|a| inside(a.position));
    }
    for frames in [&mut out.ground_truth, &mut out.lidar, &mut out.radar] {
        crate::io::frame_file::canonicalize(frames);
    }
    Ok(out)
}
