//! Per-class average precision and mAP.
//!
//! Predictions are matched to ground truth per frame in descending score
//! order, each ground-truth box at most once. Outcomes from all frames are
//! pooled and sorted by `(score desc, frame_id, box index)`; AP is the
//! 101-point interpolated area under the resulting precision/recall curve.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::detection::{DetectionBox, ObjectClass};
use crate::iou::iou_3d;
use crate::{Error, Result};

pub const RECALL_POINTS: usize = 101;
pub const DEFAULT_CENTER_DISTANCE_M: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct FramePair {
    pub frame_id: String,
    pub predictions: Vec<DetectionBox>,
    pub ground_truth: Vec<DetectionBox>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMode {
    Iou,
    CenterDistance,
}

impl std::str::FromStr for MatchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iou" => Ok(MatchMode::Iou),
            "center" | "center_distance" | "center-distance" => Ok(MatchMode::CenterDistance),
            other => Err(Error::Invalid(format!("unknown matching mode `{other}`"))),
        }
    }
}

/// 0.5 IoU for vehicles, 0.25 for pedestrians and motorcycles, 2 m in
/// centre-distance mode.
pub fn default_threshold(class: ObjectClass, mode: MatchMode) -> f64 {
    match mode {
        MatchMode::CenterDistance => DEFAULT_CENTER_DISTANCE_M,
        MatchMode::Iou => match class {
            ObjectClass::Pedestrian | ObjectClass::Motorcycle => 0.25,
            _ => 0.5,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApResult {
    pub class: ObjectClass,
    /// `None` when the class has no ground truth.
    pub ap: Option<f64>,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub mode: MatchMode,
    pub threshold: f64,
    pub num_gt: usize,
    pub num_predictions: usize,
}

/// Per-frame TP/FP outcome for each prediction of `class`, indexed like
/// the frame's prediction list (`None` for other classes).
pub fn match_frame(frame: &FramePair, class: ObjectClass, mode: MatchMode, threshold: f64) -> Vec<Option<bool>> {
    let gts: Vec<&DetectionBox> = frame.ground_truth.iter().filter(|g| g.class == class).collect();
    let mut order: Vec<usize> = (0..frame.predictions.len())
        .filter(|&i| frame.predictions[i].class == class)
        .collect();
    order.sort_by(|&a, &b| {
        frame.predictions[b]
            .score
            .total_cmp(&frame.predictions[a].score)
            .then(a.cmp(&b))
    });

    let mut taken = vec![false; gts.len()];
    let mut outcome = vec![None; frame.predictions.len()];
    for i in order {
        let p = &frame.predictions[i];
        let mut best: Option<(usize, f64)> = None;
        for (g, gt) in gts.iter().enumerate().filter(|(g, _)| !taken[*g]) {
            let q = match mode {
                MatchMode::Iou => iou_3d(p, gt),
                MatchMode::CenterDistance => -p.bev_distance(gt),
            };
            if best.is_none_or(|(_, bq)| q > bq) {
                best = Some((g, q));
            }
        }
        let tp = match (best, mode) {
            (Some((g, q)), MatchMode::Iou) if q >= threshold => Some(g),
            (Some((g, q)), MatchMode::CenterDistance) if -q <= threshold => Some(g),
            _ => None,
        };
        if let Some(g) = tp {
            taken[g] = true;
        }
        outcome[i] = Some(tp.is_some());
    }
    outcome
}

fn check_frames(frames: &[FramePair]) -> Result<()> {
    if frames.is_empty() {
        return Err(Error::Invalid("evaluation needs at least one frame".into()));
    }
    let mut ids = HashSet::new();
    if let Some(f) = frames.iter().find(|f| !ids.insert(f.frame_id.as_str())) {
        return Err(Error::Invalid(format!("duplicate frame id `{}`", f.frame_id)));
    }
    Ok(())
}

/// 101-point interpolated AP from a pooled, score-sorted TP/FP sequence.
/// Recall points are compared in integers: recall ≥ k/100 ⇔ 100·tp ≥ k·n_gt.
fn interpolated_ap(tp_flags: &[bool], num_gt: usize) -> (f64, Vec<f64>, Vec<f64>) {
    let mut precision = Vec::with_capacity(tp_flags.len());
    let mut recall = Vec::with_capacity(tp_flags.len());
    let mut tp_counts = Vec::with_capacity(tp_flags.len());
    let mut tp = 0usize;
    for (i, &hit) in tp_flags.iter().enumerate() {
        tp += hit as usize;
        tp_counts.push(tp);
        precision.push(tp as f64 / (i + 1) as f64);
        recall.push(tp as f64 / num_gt as f64);
    }
    let mut envelope = precision.clone();
    for i in (0..envelope.len().saturating_sub(1)).rev() {
        envelope[i] = envelope[i].max(envelope[i + 1]);
    }
    let mut sum = 0.0;
    let mut idx = 0;
    for k in 0..RECALL_POINTS {
        while idx < tp_counts.len() && 100 * tp_counts[idx] < k * num_gt {
            idx += 1;
        }
        if idx < envelope.len() {
            sum += envelope[idx];
        }
    }
    (sum / RECALL_POINTS as f64, precision, recall)
}

pub fn evaluate_ap(frames: &[FramePair], class: ObjectClass, mode: MatchMode, threshold: f64) -> Result<ApResult> {
    check_frames(frames)?;
    // (score, frame_id, box index, tp)
    let mut pooled: Vec<(f64, &str, usize, bool)> = Vec::new();
    let mut num_gt = 0;
    for f in frames {
        num_gt += f.ground_truth.iter().filter(|g| g.class == class).count();
        for (i, o) in match_frame(f, class, mode, threshold).into_iter().enumerate() {
            if let Some(tp) = o {
                pooled.push((f.predictions[i].score, f.frame_id.as_str(), i, tp));
            }
        }
    }
    pooled.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(b.1)).then(a.2.cmp(&b.2)));
    let flags: Vec<bool> = pooled.iter().map(|p| p.3).collect();

    let (ap, precision, recall) = if num_gt == 0 {
        (None, Vec::new(), Vec::new())
    } else {
        let (ap, p, r) = interpolated_ap(&flags, num_gt);
        (Some(ap), p, r)
    };
    Ok(ApResult {
        class,
        ap,
        precision,
        recall,
        mode,
        threshold,
        num_gt,
        num_predictions: flags.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapResult {
    pub per_class: BTreeMap<ObjectClass, ApResult>,
    pub map: f64,
    pub mode: MatchMode,
}

/// Per-class AP over all six classes and their mean over defined classes.
/// `threshold = None` applies the per-class defaults.
pub fn evaluate_map(frames: &[FramePair], mode: MatchMode, threshold: Option<f64>) -> Result<MapResult> {
    check_frames(frames)?;
    let mut per_class = BTreeMap::new();
    for class in ObjectClass::ALL {
        let t = threshold.unwrap_or_else(|| default_threshold(class, mode));
        per_class.insert(class, evaluate_ap(frames, class, mode, t)?);
    }
    let defined: Vec<f64> = per_class.values().filter_map(|r| r.ap).collect();
    if defined.is_empty() {
        return Err(Error::NoEvaluableClasses("no evaluable classes".into()));
    }
    Ok(MapResult {
        map: defined.iter().sum::<f64>() / defined.len() as f64,
        per_class,
        mode,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApDelta {
    pub class: ObjectClass,
    pub ap_a: Option<f64>,
    pub ap_b: Option<f64>,
    /// `(b - a) · 100`; `None` unless both are defined.
    pub delta_pp: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapComparison {
    pub name_a: String,
    pub name_b: String,
    pub classes: Vec<ApDelta>,
    pub map_a: f64,
    pub map_b: f64,
    pub map_delta_pp: f64,
}

pub fn compare_maps(name_a: &str, a: &MapResult, name_b: &str, b: &MapResult) -> MapComparison {
    let classes = ObjectClass::ALL
        .into_iter()
        .map(|class| {
            let ap_a = a.per_class.get(&class).and_then(|r| r.ap);
            let ap_b = b.per_class.get(&class).and_then(|r| r.ap);
            let delta_pp = ap_a.zip(ap_b).map(|(x, y)| (y - x) * 100.0);
            ApDelta { class, ap_a, ap_b, delta_pp }
        })
        .collect();
    MapComparison {
        name_a: name_a.to_string(),
        name_b: name_b.to_string(),
        classes,
        map_a: a.map,
        map_b: b.map,
        map_delta_pp: (b.map - a.map) * 100.0,
    }
}

fn fmt_ap(v: Option<f64>) -> String {
    v.map_or_else(|| crate::coverage::UNDEFINED.to_string(), |x| format!("{:.1}", x * 100.0))
}

impl MapResult {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<12} {:>9} {:>6} {:>6} {:>9}", "class", "AP", "gt", "pred", "threshold");
        for r in self.per_class.values() {
            let _ = writeln!(
                s,
                "{:<12} {:>9} {:>6} {:>6} {:>9}",
                r.class.as_str(),
                fmt_ap(r.ap),
                r.num_gt,
                r.num_predictions,
                r.threshold
            );
        }
        let _ = writeln!(s, "{:<12} {:>9.1}", "mAP", self.map * 100.0);
        s
    }
}

impl MapComparison {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let (a, b) = (&self.name_a, &self.name_b);
        let w = a.len().max(b.len()).max(9);
        let _ = writeln!(s, "{:<12} {:>w$} {:>w$} {:>9}", "class", a, b, "Δ AP pp");
        for d in &self.classes {
            let delta = d.delta_pp.map_or_else(|| crate::coverage::UNDEFINED.to_string(), |x| format!("{x:+.1}"));
            let _ = writeln!(s, "{:<12} {:>w$} {:>w$} {:>9}", d.class.as_str(), fmt_ap(d.ap_a), fmt_ap(d.ap_b), delta);
        }
        let _ = writeln!(
            s,
            "{:<12} {:>w$.1} {:>w$.1} {:>+9.1}",
            "mAP",
            self.map_a * 100.0,
            self.map_b * 100.0,
            self.map_delta_pp
        );
        s
    }
}
