//! Late fusion of per-modality detection sets by 3D IoU matching.

use serde::{Deserialize, Serialize};

use crate::detection::{normalize_yaw, sort_canonical, DetectionBox, Source};
use crate::iou::iou_3d;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionConfig {
    /// Minimum IoU for a lidar/radar pair to be merged, in `(0, 1]`.
    pub iou_threshold: f64,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig { iou_threshold: 0.3 }
    }
}

impl FusionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iou_threshold > 0.0 && self.iou_threshold <= 1.0 {
            Ok(())
        } else {
            Err(Error::Invalid(format!("iou_threshold {} outside (0, 1]", self.iou_threshold)))
        }
    }
}

/// A matched lidar/radar pair, by index into the input sets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Match {
    pub lidar: usize,
    pub radar: usize,
    pub iou: f64,
}

/// Greedy descending-IoU matching of same-class cross-modality pairs.
/// Each box is matched at most once; ties go to the lower lidar, then radar index.
pub fn match_pairs(dl: &[DetectionBox], dr: &[DetectionBox], threshold: f64) -> Vec<Match> {
    let mut pairs = Vec::new();
    for (i, a) in dl.iter().enumerate() {
        for (k, b) in dr.iter().enumerate() {
            if a.class != b.class {
                continue;
            }
            let iou = iou_3d(a, b);
            if iou >= threshold {
                pairs.push(Match { lidar: i, radar: k, iou });
            }
        }
    }
    pairs.sort_by(|x, y| {
        y.iou
            .total_cmp(&x.iou)
            .then(x.lidar.cmp(&y.lidar))
            .then(x.radar.cmp(&y.radar))
    });
    let mut used_l = vec![false; dl.len()];
    let mut used_r = vec![false; dr.len()];
    pairs
        .into_iter()
        .filter(|m| {
            if used_l[m.lidar] || used_r[m.radar] {
                return false;
            }
            used_l[m.lidar] = true;
            used_r[m.radar] = true;
            true
        })
        .collect()
}

/// Score-weighted merge of a matched pair.
pub fn merge_pair(l: &DetectionBox, r: &DetectionBox) -> DetectionBox {
    let total = l.score + r.score;
    let (wl, wr) = if total > 0.0 { (l.score / total, r.score / total) } else { (0.5, 0.5) };
    let avg = |a: [f64; 3], b: [f64; 3]| -> [f64; 3] { std::array::from_fn(|k| wl * a[k] + wr * b[k]) };
    let sin = wl * l.yaw.sin() + wr * r.yaw.sin();
    let cos = wl * l.yaw.cos() + wr * r.yaw.cos();
    let yaw = if sin == 0.0 && cos == 0.0 { l.yaw } else { normalize_yaw(sin.atan2(cos)) };
    DetectionBox {
        center: avg(l.center, r.center),
        size: avg(l.size, r.size),
        yaw,
        class: l.class,
        score: l.score.max(r.score),
        velocity: r.velocity.or(l.velocity),
        source: Source::Fused,
    }
}

/// Fuses lidar detections `dl` with radar detections `dr`.
///
/// Matched pairs become one `fused` box; unmatched boxes pass through
/// unchanged. Output is in canonical order (descending score, then centre).
pub fn fuse_late(dl: &[DetectionBox], dr: &[DetectionBox], cfg: &FusionConfig) -> Result<Vec<DetectionBox>> {
    cfg.validate()?;
    for b in dl.iter().chain(dr) {
        b.validate()?;
    }
    let matches = match_pairs(dl, dr, cfg.iou_threshold);
    let mut used_l = vec![false; dl.len()];
    let mut used_r = vec![false; dr.len()];
    let mut out = Vec::with_capacity(dl.len() + dr.len() - matches.len());
    for m in &matches {
        used_l[m.lidar] = true;
        used_r[m.radar] = true;
        out.push(merge_pair(&dl[m.lidar], &dr[m.radar]));
    }
    out.extend(dl.iter().zip(&used_l).filter(|(_, u)| !**u).map(|(b, _)| b.clone()));
    out.extend(dr.iter().zip(&used_r).filter(|(_, u)| !**u).map(|(b, _)| b.clone()));
    sort_canonical(&mut out);
    Ok(out)
}
