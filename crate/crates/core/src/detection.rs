//! Oriented 3D detection boxes.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectClass {
    Car,
    Truck,
    Motorcycle,
    Bus,
    Pedestrian,
    GolfCart,
}

impl ObjectClass {
    pub const ALL: [ObjectClass; 6] = [
        ObjectClass::Car,
        ObjectClass::Truck,
        ObjectClass::Motorcycle,
        ObjectClass::Bus,
        ObjectClass::Pedestrian,
        ObjectClass::GolfCart,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ObjectClass::Car => "car",
            ObjectClass::Truck => "truck",
            ObjectClass::Motorcycle => "motorcycle",
            ObjectClass::Bus => "bus",
            ObjectClass::Pedestrian => "pedestrian",
            ObjectClass::GolfCart => "golf_cart",
        }
    }
}

impl fmt::Display for ObjectClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ObjectClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ObjectClass::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown class `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Lidar,
    Radar,
    Fused,
    GroundTruth,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Lidar => "lidar",
            Source::Radar => "radar",
            Source::Fused => "fused",
            Source::GroundTruth => "ground_truth",
        }
    }
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lidar" => Ok(Source::Lidar),
            "radar" => Ok(Source::Radar),
            "fused" => Ok(Source::Fused),
            "ground_truth" => Ok(Source::GroundTruth),
            other => Err(Error::Invalid(format!("unknown source `{other}`"))),
        }
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn normalize_yaw(yaw: f64) -> f64 {
    let mut a = yaw % (2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    } else if a <= -PI {
        a += 2.0 * PI;
    }
    a
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionBox {
    /// Geometric centre (m).
    pub center: [f64; 3],
    /// `(length, width, height)` in metres; length runs along `yaw`.
    pub size: [f64; 3],
    /// Heading in radians, `(-π, π]`.
    pub yaw: f64,
    pub class: ObjectClass,
    pub score: f64,
    pub velocity: Option<[f64; 2]>,
    pub source: Source,
}

impl DetectionBox {
    pub fn new(center: [f64; 3], size: [f64; 3], yaw: f64, class: ObjectClass, score: f64, source: Source) -> Self {
        DetectionBox {
            center,
            size,
            yaw: normalize_yaw(yaw),
            class,
            score,
            velocity: None,
            source,
        }
    }

    pub fn with_velocity(mut self, v: [f64; 2]) -> Self {
        self.velocity = Some(v);
        self
    }

    pub fn volume(&self) -> f64 {
        self.size[0] * self.size[1] * self.size[2]
    }

    pub fn validate(&self) -> Result<()> {
        if !self.center.iter().all(|v| v.is_finite()) {
            return Err(Error::Invalid("box centre is not finite".into()));
        }
        if !self.size.iter().all(|v| *v > 0.0 && v.is_finite()) {
            return Err(Error::Invalid(format!("box size {:?} must be positive", self.size)));
        }
        if !(self.yaw > -PI && self.yaw <= PI) {
            return Err(Error::Invalid(format!("yaw {} outside (-π, π]", self.yaw)));
        }
        if !(0.0..=1.0).contains(&self.score) {
            return Err(Error::Invalid(format!("score {} outside [0, 1]", self.score)));
        }
        if let Some(v) = self.velocity {
            if !v.iter().all(|x| x.is_finite()) {
                return Err(Error::Invalid("velocity is not finite".into()));
            }
        }
        Ok(())
    }

    pub fn bev_distance(&self, other: &DetectionBox) -> f64 {
        (self.center[0] - other.center[0]).hypot(self.center[1] - other.center[1])
    }
}

/// Descending score, then centre lexicographic, then remaining fields.
pub fn canonical_cmp(a: &DetectionBox, b: &DetectionBox) -> std::cmp::Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.center[0].total_cmp(&b.center[0]))
        .then_with(|| a.center[1].total_cmp(&b.center[1]))
        .then_with(|| a.center[2].total_cmp(&b.center[2]))
        .then_with(|| a.class.cmp(&b.class))
        .then_with(|| a.source.cmp(&b.source))
        .then_with(|| a.yaw.total_cmp(&b.yaw))
        .then_with(|| {
            a.size
                .iter()
                .zip(&b.size)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
}

pub fn sort_canonical(boxes: &mut [DetectionBox]) {
    boxes.sort_by(canonical_cmp);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn yaw_wraps_into_half_open_interval() {
        assert_eq!(normalize_yaw(PI), PI);
        assert!((normalize_yaw(-PI) - PI).abs() < 1e-15);
        assert!((normalize_yaw(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert!((normalize_yaw(-7.0) - (-7.0 + 2.0 * PI)).abs() < 1e-12);
        assert_eq!(normalize_yaw(0.3), 0.3);
    }

    #[test]
    fn class_names_round_trip() {
        for c in ObjectClass::ALL {
            assert_eq!(c.as_str().parse::<ObjectClass>().unwrap(), c);
        }
        assert!("bicycle".parse::<ObjectClass>().is_err());
    }

    #[test]
    fn validation() {
        let b = DetectionBox::new([0.0; 3], [1.0; 3], 0.0, ObjectClass::Car, 0.5, Source::Lidar);
        assert!(b.validate().is_ok());
        assert!(DetectionBox { score: 1.5, ..b.clone() }.validate().is_err());
        assert!(DetectionBox { size: [1.0, 0.0, 1.0], ..b.clone() }.validate().is_err());
        assert!(DetectionBox { yaw: -PI, ..b }.validate().is_err());
    }
}
