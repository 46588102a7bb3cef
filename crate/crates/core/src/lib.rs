//! Roadside multimodal sensing toolkit.
//!
//! Plans budget-constrained LiDAR and 4D-radar placements from ray-cast
//! visibility matrices, then evaluates the resulting sensing configurations
//! with geometric late fusion of detection boxes and per-class average
//! precision.
//!
//! The pipeline, end to end:
//!
//! 1. [`scene`] describes the grid, region of interest, occluders and
//!    candidate mounts.
//! 2. [`visibility`] ray-casts every candidate against every ROI cell.
//! 3. [`placement`] selects LiDAR/radar candidates under a sensor budget.
//! 4. [`coverage`] reports central coverage and cost.
//! 5. [`scenario`] simulates detections driven by the chosen visibility,
//!    [`fusion`] merges the per-modality sets and [`metrics`] scores them.

pub mod coverage;
pub mod demo;
pub mod detection;
mod error;
pub mod fusion;
pub mod hash;
pub mod io;
pub mod iou;
pub mod metrics;
pub mod pipeline;
pub mod placement;
pub mod scenario;
pub mod scene;
pub mod visibility;

pub use error::{Error, Result};
