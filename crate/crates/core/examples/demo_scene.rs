//! Writes the synthetic intersection scene to the path given as the first
//! argument (default `data/intersection.scene`).

use std::path::PathBuf;

use roadside_core::demo::{intersection_scene, DemoOptions};
use roadside_core::io::scene_file::save_scene;

fn main() -> roadside_core::Result<()> {
    let path = std::env::args().nth(1).map_or_else(|| PathBuf::from("data/intersection.scene"), PathBuf::from);
    let scene = intersection_scene(&DemoOptions::default());
    save_scene(&path, &scene)?;
    println!("{} ({} ROI cells, {} lidar and {} radar candidates)", path.display(), scene.roi.len(), scene.lidar_candidates.len(), scene.radar_candidates.len());
    Ok(())
}
