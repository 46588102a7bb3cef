//! Rotated 3D IoU via convex polygon clipping in bird's-eye view.

use crate::detection::DetectionBox;

pub type Point2 = [f64; 2];

/// Footprint corners, counter-clockwise.
pub fn bev_corners(b: &DetectionBox) -> [Point2; 4] {
    let (s, c) = b.yaw.sin_cos();
    let (hl, hw) = (b.size[0] / 2.0, b.size[1] / 2.0);
    let local = [[hl, hw], [-hl, hw], [-hl, -hw], [hl, -hw]];
    local.map(|[x, y]| [b.center[0] + c * x - s * y, b.center[1] + s * x + c * y])
}

fn cross(o: Point2, a: Point2, b: Point2) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Shoelace area, positive for counter-clockwise polygons.
pub fn polygon_area(poly: &[Point2]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut a = 0.0;
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        a += p[0] * q[1] - q[0] * p[1];
    }
    a / 2.0
}

/// Sutherland–Hodgman: clips `subject` against the convex CCW polygon `clip`.
pub fn clip_convex(subject: &[Point2], clip: &[Point2]) -> Vec<Point2> {
    let mut output = subject.to_vec();
    for i in 0..clip.len() {
        if output.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % clip.len()];
        let input = std::mem::take(&mut output);
        for k in 0..input.len() {
            let p = input[k];
            let q = input[(k + 1) % input.len()];
            let dp = cross(a, b, p);
            let dq = cross(a, b, q);
            if dp >= 0.0 {
                output.push(p);
            }
            if (dp >= 0.0) != (dq >= 0.0) {
                let t = dp / (dp - dq);
                output.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
            }
        }
    }
    output
}

/// BEV intersection area of two box footprints.
pub fn bev_intersection(a: &DetectionBox, b: &DetectionBox) -> f64 {
    let pa = bev_corners(a);
    let pb = bev_corners(b);
    polygon_area(&clip_convex(&pa, &pb)).max(0.0)
}

fn vertical_overlap(a: &DetectionBox, b: &DetectionBox) -> f64 {
    let top = (a.center[2] + a.size[2] / 2.0).min(b.center[2] + b.size[2] / 2.0);
    let bottom = (a.center[2] - a.size[2] / 2.0).max(b.center[2] - b.size[2] / 2.0);
    (top - bottom).max(0.0)
}

/// Intersection over union of two oriented boxes, in `[0, 1]`.
pub fn iou_3d(a: &DetectionBox, b: &DetectionBox) -> f64 {
    if a.center == b.center && a.size == b.size && a.yaw == b.yaw {
        return 1.0;
    }
    // cheap reject on circumscribed circles
    let ra = a.size[0].hypot(a.size[1]) / 2.0;
    let rb = b.size[0].hypot(b.size[1]) / 2.0;
    if a.bev_distance(b) > ra + rb {
        return 0.0;
    }
    let dz = vertical_overlap(a, b);
    if dz <= 0.0 {
        return 0.0;
    }
    let inter = bev_intersection(a, b) * dz;
    let union = a.volume() + b.volume() - inter;
    if inter <= 0.0 || union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}
