//! Detection frame files.
//!
//! ```text
//! roadside-frames 1
//! run <run id or ->
//! frame 000000 2
//! lidar car 1.5 -3.25 0.75 4.5 1.8 1.5 0 0.93 - -
//! radar pedestrian 0.5 2 0.85 0.6 0.6 1.7 1.5707963267948966 0.8 0 1.2
//! frame 000001 0
//! end
//! ```
//!
//! Box lines are `source class x y z length width height yaw score vx vy`,
//! with `-` for an absent velocity. Numbers use the shortest decimal form
//! that re-parses to the same `f64`. Frames are written sorted by id and
//! boxes in canonical order (descending score, then centre).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;
use std::path::Path;

use super::{check_magic, keyed, opt_token, parse_f64, parse_opt_token, read_text, write_text};
use crate::detection::{sort_canonical, DetectionBox};
use crate::metrics::FramePair;
use crate::{Error, Result};

pub const MAGIC: &str = "roadside-frames";
const KIND: &str = "frames";

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub id: String,
    pub boxes: Vec<DetectionBox>,
}

impl Frame {
    pub fn new(id: impl Into<String>, boxes: Vec<DetectionBox>) -> Self {
        Frame { id: id.into(), boxes }
    }
}

/// Sorts frames by id and boxes canonically.
pub fn canonicalize(frames: &mut [Frame]) {
    frames.sort_by(|a, b| a.id.cmp(&b.id));
    for f in frames {
        sort_canonical(&mut f.boxes);
    }
}

fn box_line(b: &DetectionBox) -> String {
    let (vx, vy) = match b.velocity {
        Some([x, y]) => (x.to_string(), y.to_string()),
        None => ("-".to_string(), "-".to_string()),
    };
    format!(
        "{} {} {} {} {} {} {} {} {} {} {vx} {vy}",
        b.source.as_str(),
        b.class.as_str(),
        b.center[0],
        b.center[1],
        b.center[2],
        b.size[0],
        b.size[1],
        b.size[2],
        b.yaw,
        b.score
    )
}

pub fn write_frames(frames: &[Frame], run: Option<&str>) -> String {
    let mut frames = frames.to_vec();
    canonicalize(&mut frames);
    let mut s = String::new();
    let _ = writeln!(s, "{MAGIC} 1");
    let _ = writeln!(s, "run {}", opt_token(run));
    for f in &frames {
        let _ = writeln!(s, "frame {} {}", f.id, f.boxes.len());
        for b in &f.boxes {
            s.push_str(&box_line(b));
            s.push('\n');
        }
    }
    s.push_str("end\n");
    s
}

fn parse_box(line_no: usize, line: &str) -> Result<DetectionBox> {
    let t: Vec<&str> = line.split_whitespace().collect();
    if t.len() != 12 {
        return Err(Error::parse(KIND, Some(line_no), format!("box line has {} fields, expected 12", t.len())));
    }
    let bad = |e: Error| Error::parse(KIND, Some(line_no), e.to_string());
    let num = |i: usize, field: &str| parse_f64(KIND, line_no, field, t[i]);
    let velocity = match (t[10], t[11]) {
        ("-", "-") => None,
        _ => Some([num(10, "vx")?, num(11, "vy")?]),
    };
    let b = DetectionBox {
        source: t[0].parse().map_err(bad)?,
        class: t[1].parse().map_err(bad)?,
        center: [num(2, "x")?, num(3, "y")?, num(4, "z")?],
        size: [num(5, "length")?, num(6, "width")?, num(7, "height")?],
        yaw: num(8, "yaw")?,
        score: num(9, "score")?,
        velocity,
    };
    b.validate().map_err(bad)?;
    Ok(b)
}

/// Parses a frame file, returning frames in file order and the run id.
pub fn parse_frames(text: &str) -> Result<(Vec<Frame>, Option<String>)> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    check_magic(KIND, MAGIC, lines.next().map(|(_, l)| l))?;
    let run = parse_opt_token(keyed(KIND, 2, "run", lines.next().map(|(_, l)| l))?);
    let mut frames = Vec::new();
    let mut seen = BTreeSet::new();
    loop {
        let Some((line_no, line)) = lines.next() else {
            return Err(Error::parse(KIND, None, "truncated file, missing `end`"));
        };
        if line == "end" {
            break;
        }
        let header: Vec<&str> = line.split_whitespace().collect();
        let (id, n) = match header.as_slice() {
            ["frame", id, n] => (
                id.to_string(),
                n.parse::<usize>()
                    .map_err(|_| Error::parse(KIND, Some(line_no), format!("box count `{n}` is not a count")))?,
            ),
            _ => return Err(Error::parse(KIND, Some(line_no), format!("expected `frame <id> <count>`, found `{line}`"))),
        };
        if !seen.insert(id.clone()) {
            return Err(Error::parse(KIND, Some(line_no), format!("duplicate frame id `{id}`")));
        }
        let mut boxes = Vec::with_capacity(n.min(1 << 16));
        for _ in 0..n {
            let (line_no, line) = lines
                .next()
                .ok_or_else(|| Error::parse(KIND, None, format!("truncated file inside frame `{id}`")))?;
            boxes.push(parse_box(line_no, line)?);
        }
        frames.push(Frame { id, boxes });
    }
    if let Some((line_no, extra)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(Error::parse(KIND, Some(line_no), format!("trailing content after `end`: `{extra}`")));
    }
    Ok((frames, run))
}

pub fn save_frames(path: &Path, frames: &[Frame], run: Option<&str>) -> Result<()> {
    write_text(path, &write_frames(frames, run))
}

pub fn load_frames(path: &Path) -> Result<(Vec<Frame>, Option<String>)> {
    parse_frames(&read_text(path)?)
}

/// Joins predictions and ground truth by frame id. A frame present on one
/// side only gets an empty set on the other.
pub fn pair_frames(predictions: &[Frame], ground_truth: &[Frame]) -> Vec<FramePair> {
    fn slot<'a, 'm>(m: &'m mut BTreeMap<&'a str, FramePair>, id: &'a str) -> &'m mut FramePair {
        m.entry(id).or_insert_with(|| FramePair {
            frame_id: id.to_string(),
            predictions: Vec::new(),
            ground_truth: Vec::new(),
        })
    }
    let mut by_id = BTreeMap::new();
    for f in predictions {
        slot(&mut by_id, &f.id).predictions.extend(f.boxes.iter().cloned());
    }
    for f in ground_truth {
        slot(&mut by_id, &f.id).ground_truth.extend(f.boxes.iter().cloned());
    }
    by_id.into_values().collect()
}
