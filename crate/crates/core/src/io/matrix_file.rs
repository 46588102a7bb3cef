//! Visibility matrix files.
//!
//! ```text
//! roadside-matrix 1
//! modality lidar
//! rows 2
//! cols 3
//! epsilon 0.000001
//! scene <sha256 or ->
//! run <run id or ->
//! 5.00000000e-1 0.00000000e0 9.99999000e-1
//! ...
//! end
//! ```
//!
//! Entries carry 9 significant digits, the same quantisation applied when
//! matrices are built, so a built matrix survives the round trip bit-exactly.

use std::fmt::Write;
use std::path::Path;

use super::{check_magic, keyed, opt_token, parse_f64, parse_opt_token, read_text, write_text};
use crate::scene::Modality;
use crate::visibility::VisibilityMatrix;
use crate::{Error, Result};

pub const MAGIC: &str = "roadside-matrix";
const KIND: &str = "matrix";

pub fn write_matrix(m: &VisibilityMatrix, run: Option<&str>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{MAGIC} 1");
    let _ = writeln!(s, "modality {}", m.modality);
    let _ = writeln!(s, "rows {}", m.rows());
    let _ = writeln!(s, "cols {}", m.cols());
    let _ = writeln!(s, "epsilon {}", m.epsilon);
    let _ = writeln!(s, "scene {}", opt_token(m.scene_hash.as_deref()));
    let _ = writeln!(s, "run {}", opt_token(run));
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:.8e}")).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s.push_str("end\n");
    s
}

/// Parses a matrix file, returning the matrix and the producing run id.
pub fn parse_matrix(text: &str) -> Result<(VisibilityMatrix, Option<String>)> {
    let mut lines = text.lines();
    check_magic(KIND, MAGIC, lines.next())?;
    let modality: Modality = keyed(KIND, 2, "modality", lines.next())?
        .parse()
        .map_err(|e: Error| Error::parse(KIND, Some(2), e.to_string()))?;
    let count = |line: usize, key: &str, v: Option<&str>| -> Result<usize> {
        let s = keyed(KIND, line, key, v)?;
        s.parse().map_err(|_| Error::parse(KIND, Some(line), format!("`{key}` must be a count, found `{s}`")))
    };
    let rows = count(3, "rows", lines.next())?;
    let cols = count(4, "cols", lines.next())?;
    let epsilon = parse_f64(KIND, 5, "epsilon", keyed(KIND, 5, "epsilon", lines.next())?)?;
    let scene = parse_opt_token(keyed(KIND, 6, "scene", lines.next())?);
    let run = parse_opt_token(keyed(KIND, 7, "run", lines.next())?);

    let mut values = Vec::with_capacity(rows.saturating_mul(cols).min(1 << 24));
    for i in 0..rows {
        let line_no = 8 + i;
        let line = lines
            .next()
            .ok_or_else(|| Error::parse(KIND, Some(line_no), format!("truncated file, expected {rows} rows")))?;
        if line == "end" {
            return Err(Error::parse(KIND, Some(line_no), format!("found {i} rows, header says {rows}")));
        }
        let before = values.len();
        for tok in line.split_whitespace() {
            values.push(parse_f64(KIND, line_no, "entry", tok)?);
        }
        if values.len() - before != cols {
            return Err(Error::parse(
                KIND,
                Some(line_no),
                format!("row has {} entries, header says {cols}", values.len() - before),
            ));
        }
    }
    match lines.next() {
        Some("end") => {}
        Some(_) => return Err(Error::parse(KIND, Some(8 + rows), format!("more than {rows} rows"))),
        None => return Err(Error::parse(KIND, Some(8 + rows), "truncated file, missing `end`")),
    }
    if let Some(extra) = lines.find(|l| !l.trim().is_empty()) {
        return Err(Error::parse(KIND, None, format!("trailing content after `end`: `{extra}`")));
    }
    let mut m = VisibilityMatrix::new(modality, rows, cols, epsilon, values)?;
    m.scene_hash = scene;
    Ok((m, run))
}

pub fn save_matrix(path: &Path, m: &VisibilityMatrix, run: Option<&str>) -> Result<()> {
    write_text(path, &write_matrix(m, run))
}

pub fn load_matrix(path: &Path) -> Result<(VisibilityMatrix, Option<String>)> {
    parse_matrix(&read_text(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::visibility::canonical_value;

    #[test]
    fn one_by_one() {
        let m = VisibilityMatrix::from_rows(Modality::Lidar, 1, &[vec![0.5]]).unwrap();
        let text = write_matrix(&m, Some("abc"));
        let (back, run) = parse_matrix(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(run.as_deref(), Some("abc"));
    }

    #[test]
    fn empty_radar_matrix() {
        let m = VisibilityMatrix::zeros(Modality::Radar, 0, 7).with_scene_hash("ff00");
        let (back, run) = parse_matrix(&write_matrix(&m, None)).unwrap();
        assert_eq!(back, m);
        assert_eq!(run, None);
    }

    #[test]
    fn canonical_entries_are_bit_exact() {
        let raw = [0.1234567891234, 1.0 / 3.0, 0.999999, 1e-12, 0.0, 0.5];
        let rows = vec![raw.iter().map(|&v| canonical_value(v)).collect::<Vec<_>>()];
        let m = VisibilityMatrix::from_rows(Modality::Lidar, raw.len(), &rows).unwrap();
        let (back, _) = parse_matrix(&write_matrix(&m, None)).unwrap();
        for (a, b) in back.values().iter().zip(m.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn header_and_shape_errors() {
        let m = VisibilityMatrix::from_rows(Modality::Lidar, 2, &[vec![0.5, 0.25], vec![0.0, 0.1]]).unwrap();
        let text = write_matrix(&m, None);
        assert!(parse_matrix(&text.replace("rows 2", "rows 3")).is_err());
        assert!(parse_matrix(&text.replace("cols 2", "cols 3")).is_err());
        assert!(parse_matrix(&text.replace("modality lidar", "modality sonar")).is_err());
        assert!(parse_matrix(&text.replace("end\n", "")).is_err());
        assert!(matches!(
            parse_matrix(&text.replace("roadside-matrix 1", "roadside-matrix 7")),
            Err(Error::Version { .. })
        ));
        let err = parse_matrix(&text.replace("2.50000000e-1", "x")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: Some(8), .. }), "{err}");
    }
}
