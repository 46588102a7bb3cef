//! Structured report records and the coverage grid dump.
//!
//! A report file is a `roadside-report 1` line followed by one JSON object
//! with `kind`, `run` and `data` members.

use std::fmt::Write;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::check_magic;
use crate::scene::Scene;
use crate::{Error, Result};

pub const MAGIC: &str = "roadside-report";
const KIND: &str = "report";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportRecord<T> {
    pub kind: String,
    pub run: Option<String>,
    pub data: T,
}

pub fn write_report<T: Serialize>(kind: &str, run: Option<&str>, data: &T) -> Result<String> {
    let record = ReportRecord { kind: kind.to_string(), run: run.map(str::to_string), data };
    let json = serde_json::to_string_pretty(&record).map_err(|e| Error::Invalid(format!("report: {e}")))?;
    Ok(format!("{MAGIC} 1\n{json}\n"))
}

pub fn parse_report<T: DeserializeOwned>(text: &str, expected_kind: &str) -> Result<ReportRecord<T>> {
    let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
    check_magic(KIND, MAGIC, (!first.is_empty()).then_some(first))?;
    let record: ReportRecord<T> =
        serde_json::from_str(rest).map_err(|e| Error::parse(KIND, Some(e.line() + 1), e.to_string()))?;
    if record.kind != expected_kind {
        return Err(Error::parse(KIND, None, format!("report kind `{}`, expected `{expected_kind}`", record.kind)));
    }
    Ok(record)
}

/// One line per ROI cell: `cell row col x y covered lidar radar`.
pub fn grid_dump(scene: &Scene, flags: &[(bool, bool, bool)]) -> Result<String> {
    if flags.len() != scene.roi.len() {
        return Err(Error::Invalid(format!("{} flags for {} ROI cells", flags.len(), scene.roi.len())));
    }
    let mut s = String::from("cell row col x y covered lidar radar\n");
    for (&cell, &(any, l, r)) in scene.roi.cells.iter().zip(flags) {
        let (row, col) = scene.grid.row_col(cell)?;
        let c = scene.grid.cell_center(cell)?;
        let _ = writeln!(s, "{cell} {row} {col} {} {} {} {} {}", c[0], c[1], any as u8, l as u8, r as u8);
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = write_report("demo", Some("abc"), &vec![1.5, 2.0]).unwrap();
        assert!(text.starts_with("roadside-report 1\n"));
        let r: ReportRecord<Vec<f64>> = parse_report(&text, "demo").unwrap();
        assert_eq!(r.data, vec![1.5, 2.0]);
        assert_eq!(r.run.as_deref(), Some("abc"));
        assert!(parse_report::<Vec<f64>>(&text, "other").is_err());
        assert!(parse_report::<Vec<f64>>(&text.replace("]", ""), "demo").is_err());
    }
}
