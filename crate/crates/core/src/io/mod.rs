//! Text file formats.
//!
//! Every file starts with a `<magic> <version>` line. Scenes are TOML,
//! matrices and detections are line-oriented text, reports are JSON.

pub mod frame_file;
pub mod matrix_file;
pub mod report;
pub mod scene_file;

use std::path::Path;

use crate::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Checks a `<magic> <version>` header line.
pub(crate) fn check_magic(kind: &'static str, magic: &str, line: Option<&str>) -> Result<()> {
    let line = line.ok_or_else(|| Error::parse(kind, Some(1), "empty file"))?;
    let mut parts = line.split_whitespace();
    if parts.next() != Some(magic) {
        return Err(Error::parse(kind, Some(1), format!("expected `{magic} {FORMAT_VERSION}` header")));
    }
    let version = parts.next().unwrap_or("");
    if parts.next().is_some() {
        return Err(Error::parse(kind, Some(1), "trailing text after version"));
    }
    if version != FORMAT_VERSION.to_string() {
        return Err(Error::Version { kind, found: version.to_string(), expected: FORMAT_VERSION });
    }
    Ok(())
}

/// `-` stands for an absent optional token.
pub(crate) fn opt_token(v: Option<&str>) -> &str {
    v.unwrap_or("-")
}

pub(crate) fn parse_opt_token(s: &str) -> Option<String> {
    (s != "-").then(|| s.to_string())
}

pub(crate) fn parse_f64(kind: &'static str, line: usize, field: &str, s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::parse(kind, Some(line), format!("field `{field}`: `{s}` is not a number")))
}

/// Splits `key value` and checks the key.
pub(crate) fn keyed<'a>(kind: &'static str, line_no: usize, key: &str, line: Option<&'a str>) -> Result<&'a str> {
    let line = line.ok_or_else(|| Error::parse(kind, Some(line_no), format!("truncated file, expected `{key}`")))?;
    match line.split_once(' ') {
        Some((k, v)) if k == key && !v.trim().is_empty() => Ok(v.trim()),
        _ => Err(Error::parse(kind, Some(line_no), format!("expected `{key} <value>`, found `{line}`"))),
    }
}
