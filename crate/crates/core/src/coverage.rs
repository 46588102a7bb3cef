//! Central coverage and cost comparison of sensor configurations.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::placement::{PlacementProblem, Selection};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub config_name: String,
    /// `covered_cells / total_roi_cells`.
    pub central_coverage: f64,
    pub covered_cells: usize,
    pub total_roi_cells: usize,
    /// Cells covered by at least one selected lidar / radar.
    pub lidar_covered_cells: usize,
    pub radar_covered_cells: usize,
    pub total_cost: f64,
    pub per_modality_cost: BTreeMap<String, f64>,
    pub theta: f64,
}

impl CoverageReport {
    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.config_name = name.into();
        self
    }
}

/// Per-cell coverage flags `(either, lidar, radar)` for a selection.
pub fn coverage_flags(problem: &PlacementProblem, sel: &Selection, theta: f64) -> Result<Vec<(bool, bool, bool)>> {
    if !(0.0..1.0).contains(&theta) {
        return Err(Error::Invalid(format!("coverage threshold {theta} outside [0, 1)")));
    }
    if let Some(&i) = sel.lidar.iter().find(|&&i| i >= problem.n_lidar()) {
        return Err(Error::IndexOutOfRange { what: "lidar candidate", index: i, len: problem.n_lidar() });
    }
    if let Some(&i) = sel.radar.iter().find(|&&i| i >= problem.n_radar()) {
        return Err(Error::IndexOutOfRange { what: "radar candidate", index: i, len: problem.n_radar() });
    }
    Ok((0..problem.n_cells())
        .map(|j| {
            let l = sel.lidar.iter().any(|&i| problem.vl.get(i, j) > theta);
            let r = sel.radar.iter().any(|&i| problem.vr.get(i, j) > theta);
            (l || r, l, r)
        })
        .collect())
}

/// A cell is covered when some selected sensor of either modality sees it
/// with visibility above `theta`.
pub fn central_coverage(problem: &PlacementProblem, sel: &Selection, theta: f64) -> Result<CoverageReport> {
    let flags = coverage_flags(problem, sel, theta)?;
    let covered = flags.iter().filter(|f| f.0).count();
    let total = problem.n_cells();
    let lidar_cost: f64 = sel.lidar.iter().map(|&i| problem.lidar_costs[i]).sum();
    let radar_cost: f64 = sel.radar.iter().map(|&i| problem.radar_costs[i]).sum();
    let mut per_modality_cost = BTreeMap::new();
    per_modality_cost.insert("lidar".to_string(), lidar_cost);
    per_modality_cost.insert("radar".to_string(), radar_cost);
    Ok(CoverageReport {
        config_name: String::new(),
        central_coverage: if total == 0 { 0.0 } else { covered as f64 / total as f64 },
        covered_cells: covered,
        total_roi_cells: total,
        lidar_covered_cells: flags.iter().filter(|f| f.1).count(),
        radar_covered_cells: flags.iter().filter(|f| f.2).count(),
        total_cost: lidar_cost + radar_cost,
        per_modality_cost,
        theta,
    })
}

/// Pairwise comparison of configuration `a` against `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigDelta {
    pub from: String,
    pub to: String,
    /// `b - a`, in percentage points.
    pub coverage_delta_pp: f64,
    /// `(cost_a - cost_b) / cost_a` in percent; `None` when `cost_a` is 0.
    pub cost_reduction_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigComparison {
    pub reports: Vec<CoverageReport>,
    pub deltas: Vec<ConfigDelta>,
}

pub const UNDEFINED: &str = "undefined";

pub fn cost_reduction_pct(cost_a: f64, cost_b: f64) -> Option<f64> {
    (cost_a != 0.0).then(|| (cost_a - cost_b) / cost_a * 100.0)
}

/// Deltas for every ordered pair `(a, b)` with `a` listed before `b`.
pub fn compare_configs(reports: &[CoverageReport]) -> Result<ConfigComparison> {
    if reports.len() < 2 {
        return Err(Error::Invalid("comparison needs at least two reports".into()));
    }
    let mut deltas = Vec::new();
    for (ia, a) in reports.iter().enumerate() {
        for b in &reports[ia + 1..] {
            deltas.push(ConfigDelta {
                from: a.config_name.clone(),
                to: b.config_name.clone(),
                coverage_delta_pp: (b.central_coverage - a.central_coverage) * 100.0,
                cost_reduction_pct: cost_reduction_pct(a.total_cost, b.total_cost),
            });
        }
    }
    Ok(ConfigComparison {
        reports: reports.to_vec(),
        deltas,
    })
}

pub fn fmt_pct(v: Option<f64>) -> String {
    v.map_or_else(|| UNDEFINED.to_string(), |x| format!("{x:.1}%"))
}

impl ConfigComparison {
    /// Aligned plain-text table.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let w = self
            .reports
            .iter()
            .map(|r| r.config_name.len())
            .chain(std::iter::once(6))
            .max()
            .unwrap_or(6);
        let _ = writeln!(s, "{:<w$}  {:>9}  {:>7}  {:>5}  {:>12}", "config", "coverage", "covered", "cells", "cost");
        for r in &self.reports {
            let _ = writeln!(
                s,
                "{:<w$}  {:>8.1}%  {:>7}  {:>5}  {:>12.2}",
                r.config_name,
                r.central_coverage * 100.0,
                r.covered_cells,
                r.total_roi_cells,
                r.total_cost
            );
        }
        s.push('\n');
        let _ = writeln!(s, "{:<w$}  {:<w$}  {:>12}  {:>14}", "from", "to", "coverage Δpp", "cost reduction");
        for d in &self.deltas {
            let _ = writeln!(
                s,
                "{:<w$}  {:<w$}  {:>+12.1}  {:>14}",
                d.from,
                d.to,
                d.coverage_delta_pp,
                fmt_pct(d.cost_reduction_pct)
            );
        }
        s
    }
}
