//! Budgeted multimodal placement.
//!
//! A cell counts as seen only when both modalities reach the log-visibility
//! threshold `tau`:
//!
//! ```text
//! t_j = [ Σ_{i∈L} -ln(1 - Vl[i,j]) ≥ tau ]  ∧  [ Σ_{i∈R} -ln(1 - Vr[i,j]) ≥ tau ]
//! ρ_j = (Σ_{i∈L} Vl[i,j] + Σ_{i∈R} Vr[i,j]) · w_j
//! objective = Σ_j t_j · ρ_j
//! ```
//!
//! subject to `|L| + |R| ≤ budget` and, optionally, a monetary limit on the
//! summed unit costs. Because `ρ_j ≥ 0`, setting `t_j = 1` whenever both
//! constraints hold is optimal for a fixed selection, so the objective of a
//! selection is a plain function of the selection.

mod milp;
mod solve;

use serde::{Deserialize, Serialize};

pub use milp::export_milp;
pub use solve::{solve_branch_bound, solve_exhaustive, solve_greedy, EXHAUSTIVE_MAX_CANDIDATES};

use crate::scene::Modality;
use crate::visibility::{log_visibility, VisibilityMatrix};
use crate::{Error, Result};

/// Slack allowed when comparing a log-visibility sum against `tau`.
pub const FEASIBILITY_TOL: f64 = 1e-9;

pub const DEFAULT_TAU: f64 = 1.0;

#[derive(Debug, Clone)]
pub struct PlacementProblem {
    pub vl: VisibilityMatrix,
    pub vr: VisibilityMatrix,
    ll: Vec<f64>,
    lr: Vec<f64>,
    pub weights: Vec<f64>,
    /// Maximum total sensor count.
    pub budget: usize,
    pub tau: f64,
    pub lidar_costs: Vec<f64>,
    pub radar_costs: Vec<f64>,
    /// Optional upper bound on the summed unit cost of a selection.
    pub cost_limit: Option<f64>,
}

impl PlacementProblem {
    pub fn new(vl: VisibilityMatrix, vr: VisibilityMatrix, weights: Vec<f64>, budget: usize, tau: f64) -> Result<Self> {
        if vl.modality != Modality::Lidar || vr.modality != Modality::Radar {
            return Err(Error::Invalid("expected a lidar matrix and a radar matrix".into()));
        }
        if vl.cols() != weights.len() || vr.cols() != weights.len() {
            return Err(Error::Invalid(format!(
                "matrix columns ({}, {}) do not match {} cell weights",
                vl.cols(),
                vr.cols(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(Error::Invalid(format!("cell weight {w} must be >= 0")));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::Invalid(format!("tau {tau} must be > 0")));
        }
        let ll = log_visibility(&vl)?;
        let lr = log_visibility(&vr)?;
        let (nl, nr) = (vl.rows(), vr.rows());
        Ok(PlacementProblem {
            vl,
            vr,
            ll,
            lr,
            weights,
            budget,
            tau,
            lidar_costs: vec![0.0; nl],
            radar_costs: vec![0.0; nr],
            cost_limit: None,
        })
    }

    /// Attaches per-candidate unit costs (used for reports and the cost limit).
    pub fn with_costs(mut self, lidar_costs: Vec<f64>, radar_costs: Vec<f64>) -> Result<Self> {
        if lidar_costs.len() != self.n_lidar() || radar_costs.len() != self.n_radar() {
            return Err(Error::Invalid("cost vectors do not match candidate counts".into()));
        }
        if let Some(c) = lidar_costs.iter().chain(&radar_costs).find(|c| !(**c >= 0.0 && c.is_finite())) {
            return Err(Error::Invalid(format!("unit cost {c} must be >= 0")));
        }
        self.lidar_costs = lidar_costs;
        self.radar_costs = radar_costs;
        Ok(self)
    }

    pub fn with_cost_limit(mut self, limit: Option<f64>) -> Self {
        self.cost_limit = limit;
        self
    }

    pub fn n_lidar(&self) -> usize {
        self.vl.rows()
    }

    pub fn n_radar(&self) -> usize {
        self.vr.rows()
    }

    pub fn n_cells(&self) -> usize {
        self.weights.len()
    }

    pub(crate) fn log_lidar(&self, i: usize, j: usize) -> f64 {
        self.ll[i * self.n_cells() + j]
    }

    pub(crate) fn log_radar(&self, i: usize, j: usize) -> f64 {
        self.lr[i * self.n_cells() + j]
    }

    pub fn selection_cost(&self, sel: &Selection) -> f64 {
        sel.lidar.iter().map(|&i| self.lidar_costs[i]).sum::<f64>()
            + sel.radar.iter().map(|&i| self.radar_costs[i]).sum::<f64>()
    }

    /// Whether `sel` satisfies the count budget and any cost limit.
    pub fn is_feasible(&self, sel: &Selection) -> bool {
        sel.len() <= self.budget && self.within_cost(self.selection_cost(sel))
    }

    pub(crate) fn within_cost(&self, cost: f64) -> bool {
        self.cost_limit.is_none_or(|limit| cost <= limit + 1e-9)
    }

    fn check_indices(&self, sel: &Selection) -> Result<()> {
        if let Some(&i) = sel.lidar.iter().find(|&&i| i >= self.n_lidar()) {
            return Err(Error::IndexOutOfRange { what: "lidar candidate", index: i, len: self.n_lidar() });
        }
        if let Some(&i) = sel.radar.iter().find(|&&i| i >= self.n_radar()) {
            return Err(Error::IndexOutOfRange { what: "radar candidate", index: i, len: self.n_radar() });
        }
        Ok(())
    }

    /// Objective of a selection with sorted, in-range index lists.
    pub(crate) fn objective_of(&self, lidar: &[usize], radar: &[usize]) -> f64 {
        let mut total = 0.0;
        for j in 0..self.n_cells() {
            let (seen, rho) = self.cell_terms(lidar, radar, j);
            if seen {
                total += rho;
            }
        }
        total
    }

    fn cell_terms(&self, lidar: &[usize], radar: &[usize], j: usize) -> (bool, f64) {
        let mut log_l = 0.0;
        let mut mass_l = 0.0;
        for &i in lidar {
            log_l += self.log_lidar(i, j);
            mass_l += self.vl.get(i, j);
        }
        let mut log_r = 0.0;
        let mut mass_r = 0.0;
        for &i in radar {
            log_r += self.log_radar(i, j);
            mass_r += self.vr.get(i, j);
        }
        let seen = log_l >= self.tau - FEASIBILITY_TOL && log_r >= self.tau - FEASIBILITY_TOL;
        (seen, (mass_l + mass_r) * self.weights[j])
    }

    /// Σ_j w_j · V[i, j] for one candidate.
    pub(crate) fn weighted_mass(&self, modality: Modality, i: usize) -> f64 {
        let m = match modality {
            Modality::Lidar => &self.vl,
            Modality::Radar => &self.vr,
        };
        m.row(i).iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }
}

/// Chosen candidates: `lidar` holds the `x_i = 1` indices, `radar` the
/// `y_i = 1` indices. Both lists are kept sorted and unique, so the derived
/// ordering is the canonical lexicographic tie-break.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Selection {
    pub lidar: Vec<usize>,
    pub radar: Vec<usize>,
}

impl Selection {
    pub fn new(lidar: impl IntoIterator<Item = usize>, radar: impl IntoIterator<Item = usize>) -> Self {
        let mut lidar: Vec<usize> = lidar.into_iter().collect();
        let mut radar: Vec<usize> = radar.into_iter().collect();
        lidar.sort_unstable();
        lidar.dedup();
        radar.sort_unstable();
        radar.dedup();
        Selection { lidar, radar }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.lidar.len() + self.radar.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, modality: Modality, i: usize) -> bool {
        match modality {
            Modality::Lidar => self.lidar.binary_search(&i).is_ok(),
            Modality::Radar => self.radar.binary_search(&i).is_ok(),
        }
    }

    pub fn with(&self, modality: Modality, i: usize) -> Self {
        let mut s = self.clone();
        let list = match modality {
            Modality::Lidar => &mut s.lidar,
            Modality::Radar => &mut s.radar,
        };
        if let Err(pos) = list.binary_search(&i) {
            list.insert(pos, i);
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementSolution {
    pub selection: Selection,
    /// Per-cell seen flags.
    pub t: Vec<bool>,
    pub rho: Vec<f64>,
    pub objective: f64,
    /// True when produced by an exact solver.
    pub optimal: bool,
}

/// Evaluates a selection. The budget is not enforced here.
pub fn evaluate_selection(problem: &PlacementProblem, sel: &Selection) -> Result<PlacementSolution> {
    problem.check_indices(sel)?;
    let sel = Selection::new(sel.lidar.iter().copied(), sel.radar.iter().copied());
    let n = problem.n_cells();
    let mut t = Vec::with_capacity(n);
    let mut rho = Vec::with_capacity(n);
    let mut objective = 0.0;
    for j in 0..n {
        let (seen, r) = problem.cell_terms(&sel.lidar, &sel.radar, j);
        if seen {
            objective += r;
        }
        t.push(seen);
        rho.push(r);
    }
    Ok(PlacementSolution {
        selection: sel,
        t,
        rho,
        objective,
        optimal: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Exhaustive,
    Bnb,
    Greedy,
}

impl std::str::FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(Solver::Exhaustive),
            "bnb" | "branch-bound" => Ok(Solver::Bnb),
            "greedy" => Ok(Solver::Greedy),
            other => Err(Error::Invalid(format!("unknown solver `{other}`"))),
        }
    }
}

pub fn solve(problem: &PlacementProblem, solver: Solver) -> Result<PlacementSolution> {
    match solver {
        Solver::Exhaustive => solve_exhaustive(problem),
        Solver::Bnb => solve_branch_bound(problem),
        Solver::Greedy => solve_greedy(problem),
    }
}
