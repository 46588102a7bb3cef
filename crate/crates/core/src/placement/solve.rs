use std::cmp::Ordering;

use super::{evaluate_selection, PlacementProblem, PlacementSolution, Selection};
use crate::scene::Modality;
use crate::{Error, Result};

/// Largest `N_l + N_r` the exhaustive solver accepts.
pub const EXHAUSTIVE_MAX_CANDIDATES: usize = 20;

fn finish(problem: &PlacementProblem, sel: &Selection, optimal: bool) -> Result<PlacementSolution> {
    let mut sol = evaluate_selection(problem, sel)?;
    sol.optimal = optimal;
    Ok(sol)
}

/// `(objective, selection)` with larger objective first, then the
/// lexicographically smaller selection.
fn improves(obj: f64, sel: &Selection, best_obj: f64, best: &Selection) -> bool {
    match obj.partial_cmp(&best_obj) {
        Some(Ordering::Greater) => true,
        Some(Ordering::Equal) => sel < best,
        _ => false,
    }
}

/// Enumerates every budget-feasible selection.
pub fn solve_exhaustive(problem: &PlacementProblem) -> Result<PlacementSolution> {
    let (nl, nr) = (problem.n_lidar(), problem.n_radar());
    let n = nl + nr;
    if n > EXHAUSTIVE_MAX_CANDIDATES {
        return Err(Error::TooLarge(format!(
            "exhaustive search over {n} candidates (limit {EXHAUSTIVE_MAX_CANDIDATES})"
        )));
    }
    let mut best = Selection::empty();
    let mut best_obj = 0.0;
    let mut lidar = Vec::with_capacity(nl);
    let mut radar = Vec::with_capacity(nr);
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize > problem.budget {
            continue;
        }
        lidar.clear();
        radar.clear();
        lidar.extend((0..nl).filter(|&i| mask & (1 << i) != 0));
        radar.extend((0..nr).filter(|&i| mask & (1 << (nl + i)) != 0));
        let sel = Selection { lidar: lidar.clone(), radar: radar.clone() };
        if !problem.within_cost(problem.selection_cost(&sel)) {
            continue;
        }
        let obj = problem.objective_of(&sel.lidar, &sel.radar);
        if improves(obj, &sel, best_obj, &best) {
            best_obj = obj;
            best = sel;
        }
    }
    finish(problem, &best, true)
}

#[derive(Clone, Copy)]
struct Candidate {
    modality: Modality,
    index: usize,
    cost: f64,
}

struct Search<'a> {
    problem: &'a PlacementProblem,
    order: Vec<Candidate>,
    best_obj: f64,
    best: Selection,
}

impl Search<'_> {
    fn objective(&self, sel: &Selection) -> f64 {
        self.problem.objective_of(&sel.lidar, &sel.radar)
    }

    fn dfs(&mut self, pos: usize, current: Selection, cost: f64) {
        if pos == self.order.len() || current.len() == self.problem.budget {
            return;
        }
        let mut optimistic = current.clone();
        for c in &self.order[pos..] {
            optimistic = optimistic.with(c.modality, c.index);
        }
        if self.objective(&optimistic) <= self.best_obj {
            return;
        }
        let c = self.order[pos];
        let with_cost = cost + c.cost;
        if self.problem.within_cost(with_cost) {
            let next = current.with(c.modality, c.index);
            let obj = self.objective(&next);
            if improves(obj, &next, self.best_obj, &self.best) {
                self.best_obj = obj;
                self.best = next.clone();
            }
            self.dfs(pos + 1, next, with_cost);
        }
        self.dfs(pos + 1, current, cost);
    }
}

/// Lexicographically smallest feasible selection whose objective equals
/// `target`, found by enumerating selections in canonical order with the
/// superset bound.
fn canonical_optimum(problem: &PlacementProblem, target: f64) -> Option<Selection> {
    let all_radar: Vec<usize> = (0..problem.n_radar()).collect();

    fn radar_dfs(
        problem: &PlacementProblem,
        lidar: &[usize],
        radar: &mut Vec<usize>,
        next: usize,
        target: f64,
    ) -> Option<Selection> {
        let sel = Selection { lidar: lidar.to_vec(), radar: radar.clone() };
        if problem.is_feasible(&sel) && problem.objective_of(lidar, radar) == target {
            return Some(sel);
        }
        if sel.len() >= problem.budget {
            return None;
        }
        for k in next..problem.n_radar() {
            let mut reach = radar.clone();
            reach.extend(k..problem.n_radar());
            if problem.objective_of(lidar, &reach) < target {
                break;
            }
            radar.push(k);
            let found = radar_dfs(problem, lidar, radar, k + 1, target);
            radar.pop();
            if found.is_some() {
                return found;
            }
        }
        None
    }

    fn lidar_dfs(
        problem: &PlacementProblem,
        lidar: &mut Vec<usize>,
        next: usize,
        target: f64,
        all_radar: &[usize],
    ) -> Option<Selection> {
        if problem.objective_of(lidar, all_radar) >= target {
            if let Some(sel) = radar_dfs(problem, lidar, &mut Vec::new(), 0, target) {
                return Some(sel);
            }
        }
        if lidar.len() >= problem.budget {
            return None;
        }
        for k in next..problem.n_lidar() {
            let mut reach = lidar.clone();
            reach.extend(k..problem.n_lidar());
            if problem.objective_of(&reach, all_radar) < target {
                break;
            }
            lidar.push(k);
            let found = lidar_dfs(problem, lidar, k + 1, target, all_radar);
            lidar.pop();
            if found.is_some() {
                return found;
            }
        }
        None
    }

    lidar_dfs(problem, &mut Vec::new(), 0, target, &all_radar)
}

/// Exact depth-first branch and bound.
///
/// Candidates are branched in descending weighted visibility mass, include
/// before exclude, starting from the greedy incumbent. A node is pruned when
/// the objective of "current ∪ every undecided candidate" cannot beat the
/// incumbent; the objective is monotone under adding candidates, so this
/// bound is admissible. The optimum is then re-canonicalised to the
/// lexicographically smallest selection attaining it.
pub fn solve_branch_bound(problem: &PlacementProblem) -> Result<PlacementSolution> {
    let mut order: Vec<(f64, Candidate)> = Vec::with_capacity(problem.n_lidar() + problem.n_radar());
    for (modality, n, costs) in [
        (Modality::Lidar, problem.n_lidar(), &problem.lidar_costs),
        (Modality::Radar, problem.n_radar(), &problem.radar_costs),
    ] {
        for i in 0..n {
            order.push((problem.weighted_mass(modality, i), Candidate { modality, index: i, cost: costs[i] }));
        }
    }
    order.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then(a.1.modality.cmp(&b.1.modality))
            .then(a.1.index.cmp(&b.1.index))
    });

    let warm = solve_greedy(problem)?;
    let mut search = Search {
        problem,
        order: order.into_iter().map(|(_, c)| c).collect(),
        best_obj: warm.objective,
        best: warm.selection,
    };
    search.dfs(0, Selection::empty(), 0.0);

    let best = canonical_optimum(problem, search.best_obj).unwrap_or(search.best);
    finish(problem, &best, true)
}

/// Greedy marginal-gain heuristic.
///
/// Each step adds the single candidate with the largest objective gain
/// (lidar before radar, then lowest index on ties). A lone sensor of either
/// modality never satisfies both visibility constraints, so when no single
/// candidate gains and two slots remain, the best lidar+radar pair is added
/// instead. Stops when nothing yields a positive gain.
pub fn solve_greedy(problem: &PlacementProblem) -> Result<PlacementSolution> {
    let mut sel = Selection::empty();
    let mut cost = 0.0;
    let mut current = 0.0;
    let costs = |m: Modality, i: usize| match m {
        Modality::Lidar => problem.lidar_costs[i],
        Modality::Radar => problem.radar_costs[i],
    };

    while sel.len() < problem.budget {
        let mut best: Option<(f64, Selection, f64)> = None;
        for (m, n) in [(Modality::Lidar, problem.n_lidar()), (Modality::Radar, problem.n_radar())] {
            for i in (0..n).filter(|&i| !sel.contains(m, i)) {
                let c = cost + costs(m, i);
                if !problem.within_cost(c) {
                    continue;
                }
                let next = sel.with(m, i);
                let gain = problem.objective_of(&next.lidar, &next.radar) - current;
                if best.as_ref().is_none_or(|(g, _, _)| gain > *g) {
                    best = Some((gain, next, c));
                }
            }
        }
        let single_gain = best.as_ref().map_or(0.0, |b| b.0);
        if single_gain <= 0.0 && problem.budget - sel.len() >= 2 {
            best = None;
            for l in (0..problem.n_lidar()).filter(|&i| !sel.contains(Modality::Lidar, i)) {
                for r in (0..problem.n_radar()).filter(|&i| !sel.contains(Modality::Radar, i)) {
                    let c = cost + costs(Modality::Lidar, l) + costs(Modality::Radar, r);
                    if !problem.within_cost(c) {
                        continue;
                    }
                    let next = sel.with(Modality::Lidar, l).with(Modality::Radar, r);
                    let gain = problem.objective_of(&next.lidar, &next.radar) - current;
                    if best.as_ref().is_none_or(|(g, _, _)| gain > *g) {
                        best = Some((gain, next, c));
                    }
                }
            }
        }
        match best {
            Some((gain, next, c)) if gain > 0.0 => {
                current = problem.objective_of(&next.lidar, &next.radar);
                sel = next;
                cost = c;
            }
            _ => break,
        }
    }
    finish(problem, &sel, false)
}
