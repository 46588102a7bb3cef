//! LP-format export of the placement model for external MILP solvers.
//!
//! The bilinear objective `Σ t_j·ρ_j` is linearised with a continuous
//! `z_j ∈ [0, M_j]` and McCormick rows
//!
//! ```text
//! z_j ≤ M_j·t_j
//! z_j ≤ ρ_j(x, y)
//! z_j ≥ ρ_j(x, y) − M_j·(1 − t_j)
//! ```
//!
//! where `M_j = w_j·(Σ_i Vl[i,j] + Σ_i Vr[i,j])` bounds `ρ_j` from above.

use std::fmt::Write;

use super::PlacementProblem;

/// Shortest round-trip decimal; never prints `-0`.
fn num(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v}")
    }
}

struct Row {
    terms: Vec<(f64, String)>,
}

impl Row {
    fn new() -> Self {
        Row { terms: Vec::new() }
    }

    fn add(&mut self, coef: f64, var: impl Into<String>) -> &mut Self {
        self.terms.push((coef, var.into()));
        self
    }

    fn render(&self) -> String {
        let mut s = String::new();
        for (coef, var) in &self.terms {
            let sign = if coef.is_sign_negative() && *coef != 0.0 { '-' } else { '+' };
            let _ = write!(s, " {sign} {} {var}", num(coef.abs()));
        }
        s
    }
}

/// Renders the placement problem as an LP file. Output is deterministic and
/// line-ordered: objective, budget (and cost) rows, per-cell visibility rows,
/// per-cell McCormick rows, bounds, binaries.
pub fn export_milp(problem: &PlacementProblem) -> String {
    let (nl, nr, nc) = (problem.n_lidar(), problem.n_radar(), problem.n_cells());
    let mut out = String::new();
    let _ = writeln!(out, "\\ roadside sensor placement model");
    let _ = writeln!(
        out,
        "\\ lidar={nl} radar={nr} cells={nc} budget={} tau={}",
        problem.budget,
        num(problem.tau)
    );

    let big_m: Vec<f64> = (0..nc)
        .map(|j| {
            let sl: f64 = (0..nl).map(|i| problem.vl.get(i, j)).sum();
            let sr: f64 = (0..nr).map(|i| problem.vr.get(i, j)).sum();
            problem.weights[j] * (sl + sr)
        })
        .collect();

    out.push_str("Maximize\n");
    let mut obj = Row::new();
    for j in 0..nc {
        obj.add(1.0, format!("z{j}"));
    }
    let _ = writeln!(out, " obj:{}", obj.render());

    out.push_str("Subject To\n");
    let mut budget = Row::new();
    for i in 0..nl {
        budget.add(1.0, format!("x{i}"));
    }
    for i in 0..nr {
        budget.add(1.0, format!("y{i}"));
    }
    let _ = writeln!(out, " budget:{} <= {}", budget.render(), problem.budget);

    if let Some(limit) = problem.cost_limit {
        let mut cost = Row::new();
        for i in 0..nl {
            cost.add(problem.lidar_costs[i], format!("x{i}"));
        }
        for i in 0..nr {
            cost.add(problem.radar_costs[i], format!("y{i}"));
        }
        let _ = writeln!(out, " cost:{} <= {}", cost.render(), num(limit));
    }

    for j in 0..nc {
        let mut row = Row::new();
        for i in (0..nl).filter(|&i| problem.log_lidar(i, j) != 0.0) {
            row.add(problem.log_lidar(i, j), format!("x{i}"));
        }
        row.add(-problem.tau, format!("t{j}"));
        let _ = writeln!(out, " lvis{j}:{} >= 0", row.render());

        let mut row = Row::new();
        for i in (0..nr).filter(|&i| problem.log_radar(i, j) != 0.0) {
            row.add(problem.log_radar(i, j), format!("y{i}"));
        }
        row.add(-problem.tau, format!("t{j}"));
        let _ = writeln!(out, " rvis{j}:{} >= 0", row.render());
    }

    for j in 0..nc {
        let w = problem.weights[j];
        let mut rho = Vec::new();
        for i in (0..nl).filter(|&i| problem.vl.get(i, j) != 0.0) {
            rho.push((w * problem.vl.get(i, j), format!("x{i}")));
        }
        for i in (0..nr).filter(|&i| problem.vr.get(i, j) != 0.0) {
            rho.push((w * problem.vr.get(i, j), format!("y{i}")));
        }

        let mut upper = Row::new();
        upper.add(1.0, format!("z{j}")).add(-big_m[j], format!("t{j}"));
        let _ = writeln!(out, " mcu{j}:{} <= 0", upper.render());

        let mut le_rho = Row::new();
        le_rho.add(1.0, format!("z{j}"));
        for (c, v) in &rho {
            le_rho.add(-c, v.clone());
        }
        let _ = writeln!(out, " mcr{j}:{} <= 0", le_rho.render());

        let mut ge_rho = Row::new();
        ge_rho.add(1.0, format!("z{j}"));
        for (c, v) in &rho {
            ge_rho.add(-c, v.clone());
        }
        ge_rho.add(-big_m[j], format!("t{j}"));
        let _ = writeln!(out, " mcl{j}:{} >= {}", ge_rho.render(), num(-big_m[j]));
    }

    out.push_str("Bounds\n");
    for j in 0..nc {
        let _ = writeln!(out, " 0 <= z{j} <= {}", num(big_m[j]));
    }

    out.push_str("Binaries\n");
    for i in 0..nl {
        let _ = writeln!(out, " x{i}");
    }
    for i in 0..nr {
        let _ = writeln!(out, " y{i}");
    }
    for j in 0..nc {
        let _ = writeln!(out, " t{j}");
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::placement::DEFAULT_TAU;
    use crate::scene::Modality;
    use crate::visibility::VisibilityMatrix;

    fn one_by_one(v: f64) -> PlacementProblem {
        PlacementProblem::new(
            VisibilityMatrix::from_rows(Modality::Lidar, 1, &[vec![v]]).unwrap(),
            VisibilityMatrix::from_rows(Modality::Radar, 1, &[vec![v]]).unwrap(),
            vec![1.0],
            2,
            DEFAULT_TAU,
        )
        .unwrap()
    }

    fn section<'a>(lp: &'a str, start: &str, end: &str) -> Vec<&'a str> {
        let lines: Vec<&str> = lp.lines().collect();
        let a = lines.iter().position(|l| *l == start).unwrap();
        let b = lines.iter().position(|l| *l == end).unwrap();
        lines[a + 1..b].to_vec()
    }

    #[test]
    fn row_counts_for_smallest_instance() {
        let lp = export_milp(&one_by_one(0.5));
        let rows = section(&lp, "Subject To", "Bounds");
        assert_eq!(rows.iter().filter(|r| r.starts_with(" budget:")).count(), 1);
        assert_eq!(rows.iter().filter(|r| r.contains("vis")).count(), 2);
        assert_eq!(rows.iter().filter(|r| r.starts_with(" mc")).count(), 3);
        assert_eq!(rows.len(), 6);
        assert_eq!(section(&lp, "Binaries", "End").len(), 3);
        assert_eq!(section(&lp, "Bounds", "Binaries").len(), 1);
    }

    #[test]
    fn zero_visibility_has_zero_big_m() {
        let lp = export_milp(&one_by_one(0.0));
        assert!(lp.contains(" 0 <= z0 <= 0\n"), "{lp}");
        assert!(lp.contains(" mcu0: + 1 z0 + 0 t0 <= 0\n"), "{lp}");
    }

    #[test]
    fn output_is_deterministic() {
        let p = one_by_one(0.3);
        assert_eq!(export_milp(&p), export_milp(&p));
    }
}
