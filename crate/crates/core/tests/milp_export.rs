//! Re-parses exported LP files and solves them by enumerating the binary
//! variables. With binaries fixed, every remaining row constrains at most one
//! continuous `z`, so the LP part reduces to per-variable bounds.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roadside_core::placement::{export_milp, solve_exhaustive, PlacementProblem};
use roadside_core::scene::Modality;
use roadside_core::visibility::{canonical_value, VisibilityMatrix};

#[derive(Debug)]
struct Constraint {
    terms: Vec<(f64, String)>,
    sense: String,
    rhs: f64,
}

#[derive(Debug, Default)]
struct Lp {
    objective: Vec<(f64, String)>,
    rows: Vec<Constraint>,
    upper: BTreeMap<String, f64>,
    binaries: Vec<String>,
}

fn parse_terms(s: &str) -> Vec<(f64, String)> {
    let tok: Vec<&str> = s.split_whitespace().collect();
    tok.chunks(3)
        .map(|c| {
            let sign = if c[0] == "-" { -1.0 } else { 1.0 };
            (sign * c[1].parse::<f64>().unwrap(), c[2].to_string())
        })
        .collect()
}

fn parse_lp(text: &str) -> Lp {
    let mut lp = Lp::default();
    let mut section = "";
    for line in text.lines() {
        if line.starts_with('\\') {
            continue;
        }
        match line.trim() {
            "Maximize" | "Subject To" | "Bounds" | "Binaries" | "End" => {
                section = line.trim();
                continue;
            }
            _ => {}
        }
        let body = line.trim();
        match section {
            "Maximize" => lp.objective = parse_terms(body.split_once(':').unwrap().1),
            "Subject To" => {
                let rest = body.split_once(':').unwrap().1;
                let (lhs, sense, rhs) = ["<=", ">="]
                    .iter()
                    .find_map(|op| rest.split_once(op).map(|(l, r)| (l, op.to_string(), r)))
                    .unwrap();
                lp.rows.push(Constraint { terms: parse_terms(lhs), sense, rhs: rhs.trim().parse().unwrap() });
            }
            "Bounds" => {
                let p: Vec<&str> = body.split_whitespace().collect();
                assert_eq!((p[0], p[1], p[3]), ("0", "<=", "<="));
                lp.upper.insert(p[2].to_string(), p[4].parse().unwrap());
            }
            "Binaries" => lp.binaries.extend(body.split_whitespace().map(str::to_string)),
            _ => panic!("content outside a section: {line}"),
        }
    }
    lp
}

fn enumerate_optimum(lp: &Lp) -> f64 {
    let n = lp.binaries.len();
    assert!(n <= 20);
    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..(1 << n) {
        let fixed: BTreeMap<&str, f64> =
            lp.binaries.iter().enumerate().map(|(k, v)| (v.as_str(), ((mask >> k) & 1) as f64)).collect();
        let mut lo: BTreeMap<&str, f64> = lp.upper.keys().map(|k| (k.as_str(), 0.0)).collect();
        let mut hi: BTreeMap<&str, f64> = lp.upper.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        let mut feasible = true;
        for row in &lp.rows {
            let mut constant = 0.0;
            let mut free = None;
            for (c, v) in &row.terms {
                match fixed.get(v.as_str()) {
                    Some(x) => constant += c * x,
                    None => {
                        assert!(free.is_none(), "row couples two continuous variables");
                        free = Some((*c, v.as_str()));
                    }
                }
            }
            match free {
                None => {
                    let ok = if row.sense == "<=" { constant <= row.rhs + 1e-9 } else { constant >= row.rhs - 1e-9 };
                    feasible &= ok;
                }
                Some((c, v)) => {
                    let bound = (row.rhs - constant) / c;
                    let upper = (row.sense == "<=") == (c > 0.0);
                    if upper {
                        hi.entry(v).and_modify(|h| *h = h.min(bound));
                    } else {
                        lo.entry(v).and_modify(|l| *l = l.max(bound));
                    }
                }
            }
            if !feasible {
                break;
            }
        }
        if !feasible || lo.iter().any(|(k, l)| *l > hi[k] + 1e-9) {
            continue;
        }
        let value: f64 = lp
            .objective
            .iter()
            .map(|(c, v)| c * fixed.get(v.as_str()).copied().unwrap_or_else(|| if *c > 0.0 { hi[v.as_str()] } else { lo[v.as_str()] }))
            .sum();
        best = best.max(value);
    }
    best
}

fn random_problem(rng: &mut ChaCha8Rng) -> PlacementProblem {
    let nl = rng.random_range(0..=3);
    let nr = rng.random_range(0..=3);
    let nc = rng.random_range(1..=3);
    let mut draw = |n: usize| (0..n).map(|_| canonical_value(rng.random_range(0.0..0.95))).collect::<Vec<_>>();
    let vl = VisibilityMatrix::new(Modality::Lidar, nl, nc, 1e-6, draw(nl * nc)).unwrap();
    let vr = VisibilityMatrix::new(Modality::Radar, nr, nc, 1e-6, draw(nr * nc)).unwrap();
    let weights = draw(nc).into_iter().map(|w| 0.5 + 2.0 * w).collect();
    let budget = rng.random_range(0..=4);
    let tau = [0.5, 1.0, 1.5][rng.random_range(0..3)];
    PlacementProblem::new(vl, vr, weights, budget, tau).unwrap()
}

#[test]
fn exported_model_has_the_same_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..60 {
        let mut p = random_problem(&mut rng);
        if case % 3 == 0 {
            let costs = |n: usize, rng: &mut ChaCha8Rng| (0..n).map(|_| rng.random_range(1..5) as f64).collect();
            let (cl, cr) = (costs(p.n_lidar(), &mut rng), costs(p.n_radar(), &mut rng));
            p = p.with_costs(cl, cr).unwrap().with_cost_limit(Some(rng.random_range(2..8) as f64));
        }
        let lp = parse_lp(&export_milp(&p));
        let from_lp = enumerate_optimum(&lp);
        let exact = solve_exhaustive(&p).unwrap().objective;
        assert!((from_lp - exact).abs() < 1e-6, "case {case}: lp {from_lp} vs exhaustive {exact}");
    }
}
