//! Acceptance suite. Run with `cargo test -p roadside-cli --test acceptance`;
//! prints one PASS/FAIL/SKIP line per criterion and exits nonzero on any FAIL.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roadside_core::coverage::central_coverage;
use roadside_core::demo::{intersection_scene, single_mount_scene, DemoOptions};
use roadside_core::detection::{DetectionBox, ObjectClass, Source};
use roadside_core::fusion::{fuse_late, match_pairs, FusionConfig};
use roadside_core::io::frame_file::{save_frames, Frame};
use roadside_core::io::report::parse_report;
use roadside_core::io::scene_file::save_scene;
use roadside_core::iou::iou_3d;
use roadside_core::metrics::{evaluate_ap, FramePair, MatchMode};
use roadside_core::pipeline::{run_with_matrices, ConfigSpec, PipelineConfig};
use roadside_core::placement::{
    evaluate_selection, export_milp, solve_branch_bound, solve_exhaustive, PlacementProblem, Selection,
};
use roadside_core::scenario::ScenarioConfig;
use roadside_core::scene::{Modality, SensorSpec};
use roadside_core::visibility::{build_visibility, log_miss, VisibilityConfig, VisibilityMatrix, DEFAULT_EPSILON};

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

use Verdict::{Fail, Pass, Skip};

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Pass(detail)
    } else {
        Fail(detail)
    }
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_roadside")
}

fn random_matrix(rng: &mut ChaCha8Rng, modality: Modality, rows: usize, cols: usize) -> VisibilityMatrix {
    let values = (0..rows * cols).map(|_| rng.random_range(0.0..=0.95)).collect();
    VisibilityMatrix::new(modality, rows, cols, DEFAULT_EPSILON, values).unwrap()
}

// 1 ----------------------------------------------------------------------

fn solver_exactness() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut mismatches = Vec::new();
    for case in 0..200 {
        let total = rng.random_range(1..=12);
        let nl = rng.random_range(0..=total);
        let nr = total - nl;
        let nc = rng.random_range(1..=100);
        let vl = random_matrix(&mut rng, Modality::Lidar, nl, nc);
        let vr = random_matrix(&mut rng, Modality::Radar, nr, nc);
        let weights = (0..nc).map(|_| rng.random_range(0.5..3.0)).collect();
        let budget = rng.random_range(0..=5);
        let tau = [0.5, 1.0, 2.0][rng.random_range(0..3)];
        let p = PlacementProblem::new(vl, vr, weights, budget, tau).unwrap();
        let ex = solve_exhaustive(&p).unwrap();
        let bb = solve_branch_bound(&p).unwrap();
        if ex.objective != bb.objective || ex.selection != bb.selection {
            mismatches.push(case);
        }
    }
    check(mismatches.is_empty(), format!("200 instances, mismatches {mismatches:?}"))
}

// 2 ----------------------------------------------------------------------

fn threshold_exactness() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for tau in [0.5, 1.0, 2.0] {
        let v = 1.0 - f64::exp(-tau);
        worst = worst.max((log_miss(v) - tau).abs());
        let single = |v: f64| {
            let vl = VisibilityMatrix::new(Modality::Lidar, 1, 1, DEFAULT_EPSILON, vec![v]).unwrap();
            let vr = VisibilityMatrix::new(Modality::Radar, 1, 1, DEFAULT_EPSILON, vec![v]).unwrap();
            let p = PlacementProblem::new(vl, vr, vec![1.0], 2, tau).unwrap();
            evaluate_selection(&p, &Selection::new([0], [0])).unwrap().t[0]
        };
        let below = 1.0 - (-(tau - 1e-6)).exp();
        ok &= single(v) && !single(below);
    }
    check(ok && worst <= 1e-9, format!("max |-ln(1-v) - tau| = {worst:.2e}, threshold met exactly at tau"))
}

// 3 ----------------------------------------------------------------------

fn beam_monotonicity() -> Verdict {
    let mut ok = true;
    let mut strict = false;
    let mut lines = Vec::new();
    for h in [4.5, 6.0] {
        let cov: Vec<f64> = [SensorSpec::lidar_16(), SensorSpec::lidar_32(), SensorSpec::lidar_64()]
            .into_iter()
            .map(|spec| {
                let scene = single_mount_scene(50, 1.5, spec, [0.3, 0.2, h]);
                let (vl, vr) = build_visibility(&scene, &VisibilityConfig::default()).unwrap();
                let p = PlacementProblem::new(vl, vr, scene.roi.weight_vector(), 1, 1.0).unwrap();
                central_coverage(&p, &Selection::new([0], []), 0.0).unwrap().central_coverage
            })
            .collect();
        ok &= cov.windows(2).all(|w| w[1] >= w[0]);
        strict |= cov.windows(2).any(|w| w[1] > w[0]);
        lines.push(format!("h={h}: {:.4}/{:.4}/{:.4}", cov[0], cov[1], cov[2]));
    }
    check(ok && strict, format!("16/32/64 beams {}", lines.join(", ")))
}

// 4 ----------------------------------------------------------------------

fn inside(b: &DetectionBox, p: [f64; 3]) -> bool {
    let (dx, dy) = (p[0] - b.center[0], p[1] - b.center[1]);
    let (s, c) = b.yaw.sin_cos();
    let u = c * dx + s * dy;
    let v = -s * dx + c * dy;
    u.abs() <= b.size[0] / 2.0 && v.abs() <= b.size[1] / 2.0 && (p[2] - b.center[2]).abs() <= b.size[2] / 2.0
}

fn monte_carlo_iou(a: &DetectionBox, b: &DetectionBox, samples: usize, rng: &mut ChaCha8Rng) -> f64 {
    let half = |d: &DetectionBox| (d.size[0].hypot(d.size[1])) / 2.0;
    let lo = [
        (a.center[0] - half(a)).min(b.center[0] - half(b)),
        (a.center[1] - half(a)).min(b.center[1] - half(b)),
        (a.center[2] - a.size[2] / 2.0).min(b.center[2] - b.size[2] / 2.0),
    ];
    let hi = [
        (a.center[0] + half(a)).max(b.center[0] + half(b)),
        (a.center[1] + half(a)).max(b.center[1] + half(b)),
        (a.center[2] + a.size[2] / 2.0).max(b.center[2] + b.size[2] / 2.0),
    ];
    let (mut both, mut either) = (0u64, 0u64);
    for _ in 0..samples {
        let p: [f64; 3] = std::array::from_fn(|k| rng.random_range(lo[k]..hi[k]));
        let (ia, ib) = (inside(a, p), inside(b, p));
        both += (ia && ib) as u64;
        either += (ia || ib) as u64;
    }
    if either == 0 {
        0.0
    } else {
        both as f64 / either as f64
    }
}

fn iou_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let mut draw = || {
            DetectionBox::new(
                [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(0.5..1.5)],
                [rng.random_range(1.0..4.0), rng.random_range(0.5..2.0), rng.random_range(1.0..2.0)],
                rng.random_range(-3.1..3.1),
                ObjectClass::Car,
                0.5,
                Source::Lidar,
            )
        };
        let (a, b) = (draw(), draw());
        let mc = monte_carlo_iou(&a, &b, 1_000_000, &mut rng);
        worst = worst.max((iou_3d(&a, &b) - mc).abs());
    }
    let cube = |x: f64| DetectionBox::new([x, 0.0, 0.0], [1.0, 1.0, 1.0], 0.0, ObjectClass::Car, 0.5, Source::Lidar);
    let identical = iou_3d(&cube(0.0), &cube(0.0));
    let offset = iou_3d(&cube(0.0), &cube(0.5));
    let closed = (identical - 1.0).abs() <= 1e-9 && (offset - 1.0 / 3.0).abs() <= 1e-9;
    check(
        worst <= 0.01 && closed,
        format!("max |iou - mc| over 50 pairs = {worst:.4}; identical {identical}, offset {offset:.12}"),
    )
}

// 5 ----------------------------------------------------------------------

fn random_boxes(rng: &mut ChaCha8Rng, n: usize, source: Source) -> Vec<DetectionBox> {
    (0..n)
        .map(|_| {
            let class = ObjectClass::ALL[rng.random_range(0..2)];
            DetectionBox::new(
                [rng.random_range(0.0..12.0), rng.random_range(0.0..6.0), 0.8],
                [rng.random_range(2.0..5.0), rng.random_range(1.0..2.5), 1.6],
                rng.random_range(-0.4..0.4),
                class,
                rng.random_range(0.05..1.0),
                source,
            )
        })
        .collect()
}

fn fusion_conservation() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cfg = FusionConfig::default();
    let mut bad = 0;
    let mut matched = 0;
    for _ in 0..1000 {
        let (nl, nr) = (rng.random_range(0..8), rng.random_range(0..8));
        let dl = random_boxes(&mut rng, nl, Source::Lidar);
        let dr = random_boxes(&mut rng, nr, Source::Radar);
        let m = match_pairs(&dl, &dr, cfg.iou_threshold).len();
        matched += m;
        let fused = fuse_late(&dl, &dr, &cfg).unwrap();
        bad += (fused.len() != dl.len() + dr.len() - m) as usize;

        let mut sorted_l = dl.clone();
        roadside_core::detection::sort_canonical(&mut sorted_l);
        let mut sorted_r = dr.clone();
        roadside_core::detection::sort_canonical(&mut sorted_r);
        bad += (fuse_late(&dl, &[], &cfg).unwrap() != sorted_l) as usize;
        bad += (fuse_late(&[], &dr, &cfg).unwrap() != sorted_r) as usize;
    }
    check(bad == 0, format!("1000 frames, {matched} matches, {bad} violations"))
}

// 6 ----------------------------------------------------------------------

/// Independent AP: greedy matching, then the interpolated precision at each
/// recall point taken as a max over every rank that reaches it.
fn oracle_ap(frames: &[FramePair], class: ObjectClass, mode: MatchMode, thr: f64) -> Option<f64> {
    let mut pooled: Vec<(f64, &str, usize, bool)> = Vec::new();
    let mut ngt = 0usize;
    for f in frames {
        let gts: Vec<&DetectionBox> = f.ground_truth.iter().filter(|g| g.class == class).collect();
        ngt += gts.len();
        let mut preds: Vec<usize> = (0..f.predictions.len()).filter(|&i| f.predictions[i].class == class).collect();
        preds.sort_by(|&a, &b| f.predictions[b].score.total_cmp(&f.predictions[a].score).then(a.cmp(&b)));
        let mut taken = vec![false; gts.len()];
        for i in preds {
            let p = &f.predictions[i];
            let quality = |g: &DetectionBox| match mode {
                // same-size, same-row boxes: overlap is along x only
                MatchMode::Iou => {
                    let d = (p.center[0] - g.center[0]).abs();
                    let l = p.size[0];
                    if d >= l || (p.center[1] - g.center[1]).abs() > 0.0 {
                        0.0
                    } else {
                        (l - d) / (l + d)
                    }
                }
                MatchMode::CenterDistance => -((p.center[0] - g.center[0]).powi(2) + (p.center[1] - g.center[1]).powi(2)).sqrt(),
            };
            let mut best: Option<(usize, f64)> = None;
            for (k, g) in gts.iter().enumerate() {
                if !taken[k] && best.is_none_or(|(_, q)| quality(g) > q) {
                    best = Some((k, quality(g)));
                }
            }
            let hit = match best {
                Some((k, q)) if (mode == MatchMode::Iou && q >= thr) || (mode == MatchMode::CenterDistance && -q <= thr) => {
                    taken[k] = true;
                    true
                }
                _ => false,
            };
            pooled.push((p.score, &f.frame_id, i, hit));
        }
    }
    if ngt == 0 {
        return None;
    }
    pooled.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(b.1)).then(a.2.cmp(&b.2)));
    let mut tp = 0;
    let ranks: Vec<(usize, f64)> = pooled
        .iter()
        .enumerate()
        .map(|(i, p)| {
            tp += p.3 as usize;
            (tp, tp as f64 / (i + 1) as f64)
        })
        .collect();
    let mut sum = 0.0;
    for k in 0..=100usize {
        let best = ranks.iter().filter(|(t, _)| 100 * t >= k * ngt).map(|r| r.1).fold(None, |m: Option<f64>, p| Some(m.map_or(p, |m| m.max(p))));
        sum += best.unwrap_or(0.0);
    }
    Some(sum / 101.0)
}

fn lattice_box(rng: &mut ChaCha8Rng, row: usize, class: ObjectClass, source: Source) -> DetectionBox {
    let x = rng.random_range(0..12) as f64 * 0.25;
    let score = [0.3, 0.5, 0.7, 0.9][rng.random_range(0..4)];
    DetectionBox::new([x, 10.0 * row as f64, 0.8], [1.0, 1.0, 1.6], 0.0, class, score, source)
}

fn ap_oracle() -> Verdict {
    let classes = [ObjectClass::Car, ObjectClass::Pedestrian];
    let mut mismatches = 0;
    for seed in 0..500u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let frames: Vec<FramePair> = (0..rng.random_range(1..4))
            .map(|k| {
                let mut side = |source| {
                    (0..rng.random_range(0..=5))
                        .map(|_| {
                            let row = rng.random_range(0..3);
                            let class = classes[rng.random_range(0..2)];
                            lattice_box(&mut rng, row, class, source)
                        })
                        .collect::<Vec<_>>()
                };
                let predictions = side(Source::Lidar);
                let ground_truth = side(Source::GroundTruth);
                FramePair { frame_id: format!("{k:03}"), predictions, ground_truth }
            })
            .collect();
        for class in classes {
            for (mode, thr) in [(MatchMode::Iou, 0.5), (MatchMode::CenterDistance, 0.5)] {
                let got = evaluate_ap(&frames, class, mode, thr).unwrap().ap;
                mismatches += (got != oracle_ap(&frames, class, mode, thr)) as usize;
            }
        }
    }
    // two objects, predictions TP 0.9, TP 0.8, FP 0.7
    let gt = vec![
        DetectionBox::new([0.0, 0.0, 0.8], [4.0, 2.0, 1.6], 0.0, ObjectClass::Car, 1.0, Source::GroundTruth),
        DetectionBox::new([20.0, 0.0, 0.8], [4.0, 2.0, 1.6], 0.0, ObjectClass::Car, 1.0, Source::GroundTruth),
    ];
    let mut predictions: Vec<DetectionBox> = gt
        .iter()
        .zip([0.9, 0.8])
        .map(|(g, s)| DetectionBox { score: s, source: Source::Lidar, ..g.clone() })
        .collect();
    predictions.push(DetectionBox::new([50.0, 0.0, 0.8], [4.0, 2.0, 1.6], 0.0, ObjectClass::Car, 0.7, Source::Lidar));
    let example = [FramePair { frame_id: "0".into(), predictions, ground_truth: gt }];
    let ap = evaluate_ap(&example, ObjectClass::Car, MatchMode::Iou, 0.5).unwrap().ap;
    check(
        mismatches == 0 && ap == Some(1.0),
        format!("500 seeds x 2 classes x 2 modes, {mismatches} mismatches; 3-prediction example AP {ap:?}"),
    )
}

// 7 ----------------------------------------------------------------------

fn end_to_end() -> Verdict {
    let scene = intersection_scene(&DemoOptions::default());
    let (nl, nr, nc) = (scene.lidar_candidates.len(), scene.radar_candidates.len(), scene.roi.len());
    let cfg = PipelineConfig {
        theta: 0.0,
        tau: 1.0,
        visibility: VisibilityConfig::default(),
        scenario: ScenarioConfig { seed: 11, duration_frames: 60, ..ScenarioConfig::default() }.noiseless(),
        fusion: FusionConfig::default(),
        evaluation: Default::default(),
        configs: vec![ConfigSpec {
            name: "all".into(),
            budget: 2,
            solver: roadside_core::placement::Solver::Bnb,
            lidar_specs: None,
            radar_specs: None,
            cost_limit: None,
            selection: None,
        }],
    };
    let full = |m, r| VisibilityMatrix::new(m, r, nc, DEFAULT_EPSILON, vec![1.0 - DEFAULT_EPSILON; r * nc]).unwrap();
    let seen = run_with_matrices(&scene, &full(Modality::Lidar, nl), &full(Modality::Radar, nr), &cfg).unwrap();
    let blind = run_with_matrices(
        &scene,
        &VisibilityMatrix::zeros(Modality::Lidar, nl, nc),
        &VisibilityMatrix::zeros(Modality::Radar, nr, nc),
        &cfg,
    )
    .unwrap();
    let (a, b) = (seen.configs[0].map.map, blind.configs[0].map.map);
    check((a - 1.0).abs() <= 1e-9 && b == 0.0, format!("full visibility mAP {a}, zero visibility mAP {b}"))
}

// 8 ----------------------------------------------------------------------

fn run_cli(args: &[&str], workers: usize) {
    let out = Command::new(bin()).args(args).arg("--workers").arg(workers.to_string()).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn read_outputs(dir: &Path, names: &[&str]) -> Vec<Vec<u8>> {
    let mut v: Vec<Vec<u8>> = names.iter().map(|n| std::fs::read(dir.join(n)).unwrap()).collect();
    // the manifest differs only in wall time
    let mut m: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.join("manifest.json")).unwrap()).unwrap();
    m.as_object_mut().unwrap().remove("wall_time_ms");
    v.push(m.to_string().into_bytes());
    v
}

fn determinism() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let scene = root.join("scene");
    save_scene(&scene, &intersection_scene(&DemoOptions::default())).unwrap();
    let pipeline = root.join("pipeline.toml");
    std::fs::write(
        &pipeline,
        "[scenario]\nseed = 3\nduration_frames = 40\n\n[[configs]]\nname = \"a\"\nbudget = 3\n\n\
         [[configs]]\nname = \"b\"\nbudget = 2\nlidar_specs = [\"lidar_32\"]\n",
    )
    .unwrap();
    let mut reference: Option<(Vec<Vec<u8>>, Vec<Vec<u8>>)> = None;
    let mut runs = 0;
    for (k, workers) in [1, 2, 8, 1].into_iter().enumerate() {
        let vis = root.join(format!("vis{k}"));
        let pipe = root.join(format!("pipe{k}"));
        let s = scene.to_str().unwrap();
        run_cli(&["visibility", "--scene", s, "--out-dir", vis.to_str().unwrap()], workers);
        run_cli(
            &["pipeline", "--scene", s, "--pipeline", pipeline.to_str().unwrap(), "--out-dir", pipe.to_str().unwrap()],
            workers,
        );
        let got = (
            read_outputs(&vis, &["lidar.matrix", "radar.matrix"]),
            read_outputs(&pipe, &["report.txt", "report.json"]),
        );
        runs += 1;
        match &reference {
            None => reference = Some(got),
            Some(r) if *r != got => return Fail(format!("outputs differ at workers={workers} (run {k})")),
            Some(_) => {}
        }
    }
    Pass(format!("{runs} runs of visibility and pipeline, workers 1/2/8/1, identical bytes"))
}

// 9 ----------------------------------------------------------------------

const SCIPY_SOLVER: &str = r#"
import sys
import numpy as np
from scipy.optimize import milp, LinearConstraint, Bounds

def terms(s):
    t = s.split()
    return [((-1.0 if t[i] == "-" else 1.0) * float(t[i + 1]), t[i + 2]) for i in range(0, len(t), 3)]

for path in sys.argv[1:]:
    sec, obj, rows, ub, binaries = None, [], [], {}, []
    for line in open(path):
        if line.startswith("\\"):
            continue
        s = line.strip()
        if s in ("Maximize", "Subject To", "Bounds", "Binaries", "End"):
            sec = s
            continue
        if not s:
            continue
        if sec == "Maximize":
            obj = terms(s.split(":", 1)[1])
        elif sec == "Subject To":
            rest = s.split(":", 1)[1]
            op = "<=" if "<=" in rest else ">="
            lhs, rhs = rest.split(op)
            rows.append((terms(lhs), op, float(rhs)))
        elif sec == "Bounds":
            p = s.split()
            ub[p[2]] = float(p[4])
        elif sec == "Binaries":
            binaries += s.split()
    names = sorted({n for _, n in obj} | {n for r in rows for _, n in r[0]} | set(ub) | set(binaries))
    idx = {n: k for k, n in enumerate(names)}
    c = np.zeros(len(names))
    for v, n in obj:
        c[idx[n]] -= v
    a = np.zeros((len(rows), len(names)))
    lo = np.full(len(rows), -np.inf)
    hi = np.full(len(rows), np.inf)
    for r, (ts, op, rhs) in enumerate(rows):
        for v, n in ts:
            a[r, idx[n]] += v
        if op == "<=":
            hi[r] = rhs
        else:
            lo[r] = rhs
    integrality = np.array([1 if n in binaries else 0 for n in names])
    upper = np.array([1.0 if n in binaries else ub.get(n, np.inf) for n in names])
    res = milp(c, constraints=LinearConstraint(a, lo, hi), integrality=integrality,
               bounds=Bounds(np.zeros(len(names)), upper), options={"mip_rel_gap": 0.0})
    print(repr(-res.fun) if res.success else "nan")
"#;

fn milp_cross_check() -> Verdict {
    let probe = Command::new("python3").args(["-c", "import scipy.optimize; scipy.optimize.milp"]).output();
    if !probe.is_ok_and(|o| o.status.success()) {
        return Skip("python3 with scipy.optimize.milp not found".into());
    }
    let tmp = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut paths: Vec<PathBuf> = Vec::new();
    let mut exact = Vec::new();
    for k in 0..20 {
        let nl = rng.random_range(1..=4);
        let nr = rng.random_range(1..=4);
        let nc = rng.random_range(1..=20);
        let vl = random_matrix(&mut rng, Modality::Lidar, nl, nc);
        let vr = random_matrix(&mut rng, Modality::Radar, nr, nc);
        let weights = (0..nc).map(|_| rng.random_range(0.5..3.0)).collect();
        let budget = rng.random_range(1..=5);
        let mut p = PlacementProblem::new(vl, vr, weights, budget, 1.0).unwrap();
        if k % 2 == 1 {
            let cl = (0..nl).map(|_| rng.random_range(1..5) as f64).collect();
            let cr = (0..nr).map(|_| rng.random_range(1..3) as f64).collect();
            p = p.with_costs(cl, cr).unwrap().with_cost_limit(Some(rng.random_range(3..9) as f64));
        }
        let path = tmp.path().join(format!("m{k}.lp"));
        std::fs::write(&path, export_milp(&p)).unwrap();
        paths.push(path);
        exact.push(solve_exhaustive(&p).unwrap().objective);
    }
    let script = tmp.path().join("solve.py");
    std::fs::write(&script, SCIPY_SOLVER).unwrap();
    let out = Command::new("python3").arg(&script).args(&paths).output().unwrap();
    if !out.status.success() {
        return Fail(format!("solver script failed: {}", String::from_utf8_lossy(&out.stderr)));
    }
    let solved: Vec<f64> = String::from_utf8_lossy(&out.stdout).lines().map(|l| l.trim().parse().unwrap()).collect();
    let worst = solved.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    check(
        solved.len() == 20 && worst <= 1e-6,
        format!("20 LP exports solved by scipy/HiGHS, max |lp - exhaustive| = {worst:.2e}"),
    )
}

// 10 ---------------------------------------------------------------------

/// Pedestrian AP of `fewer` is 43/50 by construction (7 false positives
/// scored above 43 true ones); `more` finds the same 43 with no false
/// positives. Cars are identical in both.
fn ap_delta_report() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let ped = |x: f64, score: f64, source| {
        DetectionBox::new([x, 0.0, 0.85], [0.6, 0.6, 1.7], 0.0, ObjectClass::Pedestrian, score, source)
    };
    let car = |score: f64, source| DetectionBox::new([0.0, 30.0, 0.75], [4.5, 1.8, 1.5], 0.0, ObjectClass::Car, score, source);
    let mut gt = Vec::new();
    let mut fewer = Vec::new();
    let mut more = Vec::new();
    for k in 0..43 {
        let id = format!("{k:03}");
        let x = 2.0 * k as f64;
        gt.push(Frame::new(&id, vec![ped(x, 1.0, Source::GroundTruth), car(1.0, Source::GroundTruth)]));
        let hit = ped(x, 0.5 - 0.001 * k as f64, Source::Lidar);
        let mut a = vec![hit.clone(), car(0.9, Source::Lidar)];
        if k < 7 {
            a.push(ped(x + 50.0, 0.9 - 0.01 * k as f64, Source::Lidar));
        }
        fewer.push(Frame::new(&id, a));
        more.push(Frame::new(&id, vec![hit, car(0.9, Source::Fused)]));
    }
    for (name, frames) in [("gt", &gt), ("single", &fewer), ("fused", &more)] {
        save_frames(&tmp.path().join(format!("{name}.frames")), frames, None).unwrap();
    }
    let out_path = tmp.path().join("eval.json");
    let p = |n: &str| tmp.path().join(n).to_str().unwrap().to_string();
    let out = Command::new(bin())
        .args(["evaluate", "--gt", &p("gt.frames"), "--pred", &p("single.frames"), "--pred", &p("fused.frames")])
        .args(["--out", out_path.to_str().unwrap()])
        .output()
        .unwrap();
    if !out.status.success() {
        return Fail(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    let stdout = String::from_utf8_lossy(&out.stdout);
    let shown = stdout.lines().any(|l| l.starts_with("pedestrian") && l.trim_end().ends_with("+14.0"));
    let text = std::fs::read_to_string(&out_path).unwrap();
    let record = parse_report::<serde_json::Value>(&text, "evaluation").unwrap();
    let delta = record.data["comparison"]["classes"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["class"] == "pedestrian")
        .and_then(|c| c["delta_pp"].as_f64())
        .unwrap_or(f64::NAN);
    check(
        shown && (delta - 14.0).abs() <= 1e-9,
        format!("pedestrian delta {delta:.10} pp, printed in the delta table: {shown}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("solver exactness", solver_exactness),
        ("threshold exactness", threshold_exactness),
        ("beam monotonicity", beam_monotonicity),
        ("IoU oracle", iou_oracle),
        ("fusion conservation", fusion_conservation),
        ("AP oracle", ap_oracle),
        ("end-to-end soundness", end_to_end),
        ("determinism", determinism),
        ("MILP export", milp_cross_check),
        ("AP delta reporting", ap_delta_report),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Fail(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match verdict {
            Pass(d) => ("PASS", d),
            Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Skip(d) => ("SKIP", d),
        };
        println!("criterion {:>2} {tag} {name}: {detail} ({secs:.1} s)", k + 1);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
