//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary so the
//! lines are always printed.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use metpath::checks::{
    analyze_composition, check_banach_zarecki, check_fundamental_lemma, check_variation_identity,
    zero_set, CheckOptions,
};
use metpath::derivative::{md_profile, metric_derivative, MdStatus, StepSchedule};
use metpath::fixtures::{fixture, Fixture, Params};
use metpath::ingest::parse_csv_path;
use metpath::measures::{
    default_delta_schedule, hausdorff_length, outer_measure, Integrability, IntervalUnion,
};
use metpath::metric::{kuratowski_embed, snowflake, MetricSpace, Point};
use metpath::numeric::{uniform_grid, Status};
use metpath::path::RealFunction;
use metpath::report::{to_json, Verdict};
use metpath::variation::{partition_sum, variation, variation_function, Partition};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn build(name: &str) -> Fixture {
    fixture(name, &Params::new()).expect("catalog fixture")
}

fn opts() -> CheckOptions {
    CheckOptions {
        max_level: 14,
        grid_cells: 1 << 12,
        ..CheckOptions::default()
    }
}

/// Composite Simpson rule, an oracle independent of the toolkit's grids.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, cells: usize) -> f64 {
    let h = (b - a) / cells as f64;
    let mut s = f(a) + f(b);
    for i in 1..cells {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Speed of the unit circle in the sup-norm embedding over `n` anchors on
/// the circle: the largest rate of change of the distance to an anchor.
fn helix_speed(t: f64, n: usize) -> f64 {
    let (c, s) = (t.cos(), t.sin());
    (0..n)
        .map(|k| {
            let th = 2.0 * PI * k as f64 / n as f64;
            let (dx, dy) = (c - th.cos(), s - th.sin());
            let r = dx.hypot(dy);
            if r < 1e-12 {
                1.0
            } else {
                (-dx * s + dy * c).abs() / r
            }
        })
        .fold(0.0, f64::max)
}

fn variation_identity() -> Outcome {
    let oracles: [(&str, f64); 4] = [
        ("segment", 2.0),
        ("circle", 2.0 * PI),
        ("sqrt", 1.0),
        (
            "helix_embedded",
            simpson(|t| helix_speed(t, 64), 0.0, 2.0 * PI, 1 << 16),
        ),
    ];
    let mut lines = Vec::new();
    for (name, oracle) in oracles {
        let f = build(name);
        let start = Instant::now();
        let r =
            check_variation_identity(&f.path, Some(&f.meta), &opts()).map_err(|e| e.to_string())?;
        let took = start.elapsed();
        let rel = (r.lhs - r.rhs).abs() / r.rhs;
        ensure(rel <= 1e-3, || format!("{name}: |∫md − V|/V = {rel:e}"))?;
        ensure((r.rhs - oracle).abs() <= 1e-3 * oracle, || {
            format!("{name}: V = {} but oracle {oracle}", r.rhs)
        })?;
        ensure(r.verdict == Verdict::Holds, || {
            format!("{name}: verdict {:?}", r.verdict)
        })?;
        ensure(took <= Duration::from_secs(10), || {
            format!("{name}: took {took:?}")
        })?;
        lines.push(format!("{name} rel={rel:.1e} {:.2}s", took.as_secs_f64()));
    }
    Ok(lines.join(", "))
}

fn strict_gap() -> Outcome {
    let c = build("cantor");
    let o = opts();
    let var = variation(&c.path, o.variation_tol, 14).map_err(|e| e.to_string())?;
    ensure((var.value - 1.0).abs() <= 1e-6, || {
        format!("V = {}", var.value)
    })?;
    let r = check_variation_identity(&c.path, Some(&c.meta), &o).map_err(|e| e.to_string())?;
    ensure(r.lhs <= 0.05, || format!("∫md = {}", r.lhs))?;
    let bz = check_banach_zarecki(&c.path, &c.meta, &o).map_err(|e| e.to_string())?;
    ensure(bz.verdict == Verdict::Holds, || {
        format!("banach_zarecki {:?}", bz.verdict)
    })?;
    ensure(bz.params["failing_legs"] == json!(["property_n"]), || {
        format!("failing legs {}", bz.params["failing_legs"])
    })?;
    Ok(format!("V={} ∫md={:e}", var.value, r.lhs))
}

fn random_union(rng: &mut ChaCha8Rng, a: f64, b: f64) -> IntervalUnion {
    let k = rng.gen_range(1..=4);
    let mut cuts: Vec<f64> = (0..2 * k).map(|_| rng.gen_range(a..b)).collect();
    cuts.sort_by(f64::total_cmp);
    let pieces = cuts
        .chunks(2)
        .filter(|w| w[1] - w[0] > 1e-9)
        .map(|w| (w[0], w[1]))
        .collect();
    IntervalUnion::merged(pieces).expect("sorted pieces")
}

fn fundamental_lemma() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let o = opts();
    let mut worst = f64::INFINITY;
    for (i, name) in ["segment", "circle"].iter().cycle().take(20).enumerate() {
        let f = build(name);
        let grid = uniform_grid(f.path.a(), f.path.b(), o.grid_cells);
        let profile = md_profile(&f.path, &grid, &o.schedule).map_err(|e| e.to_string())?;
        ensure(
            profile.iter().all(|e| e.status == MdStatus::Converged),
            || format!("{name}: md unsettled"),
        )?;
        let k = 1.001 * profile.iter().map(|e| e.value).fold(0.0, f64::max);
        let e = random_union(&mut rng, f.path.a(), f.path.b());
        let r = check_fundamental_lemma(&f.path, &e, k, &o).map_err(|e| e.to_string())?;
        let bound = k * outer_measure(&e) * (1.0 + 1e-3);
        ensure(r.verdict == Verdict::Holds && r.lhs <= bound, || {
            format!(
                "case {i} ({name}, {e:?}): {:?} H¹={} bound={bound}",
                r.verdict, r.lhs
            )
        })?;
        worst = worst.min(bound - r.lhs);
    }
    Ok(format!("20 unions, smallest margin {worst:.3e}"))
}

fn sard() -> Outcome {
    let f = build("segment_hold");
    let o = opts();
    let e0 = zero_set(&f.path, &o).map_err(|e| e.to_string())?;
    let m = outer_measure(&e0);
    ensure(
        m >= 0.99 && e0.components().iter().all(|c| c.0 >= 1.0),
        || format!("E₀ = {e0:?}"),
    )?;
    let sched = default_delta_schedule(&f.path, &e0).map_err(|e| e.to_string())?;
    let h = hausdorff_length(&f.path, &e0, &sched).map_err(|e| e.to_string())?;
    ensure(h.status == Status::Converged && h.upper <= 1e-6, || {
        format!("H¹(f(E₀)) = {}", h.upper)
    })?;
    Ok(format!("m(E₀)={m:.4} H¹={:e}", h.upper))
}

fn vallee_poussin_positive() -> Outcome {
    let c = build("circle");
    let g = RealFunction::square(0.0, 1.0).map_err(|e| e.to_string())?;
    let an = analyze_composition(&c.path, &g, &opts()).map_err(|e| e.to_string())?;
    let est = &an.integral.estimate;
    ensure(est.flag == Integrability::Integrable, || {
        format!("flag {:?}", est.flag)
    })?;
    ensure((est.value - 1.0).abs() <= 1e-3, || {
        format!("∫h = {}", est.value)
    })?;
    ensure((est.value - an.variation.value).abs() <= 1e-3, || {
        format!("∫h = {} but V(f∘g) = {}", est.value, an.variation.value)
    })?;
    Ok(format!("∫h={:.6} V={:.6}", est.value, an.variation.value))
}

fn vallee_poussin_negative() -> Outcome {
    let run = || -> Result<String, String> {
        let vp = build("vp_pair");
        let comp = vp.composition.expect("composition fixture");
        let r = metpath::checks::check_composition(
            &comp.outer,
            Some(&comp.outer_meta),
            &comp.inner,
            &opts(),
        )
        .map_err(|e| e.to_string())?;
        ensure(r.params["h_integrability"] == "non_integrable", || {
            format!("h {}", r.params["h_integrability"])
        })?;
        ensure(r.params["variation_status"] == "diverging", || {
            format!("variation {}", r.params["variation_status"])
        })?;
        ensure(r.verdict == Verdict::Holds, || {
            format!("verdict {:?}", r.verdict)
        })?;
        Ok(to_json(&[r]))
    };
    let (first, second) = (run()?, run()?);
    ensure(first == second, || "reports differ between runs".into())?;
    Ok("non_integrable and diverging, identical reports".into())
}

fn chain_rule() -> Outcome {
    let c = build("circle");
    let mut parts = Vec::new();
    for (label, g) in [
        ("g=2x", RealFunction::affine(0.0, PI, 2.0, 0.0)),
        ("g=-x", RealFunction::affine(-2.0 * PI, 0.0, -1.0, 0.0)),
    ] {
        let g = g.map_err(|e| e.to_string())?;
        let an = analyze_composition(&c.path, &g, &opts()).map_err(|e| e.to_string())?;
        ensure(an.chain_rule_points == 100, || {
            format!("{label}: {} points", an.chain_rule_points)
        })?;
        ensure(an.chain_rule_max_deviation <= 1e-5, || {
            format!("{label}: deviation {:e}", an.chain_rule_max_deviation)
        })?;
        ensure(an.differentiability_failures == 0, || {
            format!("{label}: {} failures", an.differentiability_failures)
        })?;
        parts.push(format!("{label} dev={:.1e}", an.chain_rule_max_deviation));
    }
    Ok(parts.join(", "))
}

/// Largest partition sum over all subsets of the knots that keep both ends.
fn exhaustive_oracle(pts: &[Vec<f64>], space: &MetricSpace) -> f64 {
    let n = pts.len();
    let d = |i: usize, j: usize| space.distance(&pts[i], &pts[j]).unwrap();
    if n <= 14 {
        let inner = n - 2;
        let mut best = 0.0f64;
        for mask in 0u32..(1 << inner) {
            let mut idx = vec![0];
            idx.extend((0..inner).filter(|b| mask >> b & 1 == 1).map(|b| b + 1));
            idx.push(n - 1);
            best = best.max(idx.windows(2).map(|w| d(w[0], w[1])).sum());
        }
        best
    } else {
        // Longest chain through increasing knot indices.
        let mut best = vec![0.0f64; n];
        for j in 1..n {
            best[j] = (0..j)
                .map(|i| best[i] + d(i, j))
                .fold(f64::NEG_INFINITY, f64::max);
        }
        best[n - 1]
    }
}

fn csv_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(64);
    // Integer offsets and 3-4-5 steps keep every chord and partial sum exact.
    let steps: [[f64; 2]; 8] = [
        [3.0, 4.0],
        [-3.0, 4.0],
        [4.0, -3.0],
        [0.0, 5.0],
        [-5.0, 0.0],
        [0.0, 0.0],
        [6.0, 8.0],
        [-4.0, -3.0],
    ];
    let mut cases = 0;
    for trial in 0..60 {
        let n = if trial < 40 {
            rng.gen_range(2..=14)
        } else {
            rng.gen_range(15..=64)
        };
        let dim = if trial % 2 == 0 { 1 } else { 2 };
        let mut t = 0.0;
        let mut x = vec![0.0; dim];
        let mut text = format!(
            "t,{}\n",
            (1..=dim)
                .map(|i| format!("x{i}"))
                .collect::<Vec<_>>()
                .join(",")
        );
        let mut pts = Vec::new();
        for _ in 0..n {
            t += rng.gen_range(1..=5) as f64 * 0.25;
            text.push_str(&format!(
                "{t},{}\n",
                x.iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            ));
            pts.push(x.clone());
            if dim == 1 {
                x[0] += rng.gen_range(-7i32..=7) as f64;
            } else {
                let s = steps[rng.gen_range(0..steps.len())];
                x[0] += s[0];
                x[1] += s[1];
            }
        }
        let path = parse_csv_path(text.as_bytes()).map_err(|e| e.to_string())?;
        let v = variation(&path, 1e-6, 14).map_err(|e| e.to_string())?;
        let oracle = exhaustive_oracle(&pts, &MetricSpace::euclidean(dim));
        ensure(v.value == oracle, || {
            format!("trial {trial}: {} vs oracle {oracle}", v.value)
        })?;
        cases += 1;
    }
    Ok(format!("{cases} sampled paths match exactly"))
}

fn random_point(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-10.0..10.0)).collect()
}

fn invariant_suites() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    // Metric axioms, 10⁴ triples per space.
    let anchors: Vec<Point> = (0..5)
        .map(|_| Point::new(random_point(&mut rng, 3)))
        .collect();
    let emb = kuratowski_embed(&MetricSpace::euclidean(3), &anchors).map_err(|e| e.to_string())?;
    let spaces = [
        MetricSpace::euclidean(3),
        MetricSpace::sup_norm(3),
        snowflake(&MetricSpace::euclidean(3), 0.5).map_err(|e| e.to_string())?,
        emb.target().clone(),
    ];
    for space in &spaces {
        for _ in 0..10_000 {
            let dim = space.dim();
            let (p, q, r) = (
                random_point(&mut rng, dim),
                random_point(&mut rng, dim),
                random_point(&mut rng, dim),
            );
            let d = |x: &[f64], y: &[f64]| space.distance(x, y).unwrap();
            let (pq, qp, pr, rq) = (d(&p, &q), d(&q, &p), d(&p, &r), d(&r, &q));
            ensure(d(&p, &p) == 0.0 && pq >= 0.0 && pq == qp, || {
                format!("{space:?}: symmetry/identity")
            })?;
            ensure(pq <= (pr + rq) * (1.0 + 1e-12), || {
                format!("{space:?}: triangle {pq} > {pr} + {rq}")
            })?;
        }
    }

    // Kuratowski anchor isometry.
    let mut worst = 0.0f64;
    for i in 0..anchors.len() {
        for j in 0..anchors.len() {
            let (u, v) = (emb.map(&anchors[i]).unwrap(), emb.map(&anchors[j]).unwrap());
            let orig = MetricSpace::euclidean(3)
                .distance(&anchors[i], &anchors[j])
                .unwrap();
            worst = worst.max((emb.target().distance(&u, &v).unwrap() - orig).abs());
        }
    }
    ensure(worst <= 1e-12, || {
        format!("anchor isometry error {worst:e}")
    })?;

    // Refinement monotonicity, exact.
    let circle = build("circle");
    for _ in 0..500 {
        let mut knots: Vec<f64> = (0..rng.gen_range(2..20))
            .map(|_| rng.gen_range(0.0..2.0 * PI))
            .collect();
        knots.extend([0.0, 2.0 * PI]);
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        let coarse = Partition::new(knots.clone()).unwrap();
        knots.push(rng.gen_range(0.0..2.0 * PI));
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        let fine = Partition::new(knots).unwrap();
        let (s0, s1) = (
            partition_sum(&circle.path, &coarse).unwrap(),
            partition_sum(&circle.path, &fine).unwrap(),
        );
        ensure(s1 >= s0, || {
            format!("refinement decreased the sum: {s1} < {s0}")
        })?;
    }

    // v_f monotone, bounded below by chords and above by the speed.
    let tol = 1e-6;
    for (name, speed) in [("circle", 1.0), ("segment", 1.0), ("helix_embedded", 1.0)] {
        let f = build(name);
        let grid = uniform_grid(f.path.a(), f.path.b(), 256);
        let vf = variation_function(&f.path, &grid, tol).unwrap();
        for w in vf.points.windows(2) {
            let ((s, vs), (t, vt)) = (w[0], w[1]);
            let chord = f.path.gap(s, t).unwrap();
            ensure(vt >= vs, || format!("{name}: v_f decreases at {t}"))?;
            ensure(chord <= vt - vs + 2.0 * tol, || {
                format!("{name}: chord above v_f increment at {t}")
            })?;
            ensure(vt - vs <= speed * (t - s) + 2.0 * tol, || {
                format!("{name}: v_f not 1-Lipschitz at {t}")
            })?;
        }
    }

    // md nonnegativity, exact.
    let schedule = StepSchedule::default();
    for name in metpath::fixtures::FIXTURE_NAMES {
        let f = build(name);
        for _ in 0..20 {
            let x = rng.gen_range(f.path.a()..=f.path.b());
            let e = metric_derivative(&f.path, x, &schedule).unwrap();
            ensure(e.value >= 0.0 || e.value.is_nan(), || {
                format!("{name}: md({x}) = {}", e.value)
            })?;
            ensure(e.step_trace.iter().all(|p| p.1 >= 0.0), || {
                format!("{name}: negative quotient at {x}")
            })?;
        }
    }
    let took = start.elapsed();
    ensure(took <= Duration::from_secs(120), || {
        format!("took {took:?}")
    })?;
    Ok(format!("{:.2}s", took.as_secs_f64()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("variation identity on smooth fixtures", variation_identity),
        ("strict-gap witness (cantor)", strict_gap),
        ("fundamental lemma on random unions", fundamental_lemma),
        ("sard on segment then hold", sard),
        ("composition, positive case", vallee_poussin_positive),
        ("composition, negative case", vallee_poussin_negative),
        ("chain rule spot checks", chain_rule),
        ("csv variation equals exhaustive oracle", csv_oracle),
        ("invariant suites", invariant_suites),
    ];
    let results: Vec<(&str, Outcome)> = std::thread::scope(|s| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|&(name, f)| (name, s.spawn(f)))
            .collect();
        handles
            .into_iter()
            .map(|(name, h)| (name, h.join().unwrap_or_else(|_| Err("panicked".into()))))
            .collect()
    });
    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
