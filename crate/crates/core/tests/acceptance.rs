//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runs with `cargo test --test acceptance`.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{all_planted, random_curve, random_equation};
use riccati_lie::criteria::{classify, DEFAULT_TOL};
use riccati_lie::expr::Expr;
use riccati_lie::grid::{max_relative_deviation, Grid};
use riccati_lie::projline::{cross_ratio, mobius_apply, ExtReal, Mat2};
use riccati_lie::riccati::{integrate_direct, max_trajectory_gap, RiccatiEquation, Sample, Trajectory};
use riccati_lie::sl2::{algebra_curve_from_riccati, exp_traceless, integrate_group_equation, reconstruct_solution};
use riccati_lie::solvers::{
    reduce_with_known_solution, solve_autonomous, solve_bernoulli, solve_linear, solve_separable,
    solve_with_two_solutions, superpose_three, SolutionForm,
};
use riccati_lie::transform::{
    compose, gauge_transform_algebra, normalize_negative_determinant, theta_apply, transform_coefficients,
};

const PIPELINE_TOL: f64 = 1e-6;
const DET_TOL: f64 = 1e-9;
const EQUIVARIANCE_TOL: f64 = 1e-6;
const AFFINE_TOL: f64 = 1e-9;
const GAUGE_TOL: f64 = 1e-9;
const CROSS_RATIO_TOL: f64 = 1e-6;
const SUPERPOSITION_TOL: f64 = 1e-7;
const SOLVER_TOL: f64 = 1e-6;
const CONSTANT_TOL: f64 = 1e-9;
const TARGET_TOL: f64 = 1e-8;
const ORACLE_TOL: f64 = 1e-6;
const FLIP_TOL: f64 = 1e-12;
const RATIO_RANGE: (f64, f64) = (12.0, 20.0);

const CASES: usize = 20;
const STEP: f64 = 1e-3;
const POLE_GUARD: f64 = 1e6;
const SEED: u64 = 0x5eed;

struct Outcome {
    passed: bool,
    summary: String,
}

fn outcome(passed: bool, summary: String) -> Outcome {
    Outcome { passed, summary }
}

fn grid() -> Grid {
    Grid::uniform(0.0, 1.0, 101)
}

fn direct(eq: &RiccatiEquation, x0: ExtReal, span: (f64, f64)) -> Trajectory {
    let traj = integrate_direct(eq, x0, span, STEP).unwrap();
    assert!(traj.truncated.is_none(), "oracle stopped: {:?}", traj.truncated);
    traj
}

fn sampled(x: &Expr, times: &[f64]) -> Trajectory {
    let samples = times
        .iter()
        .map(|&t| Sample {
            t,
            x: ExtReal::from_f64(x.eval(t).unwrap()).unwrap_or(ExtReal::Infinity),
        })
        .collect();
    Trajectory::from_samples(samples, 0.0)
}

fn coefficient_gap(a: &RiccatiEquation, b: &RiccatiEquation, grid: &Grid) -> f64 {
    a.coefficients()
        .into_iter()
        .zip(b.coefficients())
        .map(|(x, y)| max_relative_deviation(x, y, grid).unwrap().value)
        .fold(0.0, f64::max)
}

fn pipeline() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut worst, mut worst_det) = (0.0f64, 0.0f64);
    for _ in 0..CASES {
        let eq = random_equation(&mut rng);
        let x0 = ExtReal::Finite(rng.gen_range(-1.0..1.0));
        let group = integrate_group_equation(&algebra_curve_from_riccati(&eq), (0.0, 1.0), STEP).unwrap();
        worst_det = worst_det.max(group.max_det_defect());
        let x = reconstruct_solution(&group, x0);
        worst = worst.max(max_trajectory_gap(&x, &direct(&eq, x0, (0.0, 1.0)), POLE_GUARD));
    }
    outcome(
        worst <= PIPELINE_TOL && worst_det <= DET_TOL,
        format!("{CASES} cases, max gap {worst:.2e} (tol {PIPELINE_TOL:e}), max |det - 1| {worst_det:.2e} (tol {DET_TOL:e})"),
    )
}

fn equivariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let mut worst = 0.0f64;
    for _ in 0..CASES {
        let eq = random_equation(&mut rng);
        let curve = random_curve(&mut rng);
        let x0 = ExtReal::Finite(rng.gen_range(-1.0..1.0));
        let source = direct(&eq, x0, (0.0, 1.0));
        let mapped: Vec<_> = source
            .samples
            .iter()
            .map(|s| Sample {
                t: s.t,
                x: theta_apply(&curve, s.t, s.x).unwrap(),
            })
            .collect();
        let mapped = Trajectory::from_samples(mapped, STEP);
        let image = direct(&transform_coefficients(&eq, &curve), mapped.samples[0].x, (0.0, 1.0));
        worst = worst.max(max_trajectory_gap(&mapped, &image, POLE_GUARD));
    }
    outcome(
        worst <= EQUIVARIANCE_TOL,
        format!("{CASES} (equation, curve) pairs, max gap {worst:.2e} (tol {EQUIVARIANCE_TOL:e})"),
    )
}

fn affine_action() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let g = grid();
    let mut worst = 0.0f64;
    for _ in 0..CASES {
        let eq = random_equation(&mut rng);
        let (c1, c2) = (random_curve(&mut rng), random_curve(&mut rng));
        let sequential = transform_coefficients(&transform_coefficients(&eq, &c1), &c2);
        let product = transform_coefficients(&eq, &compose(&c2, &c1));
        worst = worst.max(coefficient_gap(&sequential, &product, &g));
    }
    outcome(
        worst <= AFFINE_TOL,
        format!("{CASES} cases on 101 points, max coefficient gap {worst:.2e} (tol {AFFINE_TOL:e})"),
    )
}

fn gauge() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let g = grid();
    let mut worst = 0.0f64;
    for _ in 0..CASES {
        let eq = random_equation(&mut rng);
        let curve = random_curve(&mut rng);
        let via_gauge = gauge_transform_algebra(&algebra_curve_from_riccati(&eq), &curve).to_riccati();
        worst = worst.max(coefficient_gap(&via_gauge, &transform_coefficients(&eq, &curve), &g));
    }
    outcome(
        worst <= GAUGE_TOL,
        format!("{CASES} cases, max gap between gauge and coefficient laws {worst:.2e} (tol {GAUGE_TOL:e})"),
    )
}

/// Pushes `x' = 1 - x²` and its solutions `1, -1, tanh(t + 1/2)` through a
/// random curve, giving an equation with three closed-form solutions.
fn equation_with_three_solutions(rng: &mut ChaCha8Rng) -> (RiccatiEquation, [Expr; 3]) {
    let base = RiccatiEquation::constant(1.0, 0.0, -1.0);
    let curve = random_curve(rng);
    let eq = transform_coefficients(&base, &curve);
    let solutions = [Expr::one(), Expr::constant(-1.0), (Expr::t() + 0.5).tanh()]
        .map(|x| (&curve.alpha * &x + &curve.beta) / (&curve.gamma * &x + &curve.delta));
    (eq, solutions)
}

fn superposition() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let g = grid();
    let (mut drift, mut residual) = (0.0f64, 0.0f64);
    for _ in 0..5 {
        let (eq, [x1, x2, x3]) = equation_with_three_solutions(&mut rng);
        let starts = [-0.8, 0.1, 0.7, 2.5];
        let trajs: Vec<_> = starts.iter().map(|&x0| direct(&eq, x0.into(), (0.0, 1.0))).collect();
        let mut k0 = None;
        for i in 0..trajs[0].len() {
            let [x, a, b, c] = [0, 1, 2, 3].map(|j| trajs[j].samples[i].x);
            let Ok(ExtReal::Finite(k)) = cross_ratio(x, a, b, c) else { continue };
            if k.abs() > POLE_GUARD {
                continue;
            }
            match k0 {
                None => k0 = Some(k),
                Some(k0) => drift = drift.max((k - k0).abs() / (1.0 + k0.abs())),
            }
        }
        let x = superpose_three(&x1, &x2, &x3, ExtReal::Finite(-1.0), &g).unwrap();
        let dx = x.differentiate();
        for &t in g.points() {
            let (Ok(v), Ok(dv)) = (x.eval(t), dx.eval(t)) else { continue };
            if !v.is_finite() || v.abs() > POLE_GUARD {
                continue;
            }
            let rhs = eq.rhs(t, v).unwrap();
            residual = residual.max((dv - rhs).abs() / (1.0 + rhs.abs()));
        }
    }
    outcome(
        drift <= CROSS_RATIO_TOL && residual <= SUPERPOSITION_TOL,
        format!(
            "5 equations, cross-ratio drift {drift:.2e} (tol {CROSS_RATIO_TOL:e}), superposition residual {residual:.2e} (tol {SUPERPOSITION_TOL:e})"
        ),
    )
}

fn times(span: (f64, f64)) -> Vec<f64> {
    let n = ((span.1 - span.0) / STEP).round() as usize;
    (0..=n).map(|i| span.0 + i as f64 * (span.1 - span.0) / n as f64).collect()
}

fn solvers() -> Outcome {
    let g = grid();
    let e = common::e;
    let mut worst = 0.0f64;
    let mut examples = 0;
    let mut failures = Vec::new();
    let mut other_failures = Vec::new();
    let mut check = |label: &str, form: SolutionForm, span: (f64, f64), reference: Trajectory| {
        let ts = times(span);
        let traj = form.sample(&ts);
        let gap = if traj.truncated.is_some() { f64::INFINITY } else { max_trajectory_gap(&traj, &reference, POLE_GUARD) };
        if !(gap <= SOLVER_TOL) {
            failures.push(format!("{label}: {gap:.2e}"));
        }
        worst = worst.max(gap);
        examples += 1;
    };
    let exact = |x: &str, span| sampled(&e(x), &times(span));
    let oracle = |eq: &RiccatiEquation, x0: f64, span| direct(eq, x0.into(), span);
    let span1 = (0.0, 1.0);

    let eq = RiccatiEquation::constant(1.0, 0.0, 0.0);
    check("linear t", solve_linear(&eq, 0.0, 0.0.into(), &g).unwrap(), span1, exact("t", span1));
    let eq = RiccatiEquation::constant(0.0, 1.0, 0.0);
    check("linear 2e^t", solve_linear(&eq, 0.0, 2.0.into(), &g).unwrap(), span1, exact("2*exp(t)", span1));
    let eq = RiccatiEquation::parse("t", "1", "0").unwrap();
    let form = solve_linear(&eq, 0.0, 0.0.into(), &g).unwrap();
    let at_one = form.eval_at(1.0).unwrap().finite().unwrap();
    if (at_one - (std::f64::consts::E - 2.0)).abs() > 1e-8 {
        other_failures.push(format!("linear e - 2: {at_one}"));
    }
    check("linear forced", form, span1, exact("exp(t) - t - 1", span1));

    let eq = RiccatiEquation::constant(0.0, 0.0, 1.0);
    check("bernoulli zero", solve_bernoulli(&eq, 0.0, 0.0.into(), &g).unwrap(), span1, exact("0", span1));
    let span = (0.0, 0.9);
    check("bernoulli 1/(1-t)", solve_bernoulli(&eq, 0.0, 1.0.into(), &g).unwrap(), span, exact("1/(1 - t)", span));
    let eq = RiccatiEquation::constant(0.0, 1.0, 1.0);
    let span = (0.0, 0.5);
    check("bernoulli oracle", solve_bernoulli(&eq, 0.0, 1.0.into(), &g).unwrap(), span, oracle(&eq, 1.0, span));

    let tanh_eq = RiccatiEquation::constant(1.0, 0.0, -1.0);
    let form = reduce_with_known_solution(&tanh_eq, &Expr::one(), 0.0, 0.0.into(), &g).unwrap();
    check("one known tanh", form, span1, exact("tanh(t)", span1));
    let form = reduce_with_known_solution(&tanh_eq, &Expr::one(), 0.0, 1.0.into(), &g).unwrap();
    check("one known fixed", form, span1, exact("1", span1));
    let eq = RiccatiEquation::constant(0.0, 1.0, 1.0);
    let span = (0.0, 0.4);
    let form = reduce_with_known_solution(&eq, &Expr::zero(), 0.0, 1.0.into(), &g).unwrap();
    check("one known oracle", form, span, oracle(&eq, 1.0, span));

    let (one, minus_one) = (Expr::one(), Expr::constant(-1.0));
    let form = solve_with_two_solutions(&tanh_eq, &one, &minus_one, 0.0, 1.0.into(), &g).unwrap();
    check("two known fixed", form, span1, exact("1", span1));
    let form = solve_with_two_solutions(&tanh_eq, &one, &minus_one, 0.0, 0.0.into(), &g).unwrap();
    check("two known tanh", form, span1, exact("tanh(t)", span1));
    {
        let (x1, x2, b2) = (e("t"), e("1 + t^2"), e("1 + t"));
        let r1 = x1.differentiate() - &b2 * x1.powi(2);
        let r2 = x2.differentiate() - &b2 * x2.powi(2);
        let b1 = (&r1 - &r2) / (&x1 - &x2);
        let b0 = &r1 - &b1 * &x1;
        let eq = RiccatiEquation::new(b0, b1, b2);
        let form = solve_with_two_solutions(&eq, &x1, &x2, 0.0, 0.5.into(), &g).unwrap();
        check("two known planted", form, span1, oracle(&eq, 0.5, span1));
    }

    let span = (0.0, 0.9);
    check("autonomous double root", solve_autonomous([0.0, 0.0, 1.0], 0.0, 1.0.into()), span, exact("1/(1 - t)", span));
    check("autonomous tanh", solve_autonomous([1.0, 0.0, -1.0], 0.0, 0.0.into()), span1, exact("tanh(t)", span1));
    let span = (0.0, 3.0);
    let tan_form = solve_autonomous([1.0, 0.0, 1.0], 0.0, 0.0.into());
    let tan_oracle = oracle(&RiccatiEquation::constant(1.0, 0.0, 1.0), 0.0, span);
    let crossings = tan_oracle.infinity_crossings();
    if crossings.len() != 1 || (crossings[0] - std::f64::consts::FRAC_PI_2).abs() > 2.0 * STEP {
        other_failures.push(format!("tan crossings {crossings:?}"));
    }
    check("autonomous tan (oracle)", tan_form.clone(), span, tan_oracle);
    check("autonomous tan (exact)", tan_form, span, exact("tan(t)", span));

    let form = solve_separable(&Expr::one(), [1.0, 0.0, -1.0], 0.0, 0.0.into()).unwrap();
    check("separable constant rate", form, span1, exact("tanh(t)", span1));
    let span = (0.0, 0.9);
    let form = solve_separable(&e("2*t"), [0.0, 0.0, 1.0], 0.0, 1.0.into()).unwrap();
    check("separable 1/(1-t^2)", form, span, exact("1/(1 - t^2)", span));
    let span = (0.0, 2.0);
    let form = solve_separable(&e("cos(t)"), [1.0, 0.0, -1.0], 0.0, 0.0.into()).unwrap();
    check("separable tanh(sin t)", form, span, exact("tanh(sin(t))", span));

    failures.extend(other_failures);
    let passed = failures.is_empty();
    let mut summary = format!("{} solver examples, max gap {worst:.2e} (tol {SOLVER_TOL:e}), tan crossing at pi/2", examples);
    if !passed {
        summary.push_str(&format!("; failing: {}", failures.join(", ")));
    }
    outcome(passed, summary)
}

fn detectors() -> Outcome {
    let g = grid();
    let (mut constants, mut target, mut pulled) = (0.0f64, 0.0f64, 0.0f64);
    let mut failures = Vec::new();
    let planted = all_planted();
    for p in &planted {
        let reports = classify(&p.eq, &g, DEFAULT_TOL, &p.hints);
        let Some(report) = reports.iter().rev().find(|r| r.name == p.name && r.satisfied) else {
            failures.push(format!("{} not detected", p.name));
            continue;
        };
        for (key, want) in &p.expected {
            constants = constants.max((report.constants[*key] - want).abs());
        }
        let reduction = report.reduction.as_ref().unwrap();
        target = target.max(coefficient_gap(&transform_coefficients(&p.eq, &reduction.curve), &reduction.target, &g));
        match report.solve(0.0, p.x0.into(), &g) {
            Ok(form) => pulled = pulled.max(common::oracle_gap(&p.eq, p.x0, &form)),
            Err(e) => failures.push(format!("{}: {e}", p.name)),
        }
    }
    let passed = failures.is_empty() && constants <= CONSTANT_TOL && target <= TARGET_TOL && pulled <= ORACLE_TOL;
    let mut summary = format!(
        "{} planted instances (9 detectors + 6 table rows), constants {constants:.2e} (tol {CONSTANT_TOL:e}), target {target:.2e} (tol {TARGET_TOL:e}), oracle {pulled:.2e} (tol {ORACLE_TOL:e})",
        planted.len()
    );
    if !failures.is_empty() {
        summary.push_str(&format!("; {}", failures.join(", ")));
    }
    outcome(passed, summary)
}

fn negative_determinant() -> Outcome {
    let g = grid();
    let e = common::e;
    let cases: [[Expr; 4]; 5] = [
        [e("-1"), e("0"), e("0"), e("1")],
        [e("0"), e("1"), e("1"), e("0")],
        [e("-exp(t)"), e("0"), e("0"), e("exp(-t)")],
        [e("t"), e("1 + t^2"), e("1"), e("t")],
        [e("cos(t)"), e("sin(t)"), e("sin(t)"), e("-cos(t)")],
    ];
    let points = [-2.0, -0.5, 0.0, 0.3, 1.7, 4.0];
    let mut worst = 0.0f64;
    let mut all_flipped = true;
    for entries in cases {
        let (flip, curve) = normalize_negative_determinant(entries.clone(), &g).unwrap();
        all_flipped &= flip;
        for &t in g.points() {
            let h = Mat2::new(
                entries[0].eval(t).unwrap(),
                entries[1].eval(t).unwrap(),
                entries[2].eval(t).unwrap(),
                entries[3].eval(t).unwrap(),
            );
            for &y in &points {
                let original = mobius_apply(&h, ExtReal::Finite(y)).unwrap();
                let factored = theta_apply(&curve, t, ExtReal::Finite(-y)).unwrap();
                worst = worst.max(original.chordal_distance(factored));
            }
        }
    }
    outcome(
        all_flipped && worst <= FLIP_TOL,
        format!("5 det = -1 homographies, max chordal gap of c(flip(y)) vs h(y) {worst:.2e} (tol {FLIP_TOL:e})"),
    )
}

fn convergence() -> Outcome {
    // x' = (1 + t)(1 - x²), x(0) = 0 has x = tanh(t + t²/2); the group
    // solution is exp(τ(t) N) with N = M0 - M2.
    let eq = RiccatiEquation::parse("1 + t", "0", "-1 - t").unwrap();
    let span = (0.0, 1.0);
    let tau: f64 = 1.5;
    let exact_x = tau.tanh();
    let exact_g = exp_traceless(&Mat2::M0.add(&Mat2::M2.scale(-1.0)).scale(tau));
    let direct_err = |h: f64| {
        let x = integrate_direct(&eq, 0.0.into(), span, h).unwrap().last().unwrap().x.finite().unwrap();
        (x - exact_x).abs()
    };
    let group_err = |h: f64| {
        let gt = integrate_group_equation(&algebra_curve_from_riccati(&eq), span, h).unwrap();
        gt.samples.last().unwrap().1.max_abs_diff(&exact_g)
    };
    let h = 0.05;
    let r_direct = direct_err(h) / direct_err(h / 2.0);
    let r_group = group_err(h) / group_err(h / 2.0);
    let inside = |r: f64| (RATIO_RANGE.0..=RATIO_RANGE.1).contains(&r);
    outcome(
        inside(r_direct) && inside(r_group),
        format!(
            "error ratio h = {h} vs h/2: direct {r_direct:.2}, group {r_group:.2} (range [{}, {}])",
            RATIO_RANGE.0, RATIO_RANGE.1
        ),
    )
}

fn cli_determinism() -> Outcome {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("problems");
    let mut problems: Vec<_> = std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    problems.sort();
    let tmp = tempfile::tempdir().unwrap();
    let snapshot = |cmd: &str, problem: &Path, out: &Path| {
        let output = Command::new(env!("CARGO_BIN_EXE_riccati"))
            .arg(cmd)
            .arg(problem)
            .arg("--output")
            .arg(out)
            .output()
            .unwrap();
        let mut files: Vec<_> = std::fs::read_dir(out)
            .unwrap()
            .map(|e| {
                let p = e.unwrap().path();
                (p.file_name().unwrap().to_owned(), std::fs::read(&p).unwrap())
            })
            .collect();
        files.sort();
        (output.status.code(), output.stdout, files)
    };
    let mut runs = 0;
    let mut mismatches = Vec::new();
    for problem in &problems {
        for cmd in ["classify", "solve", "verify"] {
            let a = snapshot(cmd, problem, &tmp.path().join(format!("{runs}a")));
            let b = snapshot(cmd, problem, &tmp.path().join(format!("{runs}b")));
            if a != b || a.0 != Some(0) {
                mismatches.push(format!("{cmd} {}", problem.file_name().unwrap().to_string_lossy()));
            }
            runs += 1;
        }
    }
    outcome(
        mismatches.is_empty(),
        format!(
            "{} bundled problems x 3 commands, byte-identical JSON/CSV across repeated runs{}",
            problems.len(),
            if mismatches.is_empty() { String::new() } else { format!("; differing: {}", mismatches.join(", ")) }
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("group pipeline vs direct integration", pipeline),
        ("solution equivariance under curves", equivariance),
        ("affine action of composed curves", affine_action),
        ("gauge law vs coefficient law", gauge),
        ("cross-ratio and superposition", superposition),
        ("quadrature solvers", solvers),
        ("integrability detectors", detectors),
        ("negative-determinant normalization", negative_determinant),
        ("RK4 convergence order", convergence),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !result.passed {
            failed += 1;
        }
        println!(
            "{} {:>2}. {name}: {} [{:.1}s]",
            if result.passed { "PASS" } else { "FAIL" },
            i + 1,
            result.summary,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
