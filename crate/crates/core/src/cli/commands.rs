use std::path::Path;

use log::{info, warn};
use serde::Serialize;

use super::json::{self, Header, Num, Point, ReportJson};
use super::problem::{Options, Problem};
use super::CliError;
use crate::criteria::{classify, CriterionName, CriterionReport, DetectionMode};
use crate::expr::Expr;
use crate::grid::{max_relative_deviation, relative_gap, Grid};
use crate::projline::{cross_ratio, ExtReal};
use crate::riccati::{integrate_direct, max_trajectory_gap, step_count, RiccatiEquation, Sample, Trajectory};
use crate::sl2::{algebra_curve_from_riccati, integrate_group_equation, reconstruct_solution};
use crate::solvers::{
    reduce_with_known_solution, solve_bernoulli, solve_linear, solve_with_two_solutions, superpose_three,
    verify_solution, SolutionForm,
};
use crate::transform::{compose, gauge_transform_algebra, theta_apply, transform_coefficients, CurveSL2};

/// Trajectory comparisons ignore samples beyond this magnitude.
const POLE_GUARD: f64 = 1e6;
const ORACLE_TOL: f64 = 1e-6;
const GAUGE_TOL: f64 = 1e-9;
const UNIMODULAR_TOL: f64 = 1e-9;
const SUPERPOSITION_TOL: f64 = 1e-7;

/// What a command produced: the JSON document and any extra files, all
/// written under the output directory.
pub struct Output {
    pub file_name: &'static str,
    pub json: String,
    pub extra_files: Vec<(String, String)>,
    pub passed: bool,
}

impl Output {
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let write = |name: &str, content: &str| {
            let path = dir.join(name);
            std::fs::write(&path, content).map_err(|source| CliError::Write {
                path: path.display().to_string(),
                source,
            })
        };
        std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
            path: dir.display().to_string(),
            source,
        })?;
        for (name, content) in &self.extra_files {
            write(name, content)?;
        }
        write(self.file_name, &self.json)
    }
}

fn detection_grid(problem: &Problem, o: &Options) -> Grid {
    Grid::uniform(problem.interval.0, problem.interval.1, o.grid)
}

fn run_classify(problem: &Problem, o: &Options) -> Vec<CriterionReport> {
    let reports = classify(&problem.equation, &detection_grid(problem, o), o.tol, &problem.hints);
    for r in &reports {
        info!(
            "{} ({}): {}",
            r.name,
            r.mode,
            if r.satisfied { "satisfied" } else { r.diagnostics.reason.as_deref().unwrap_or("unsatisfied") }
        );
    }
    reports
}

#[derive(Serialize)]
struct ClassifyJson {
    #[serde(flatten)]
    header: Header,
    satisfied: Vec<String>,
    reports: Vec<ReportJson>,
}

pub fn cmd_classify(problem: &Problem, o: &Options, only: Option<CriterionName>) -> Output {
    let reports: Vec<_> = run_classify(problem, o)
        .into_iter()
        .filter(|r| only.is_none_or(|n| r.name == n))
        .collect();
    let doc = ClassifyJson {
        header: Header::new("classify", &problem.equation, problem.interval, o),
        satisfied: reports.iter().filter(|r| r.satisfied).map(|r| r.name.to_string()).collect(),
        reports: reports.iter().map(Into::into).collect(),
    };
    Output {
        file_name: "classify.json",
        json: json::to_string(&doc),
        extra_files: Vec::new(),
        passed: true,
    }
}

/// Sample times of the direct integrator for the problem interval.
fn sample_times(problem: &Problem, step: f64) -> Result<Vec<f64>, CliError> {
    let (ta, tb) = problem.interval;
    let n = step_count(ta, tb, step).map_err(|e| CliError::Invalid(e.to_string()))?;
    let h = (tb - ta) / n as f64;
    Ok((0..=n).map(|i| if i == n { tb } else { ta + i as f64 * h }).collect())
}

/// How solutions are produced for every initial condition.
enum Method<'a> {
    Criterion(&'a CriterionReport),
    Linear,
    Bernoulli,
    OneKnown(&'a Expr),
    TwoKnown(&'a Expr, &'a Expr),
    Direct,
}

impl Method<'_> {
    fn label(&self) -> String {
        match self {
            Method::Criterion(r) => format!("criterion:{}", r.name),
            Method::Linear => "linear".into(),
            Method::Bernoulli => "bernoulli".into(),
            Method::OneKnown(_) => "one_known_solution".into(),
            Method::TwoKnown(..) => "two_known_solutions".into(),
            Method::Direct => "direct_integration".into(),
        }
    }

    fn solve(&self, eq: &RiccatiEquation, t0: f64, x0: ExtReal, grid: &Grid) -> Result<SolutionForm, String> {
        let r = match self {
            Method::Criterion(r) => return r.solve(t0, x0, grid).map_err(|e| e.to_string()),
            Method::Linear => solve_linear(eq, t0, x0, grid),
            Method::Bernoulli => solve_bernoulli(eq, t0, x0, grid),
            Method::OneKnown(x1) => reduce_with_known_solution(eq, x1, t0, x0, grid),
            Method::TwoKnown(x1, x2) => solve_with_two_solutions(eq, x1, x2, t0, x0, grid),
            Method::Direct => unreachable!("direct integration has no closed form"),
        };
        r.map_err(|e| e.to_string())
    }
}

fn choose_method<'a>(
    problem: &'a Problem,
    reports: &'a [CriterionReport],
    grid: &Grid,
    criterion: Option<CriterionName>,
) -> Result<Method<'a>, CliError> {
    if let Some(name) = criterion {
        return reports
            .iter()
            .find(|r| r.name == name && r.satisfied)
            .map(Method::Criterion)
            .ok_or_else(|| CliError::Invalid(format!("criterion {name} is not satisfied by this equation")));
    }
    if let Some(r) = reports.iter().find(|r| r.satisfied) {
        return Ok(Method::Criterion(r));
    }
    let eq = &problem.equation;
    let t0 = problem.interval.0;
    if solve_linear(eq, t0, ExtReal::Finite(0.0), grid).is_ok() {
        return Ok(Method::Linear);
    }
    if solve_bernoulli(eq, t0, ExtReal::Finite(0.0), grid).is_ok() {
        return Ok(Method::Bernoulli);
    }
    let mut known = Vec::new();
    for (i, x) in problem.known_solutions.iter().enumerate() {
        verify_solution(eq, x, grid).map_err(|e| CliError::Invalid(format!("known_solutions[{i}]: {e}")))?;
        known.push(x);
    }
    Ok(match known.as_slice() {
        [] => Method::Direct,
        [x1] => Method::OneKnown(x1),
        [x1, x2, ..] => Method::TwoKnown(x1, x2),
    })
}

#[derive(Serialize)]
struct ClosedFormJson {
    numerator: String,
    denominator: String,
}

#[derive(Serialize)]
struct TrajectoryJson {
    x0: Point,
    method: String,
    file: String,
    samples: usize,
    x_end: Option<Point>,
    solution: Option<ClosedFormJson>,
    infinity_crossings: Vec<Num>,
    fallback_reason: Option<String>,
    truncated: Option<String>,
}

#[derive(Serialize)]
struct SolveJson {
    #[serde(flatten)]
    header: Header,
    method: String,
    no_reduction_found: bool,
    trajectories: Vec<TrajectoryJson>,
    reports: Vec<ReportJson>,
}

pub fn cmd_solve(problem: &Problem, o: &Options, criterion: Option<CriterionName>) -> Result<Output, CliError> {
    let reports = run_classify(problem, o);
    let grid = detection_grid(problem, o);
    let method = choose_method(problem, &reports, &grid, criterion)?;
    let no_reduction_found = matches!(method, Method::Direct);
    if no_reduction_found {
        warn!("no reduction found; falling back to direct integration");
    } else {
        info!("solving by {}", method.label());
    }
    let times = sample_times(problem, o.step)?;
    let (ta, tb) = problem.interval;
    let eq = &problem.equation;

    let mut trajectories = Vec::new();
    let mut files = Vec::new();
    for (i, &x0) in problem.initial_conditions.iter().enumerate() {
        let mut fallback_reason = None;
        let closed = match method {
            Method::Direct => None,
            _ => match method.solve(eq, ta, x0, &grid) {
                Ok(form) => Some(form),
                Err(e) => {
                    warn!("initial condition {i}: {e}; integrating directly");
                    fallback_reason = Some(e);
                    None
                }
            },
        };
        let (traj, label, solution) = match &closed {
            Some(form) => {
                let solution = form.homogeneous().map(|(n, d)| ClosedFormJson {
                    numerator: n.to_string(),
                    denominator: d.to_string(),
                });
                (form.sample(&times), method.label(), solution)
            }
            None => {
                let traj = integrate_direct(eq, x0, (ta, tb), o.step).map_err(|e| CliError::Invalid(e.to_string()))?;
                (traj, "direct_integration".to_string(), None)
            }
        };
        let file = format!("trajectory_{i}.csv");
        trajectories.push(TrajectoryJson {
            x0: Point(x0),
            method: label,
            file: file.clone(),
            samples: traj.len(),
            x_end: traj.last().map(|s| Point(s.x)),
            solution,
            infinity_crossings: traj.infinity_crossings().into_iter().map(Num).collect(),
            fallback_reason,
            truncated: traj.truncated.as_ref().map(ToString::to_string),
        });
        files.push((file, traj.to_csv()));
    }
    let doc = SolveJson {
        header: Header::new("solve", eq, problem.interval, o),
        method: method.label(),
        no_reduction_found,
        trajectories,
        reports: reports.iter().map(Into::into).collect(),
    };
    Ok(Output {
        file_name: "solve.json",
        json: json::to_string(&doc),
        extra_files: files,
        passed: true,
    })
}

#[derive(Serialize)]
struct CheckJson {
    name: String,
    max_deviation: Option<Num>,
    at: Option<Num>,
    tolerance: Num,
    passed: bool,
    detail: Option<String>,
}

struct Check {
    name: String,
    deviation: Option<f64>,
    at: Option<f64>,
    tolerance: f64,
    detail: Option<String>,
}

impl Check {
    fn new(name: impl Into<String>, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            deviation: Some(0.0),
            at: None,
            tolerance,
            detail: None,
        }
    }

    fn record(&mut self, value: f64, at: Option<f64>) {
        if let Some(d) = self.deviation {
            if value > d || value.is_nan() {
                self.deviation = Some(value);
                self.at = at;
            }
        }
    }

    fn fail(&mut self, detail: impl Into<String>) {
        self.deviation = None;
        self.detail = Some(detail.into());
    }

    fn passed(&self) -> bool {
        self.deviation.is_some_and(|d| d <= self.tolerance)
    }

    fn to_json(&self) -> CheckJson {
        CheckJson {
            name: self.name.clone(),
            max_deviation: json::opt(self.deviation),
            at: json::opt(self.at),
            tolerance: Num(self.tolerance),
            passed: self.passed(),
            detail: self.detail.clone(),
        }
    }
}

#[derive(Serialize)]
struct VerifyJson {
    #[serde(flatten)]
    header: Header,
    passed: bool,
    checks: Vec<CheckJson>,
}

fn oracle(eq: &RiccatiEquation, x0: ExtReal, span: (f64, f64), step: f64) -> Result<Trajectory, String> {
    let traj = integrate_direct(eq, x0, span, step).map_err(|e| e.to_string())?;
    match &traj.truncated {
        Some(e) => Err(format!("direct integration stopped: {e}")),
        None => Ok(traj),
    }
}

fn report_key(r: &CriterionReport) -> String {
    match r.mode {
        DetectionMode::Discovery => r.name.to_string(),
        DetectionMode::Hinted => format!("{}[hinted]", r.name),
    }
}

/// Θ(c, ·) maps oracle solutions of `eq` onto oracle solutions of the
/// transformed equation.
fn equivariance(
    check: &mut Check,
    eq: &RiccatiEquation,
    curve: &CurveSL2,
    target: &RiccatiEquation,
    x0s: &[ExtReal],
    span: (f64, f64),
    step: f64,
) -> Result<(), String> {
    for &x0 in x0s {
        let source = oracle(eq, x0, span, step)?;
        let mut mapped = Vec::with_capacity(source.len());
        for s in &source.samples {
            let x = theta_apply(curve, s.t, s.x).map_err(|e| e.to_string())?;
            mapped.push(Sample { t: s.t, x });
        }
        let mapped = Trajectory::from_samples(mapped, source.step);
        let y0 = mapped.samples[0].x;
        let image = oracle(target, y0, span, step)?;
        check.record(max_trajectory_gap(&mapped, &image, POLE_GUARD), None);
    }
    Ok(())
}

/// The gauge action on the algebra curve agrees with the coefficient law.
fn gauge(check: &mut Check, eq: &RiccatiEquation, curve: &CurveSL2, grid: &Grid) -> Result<(), String> {
    let via_gauge = gauge_transform_algebra(&algebra_curve_from_riccati(eq), curve).to_riccati();
    let via_law = transform_coefficients(eq, curve);
    for (a, b) in via_gauge.coefficients().into_iter().zip(via_law.coefficients()) {
        let d = max_relative_deviation(a, b, grid).map_err(|e| e.to_string())?;
        check.record(d.value, Some(d.at));
    }
    Ok(())
}

/// A fixed composite curve exercising translations, scalings and the
/// inversion.
fn reference_curve() -> CurveSL2 {
    let t = Expr::t();
    let shift = CurveSL2::translation(0.5 * &t - 0.25);
    let scale = CurveSL2::scaling(&(0.5 * &t).exp());
    compose(&CurveSL2::inversion(), &compose(&scale, &shift))
}

fn cross_ratio_drift(check: &mut Check, solutions: &[Trajectory]) {
    let n = solutions.iter().map(Trajectory::len).min().unwrap_or(0);
    let mut reference = None;
    for i in 0..n {
        let t = solutions[0].samples[i].t;
        let [x, x1, x2, x3] = [0, 1, 2, 3].map(|k| solutions[k].samples[i].x);
        let Ok(ExtReal::Finite(k)) = cross_ratio(x, x1, x2, x3) else {
            continue;
        };
        if k.abs() > POLE_GUARD {
            continue;
        }
        match reference {
            None => reference = Some(k),
            Some(k0) => check.record(relative_gap(k, k0), Some(t)),
        }
    }
}

pub fn cmd_verify(problem: &Problem, o: &Options, only: Option<CriterionName>) -> Output {
    let eq = &problem.equation;
    let span = problem.interval;
    let grid = detection_grid(problem, o);
    let x0s = &problem.initial_conditions;
    let reports: Vec<_> = run_classify(problem, o)
        .into_iter()
        .filter(|r| only.is_none_or(|n| r.name == n))
        .collect();
    let mut checks = Vec::new();

    for r in reports.iter().filter(|r| r.mode == DetectionMode::Hinted) {
        let mut c = Check::new(format!("hint:{}", r.name), o.tol);
        c.deviation = r.diagnostics.max_deviation;
        c.at = r.diagnostics.deviation_at;
        if !r.satisfied {
            c.detail = r.diagnostics.reason.clone();
            if c.passed() {
                c.deviation = None;
            }
        }
        checks.push(c);
    }

    for r in reports.iter().filter(|r| r.satisfied) {
        let reduction = r.reduction.as_ref().expect("satisfied reports carry a reduction");
        let key = report_key(r);

        let mut c = Check::new(format!("equivariance:{key}"), ORACLE_TOL);
        if let Err(e) = equivariance(&mut c, eq, &reduction.curve, &reduction.target, x0s, span, o.step) {
            c.fail(e);
        }
        checks.push(c);

        let mut c = Check::new(format!("gauge:{key}"), GAUGE_TOL);
        if let Err(e) = gauge(&mut c, eq, &reduction.curve, &grid) {
            c.fail(e);
        }
        checks.push(c);

        let mut c = Check::new(format!("reduction_reconstruction:{key}"), ORACLE_TOL);
        for &x0 in x0s {
            let result = reduction
                .reconstruct(x0, span, o.step)
                .map_err(|e| e.to_string())
                .and_then(|traj| Ok((traj, oracle(eq, x0, span, o.step)?)));
            match result {
                Ok((traj, direct)) => c.record(max_trajectory_gap(&traj, &direct, POLE_GUARD), None),
                Err(e) => c.fail(e),
            }
        }
        checks.push(c);
    }

    let mut c = Check::new("gauge:reference", GAUGE_TOL);
    if let Err(e) = gauge(&mut c, eq, &reference_curve(), &grid) {
        c.fail(e);
    }
    checks.push(c);

    let mut recon = Check::new("group_reconstruction", ORACLE_TOL);
    let mut det = Check::new("unimodularity", UNIMODULAR_TOL);
    match integrate_group_equation(&algebra_curve_from_riccati(eq), span, o.step) {
        Ok(group) => {
            det.record(group.max_det_defect(), None);
            for &x0 in x0s {
                match oracle(eq, x0, span, o.step) {
                    Ok(direct) => {
                        recon.record(max_trajectory_gap(&reconstruct_solution(&group, x0), &direct, POLE_GUARD), None)
                    }
                    Err(e) => recon.fail(e),
                }
            }
        }
        Err(e) => {
            recon.fail(e.to_string());
            det.fail(e.to_string());
        }
    }
    checks.push(recon);
    checks.push(det);

    if let Some(c) = superposition_checks(problem, &grid, o.step, &mut checks) {
        checks.push(c);
    }

    let passed = checks.iter().all(Check::passed);
    for c in checks.iter().filter(|c| !c.passed()) {
        warn!("check {} failed: {:?} {:?}", c.name, c.deviation, c.detail);
    }
    let doc = VerifyJson {
        header: Header::new("verify", eq, span, o),
        passed,
        checks: checks.iter().map(Check::to_json).collect(),
    };
    Output {
        file_name: "verify.json",
        json: json::to_string(&doc),
        extra_files: Vec::new(),
        passed,
    }
}

/// Cross-ratio constancy over known and integrated solutions, and the
/// residual of the superposition formula when three closed forms are known.
fn superposition_checks(problem: &Problem, grid: &Grid, step: f64, checks: &mut Vec<Check>) -> Option<Check> {
    let eq = &problem.equation;
    let span = problem.interval;
    let known = &problem.known_solutions;

    let mut superposition = None;
    if let [x1, x2, x3, ..] = known.as_slice() {
        let mut c = Check::new("superposition", SUPERPOSITION_TOL);
        match superpose_three(x1, x2, x3, ExtReal::Finite(2.0), grid) {
            Ok(x) => {
                let dx = x.differentiate();
                for &t in grid.points() {
                    let (Ok(v), Ok(dv)) = (x.eval(t), dx.eval(t)) else {
                        continue;
                    };
                    if let Ok(rhs) = eq.rhs(t, v) {
                        c.record((dv - rhs).abs() / (1.0 + rhs.abs()), Some(t));
                    }
                }
            }
            Err(e) => c.fail(e.to_string()),
        }
        superposition = Some(c);
    }

    let Ok(times) = sample_times(problem, step) else {
        return superposition;
    };
    let mut solutions: Vec<Trajectory> = known
        .iter()
        .map(|x| SolutionForm::expression(x.clone(), crate::solvers::Provenance::DirectIntegration).sample(&times))
        .collect();
    let mut starts: Vec<ExtReal> = solutions.iter().filter_map(|s| s.samples.first().map(|s| s.x)).collect();
    for &x0 in &problem.initial_conditions {
        if !starts.contains(&x0) {
            if let Ok(traj) = oracle(eq, x0, span, step) {
                solutions.push(traj);
                starts.push(x0);
            }
        }
    }
    if solutions.len() == 3 {
        let distinct = |v: f64| starts.iter().all(|s| !matches!(s, ExtReal::Finite(x) if (x - v).abs() < 1e-3));
        if let Some(x0) = [0.25, -0.75, 1.5, 3.0].into_iter().find(|&v| distinct(v)) {
            if let Ok(traj) = oracle(eq, x0.into(), span, step) {
                solutions.push(traj);
            }
        }
    }
    if solutions.len() >= 4 {
        let mut c = Check::new("cross_ratio", ORACLE_TOL);
        cross_ratio_drift(&mut c, &solutions[..4]);
        checks.push(c);
    }
    superposition
}
