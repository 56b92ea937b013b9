//! Detectors for integrability conditions of Riccati equations.
//!
//! Every detector returns a [`CriterionReport`]: the fitted constants, the
//! auxiliary functions it built, the reducing curve and the target equation.
//! A report is only marked satisfied after the curve has been pushed through
//! [`transform_coefficients`] and reproduced the target on the grid, so a
//! satisfied report is a checked reduction, not a pattern match.

mod classic;
mod zh99;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::expr::{EvalError, Expr};
use crate::grid::{max_relative_deviation, Grid};
use crate::projline::ExtReal;
use crate::riccati::{RiccatiEquation, Trajectory};
use crate::sl2::{
    algebra_curve_from_riccati, integrate_group_equation, reconstruct_solution, solve_one_dimensional_target,
    AffineKind, GroupTrajectory, Sl2Error, TargetSubalgebra,
};
use crate::solvers::{solve_bernoulli, solve_linear, solve_separable, Provenance, SolutionForm, SolverError};
use crate::transform::{inverse, theta_apply, transform_coefficients, CurveSL2, TransformError};

pub use classic::{check_allen_stein, check_ko06, check_ra61, check_rao_k, check_rao_w0, check_rdm05, check_ru68};
pub use zh99::{check_zh99_basic, check_zh99_e, check_zh99_table, TableHint, Zh99EHint, Zh99Hint};

/// Default relative tolerance of the constancy tests.
pub const DEFAULT_TOL: f64 = 1e-6;

/// Fraction of grid points allowed to fail evaluation in a constancy fit.
pub const MAX_SKIPPED_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CriterionName {
    RaoK,
    RaoW0,
    Ru68,
    AllenStein,
    Ko06,
    Ra61,
    Rdm05,
    Zh99Basic,
    Zh99E,
    /// A row of the Zh99 table, 1 to 6.
    Zh99Table(u8),
}

impl fmt::Display for CriterionName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CriterionName::RaoK => f.write_str("RaoK"),
            CriterionName::RaoW0 => f.write_str("RaoW0"),
            CriterionName::Ru68 => f.write_str("RU68"),
            CriterionName::AllenStein => f.write_str("AllenStein"),
            CriterionName::Ko06 => f.write_str("Ko06"),
            CriterionName::Ra61 => f.write_str("Ra61"),
            CriterionName::Rdm05 => f.write_str("RDM05"),
            CriterionName::Zh99Basic => f.write_str("Zh99Basic"),
            CriterionName::Zh99E => f.write_str("Zh99E"),
            CriterionName::Zh99Table(row) => write!(f, "Zh99Table{row}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown criterion `{0}`")]
pub struct UnknownCriterion(pub String);

impl FromStr for CriterionName {
    type Err = UnknownCriterion;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let name = match s.to_ascii_lowercase().as_str() {
            "raok" => CriterionName::RaoK,
            "raow0" => CriterionName::RaoW0,
            "ru68" => CriterionName::Ru68,
            "allenstein" => CriterionName::AllenStein,
            "ko06" => CriterionName::Ko06,
            "ra61" => CriterionName::Ra61,
            "rdm05" => CriterionName::Rdm05,
            "zh99basic" => CriterionName::Zh99Basic,
            "zh99e" => CriterionName::Zh99E,
            other => match other.strip_prefix("zh99table").and_then(|r| r.parse::<u8>().ok()) {
                Some(row @ 1..=6) => CriterionName::Zh99Table(row),
                _ => return Err(UnknownCriterion(s.to_string())),
            },
        };
        Ok(name)
    }
}

/// Whether a detector searched for its free data or checked supplied hints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectionMode {
    Discovery,
    Hinted,
}

impl fmt::Display for DetectionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DetectionMode::Discovery => "discovery",
            DetectionMode::Hinted => "hinted",
        })
    }
}

/// A curve together with the equation it produces.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub curve: CurveSL2,
    pub subalgebra: TargetSubalgebra,
    pub target: RiccatiEquation,
}

impl Reduction {
    /// A reduction onto `rate(t) (c0 + c1 y + c2 y²)`.
    pub fn one_dimensional(curve: CurveSL2, direction: [f64; 3], rate: Expr) -> Self {
        let subalgebra = TargetSubalgebra::one_dimensional(direction, rate);
        let target = subalgebra.equation().expect("one-dimensional target");
        Reduction { curve, subalgebra, target }
    }

    pub fn affine(curve: CurveSL2, kind: AffineKind, target: RiccatiEquation) -> Self {
        Reduction {
            curve,
            subalgebra: TargetSubalgebra::AffineSolvable(kind),
            target,
        }
    }

    /// Largest relative coefficient gap between `transform_coefficients(eq,
    /// curve)` and the target.
    pub fn curve_residual(&self, eq: &RiccatiEquation, grid: &Grid) -> Result<f64, EvalError> {
        let pushed = transform_coefficients(eq, &self.curve);
        let mut worst = 0.0f64;
        for (a, b) in pushed.coefficients().into_iter().zip(self.target.coefficients()) {
            worst = worst.max(max_relative_deviation(a, b, grid)?.value);
        }
        Ok(worst)
    }

    /// Solves the target from `y(t0) = Θ(curve, t0, x0)` and pulls the
    /// solution back through the inverse curve, as a closed form.
    pub fn solve(
        &self,
        name: CriterionName,
        t0: f64,
        x0: ExtReal,
        grid: &Grid,
    ) -> Result<SolutionForm, CriteriaError> {
        let y0 = theta_apply(&self.curve, t0, x0)?;
        let target = match &self.subalgebra {
            TargetSubalgebra::OneDimensional { direction, rate } => solve_separable(rate, *direction, t0, y0)?,
            TargetSubalgebra::AffineSolvable(AffineKind::B2Zero) => solve_linear(&self.target, t0, y0, grid)?,
            TargetSubalgebra::AffineSolvable(AffineKind::B0Zero) => solve_bernoulli(&self.target, t0, y0, grid)?,
        };
        let Some((num, den)) = target.homogeneous() else {
            unreachable!("quadrature solvers return closed forms")
        };
        let back = inverse(&self.curve);
        let numerator = &back.alpha * &num + &back.beta * &den;
        let denominator = &back.gamma * &num + &back.delta * &den;
        Ok(SolutionForm::closed(
            numerator,
            denominator,
            Provenance::Criterion(name.to_string()),
        ))
    }

    /// The group-level route: `A(t) = Ā(t)⁻¹ A'(t) Ā(t_a)` with `A'` the
    /// solution of the target's equation on SL(2,R), then `x = Φ(A, x0)`.
    pub fn reconstruct(&self, x0: ExtReal, span: (f64, f64), step: f64) -> Result<Trajectory, CriteriaError> {
        let reduced = match &self.subalgebra {
            TargetSubalgebra::OneDimensional { .. } => solve_one_dimensional_target(&self.subalgebra, span, step)?,
            TargetSubalgebra::AffineSolvable(_) => {
                integrate_group_equation(&algebra_curve_from_riccati(&self.target), span, step)?
            }
        };
        let start = self.curve.matrix_at(span.0)?;
        let mut samples = Vec::with_capacity(reduced.samples.len());
        for (t, a_prime) in &reduced.samples {
            let back = self.curve.matrix_at(*t)?.inverse().map_err(TransformError::from)?;
            samples.push((*t, back * *a_prime * start));
        }
        let group = GroupTrajectory { samples };
        Ok(reconstruct_solution(&group, x0))
    }
}

/// Numeric evidence behind a report.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    /// Largest constancy or identity deviation found.
    pub max_deviation: Option<f64>,
    pub deviation_at: Option<f64>,
    /// Gap between the pushed-forward equation and the target.
    pub curve_residual: Option<f64>,
    pub grid_start: f64,
    pub grid_end: f64,
    pub grid_points: usize,
    pub skipped_points: usize,
    /// Why the report is unsatisfied, when it is.
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub name: CriterionName,
    pub mode: DetectionMode,
    pub satisfied: bool,
    pub constants: BTreeMap<String, f64>,
    pub functions: BTreeMap<String, Expr>,
    pub reduction: Option<Reduction>,
    /// Further reductions the same condition allows.
    pub alternates: Vec<Reduction>,
    pub diagnostics: Diagnostics,
}

impl CriterionReport {
    pub(crate) fn new(name: CriterionName, mode: DetectionMode, grid: &Grid) -> Self {
        CriterionReport {
            name,
            mode,
            satisfied: false,
            constants: BTreeMap::new(),
            functions: BTreeMap::new(),
            reduction: None,
            alternates: Vec::new(),
            diagnostics: Diagnostics {
                max_deviation: None,
                deviation_at: None,
                curve_residual: None,
                grid_start: grid.start(),
                grid_end: grid.end(),
                grid_points: grid.len(),
                skipped_points: 0,
                reason: None,
            },
        }
    }

    pub(crate) fn reject(mut self, reason: impl Into<String>) -> Self {
        self.satisfied = false;
        self.diagnostics.reason = Some(reason.into());
        self
    }

    pub(crate) fn constant(&mut self, key: &str, value: f64) {
        self.constants.insert(key.to_string(), value);
    }

    pub(crate) fn function(&mut self, key: &str, value: &Expr) {
        self.functions.insert(key.to_string(), value.clone());
    }

    pub(crate) fn record_deviation(&mut self, value: f64, at: f64) {
        if self.diagnostics.max_deviation.is_none_or(|d| value > d || d.is_nan()) {
            self.diagnostics.max_deviation = Some(value);
            self.diagnostics.deviation_at = Some(at);
        }
    }

    pub(crate) fn record_fit(&mut self, key: &str, fit: &ConstancyFit) {
        self.constant(key, fit.value);
        self.record_deviation(fit.max_dev, fit.at);
        self.diagnostics.skipped_points = self.diagnostics.skipped_points.max(fit.skipped);
    }

    /// Accepts `reduction` if its curve is unimodular and reproduces the
    /// target within `tol`; otherwise explains why not.
    pub(crate) fn conclude(mut self, eq: &RiccatiEquation, reduction: Reduction, grid: &Grid, tol: f64) -> Self {
        if let Err(e) = reduction.curve.check_unimodular(grid) {
            self.reduction = Some(reduction);
            return self.reject(format!("reducing curve is not in SL(2,R): {e}"));
        }
        let residual = match reduction.curve_residual(eq, grid) {
            Ok(r) => r,
            Err(e) => {
                self.reduction = Some(reduction);
                return self.reject(format!("transformed equation cannot be evaluated: {e}"));
            }
        };
        self.diagnostics.curve_residual = Some(residual);
        self.reduction = Some(reduction);
        if residual <= tol {
            self.satisfied = true;
            self.diagnostics.reason = None;
            self
        } else {
            self.reject(format!("curve does not reproduce the target (residual {residual:e})"))
        }
    }

    /// The target equation of the reduction, if one was built.
    pub fn target(&self) -> Option<&RiccatiEquation> {
        self.reduction.as_ref().map(|r| &r.target)
    }

    /// Closed-form solution through this report's reduction.
    pub fn solve(&self, t0: f64, x0: ExtReal, grid: &Grid) -> Result<SolutionForm, CriteriaError> {
        match (&self.reduction, self.satisfied) {
            (Some(reduction), true) => reduction.solve(self.name, t0, x0, grid),
            _ => Err(CriteriaError::NotSatisfied(self.name)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CriteriaError {
    #[error("criterion {0} is not satisfied")]
    NotSatisfied(CriterionName),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Group(#[from] Sl2Error),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Result of testing whether a function is constant on a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstancyFit {
    /// Median of the samples.
    pub value: f64,
    /// `max |f(t_i) - value| / (1 + |value|)`.
    pub max_dev: f64,
    /// Where the maximum deviation occurs.
    pub at: f64,
    /// Grid points where `f` could not be evaluated.
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{skipped} of {total} grid points could not be evaluated (first: {first})")]
pub struct ConstancyError {
    pub skipped: usize,
    pub total: usize,
    pub first: EvalError,
}

/// Median-based constancy test. Points where `f` fails to evaluate are
/// skipped; more than 20% skipped is an error.
pub fn constancy_fit(f: &Expr, grid: &Grid) -> Result<ConstancyFit, ConstancyError> {
    let mut samples = Vec::with_capacity(grid.len());
    let mut first = None;
    for &t in grid.points() {
        match f.eval(t) {
            Ok(v) => samples.push((t, v)),
            Err(e) => {
                first.get_or_insert(e);
            }
        }
    }
    let skipped = grid.len() - samples.len();
    if let Some(first) = first {
        if samples.is_empty() || skipped as f64 > MAX_SKIPPED_FRACTION * grid.len() as f64 {
            return Err(ConstancyError {
                skipped,
                total: grid.len(),
                first,
            });
        }
    }
    let mut values: Vec<f64> = samples.iter().map(|s| s.1).collect();
    values.sort_by(f64::total_cmp);
    let n = values.len();
    let value = if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    };
    let mut max_dev = 0.0f64;
    let mut at = samples[0].0;
    for (t, v) in samples {
        let dev = (v - value).abs() / (1.0 + value.abs());
        if dev > max_dev {
            max_dev = dev;
            at = t;
        }
    }
    Ok(ConstancyFit {
        value,
        max_dev,
        at,
        skipped,
    })
}

/// Sign of `f` if it is nonzero with a constant sign on the whole grid.
pub(crate) fn strict_sign(f: &Expr, grid: &Grid) -> Result<f64, String> {
    let mut sign = 0.0f64;
    for &t in grid.points() {
        let v = f.eval(t).map_err(|e| e.to_string())?;
        if v == 0.0 || !v.is_finite() || (sign != 0.0 && v.signum() != sign) {
            return Err(format!("{f} changes sign or vanishes near t = {t} (value {v})"));
        }
        sign = v.signum();
    }
    Ok(sign)
}

/// Checks `f > 0` on the grid, returning a description of the first failure.
pub(crate) fn positive(name: &str, f: &Expr, grid: &Grid) -> Result<(), String> {
    for &t in grid.points() {
        match f.eval(t) {
            Ok(v) if v > 0.0 => {}
            Ok(v) => return Err(format!("{name} > 0 fails at t = {t} ({name} = {v})")),
            Err(e) => return Err(format!("{name} cannot be evaluated: {e}")),
        }
    }
    Ok(())
}

/// Maximum of `|lhs - rhs| / (1 + |rhs|)` on the grid, with its location.
pub(crate) fn identity_deviation(lhs: &Expr, rhs: &Expr, grid: &Grid) -> Result<(f64, f64), EvalError> {
    let d = max_relative_deviation(lhs, rhs, grid)?;
    Ok((d.value, d.at))
}

/// Free data for detectors whose conditions involve arbitrary functions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Hints {
    pub ru68: Option<Ru68Hint>,
    pub zh99_basic: Option<Zh99Hint>,
    pub zh99_e: Option<Zh99EHint>,
    pub zh99_table: Vec<TableHint>,
}

/// `v̇ = -k b0 + b1 v` and `b2 = b0 / (c v²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ru68Hint {
    pub v: Expr,
    pub c: f64,
    pub k: f64,
}

/// Runs every hint-free detector in a fixed order, followed by the hinted
/// ones for which hints were supplied. All reports are returned, satisfied
/// or not.
pub fn classify(eq: &RiccatiEquation, grid: &Grid, tol: f64, hints: &Hints) -> Vec<CriterionReport> {
    let mut reports = vec![
        check_rdm05(eq, grid, tol),
        check_ra61(eq, grid, tol),
        check_allen_stein(eq, grid, tol),
        check_rao_w0(eq, grid, tol),
        check_rao_k(eq, grid, tol),
        check_ko06(eq, grid, tol),
        check_zh99_basic(eq, grid, tol, None),
        check_ru68(eq, grid, tol, None),
    ];
    if let Some(h) = &hints.ru68 {
        reports.push(check_ru68(eq, grid, tol, Some(h)));
    }
    if let Some(h) = &hints.zh99_basic {
        reports.push(check_zh99_basic(eq, grid, tol, Some(h)));
    }
    if let Some(h) = &hints.zh99_e {
        reports.push(check_zh99_e(eq, grid, tol, h));
    }
    for h in &hints.zh99_table {
        reports.push(check_zh99_table(eq, grid, tol, h));
    }
    reports
}
