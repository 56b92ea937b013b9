//! The Zh99 family: conditions of the form `(product) = a c D²` plus a
//! logarithmic-derivative identity, each reducing the equation to
//! `D(t)(c + b y + a y²)`.
//!
//! The conditions are invariant under `(a, c) -> (-a, -c)`; the detectors use
//! this to pick the branch on which the curve's square roots are real.

use crate::expr::Expr;
use crate::grid::Grid;
use crate::riccati::RiccatiEquation;
use crate::transform::CurveSL2;

use super::classic::{check_identity, fit_constant, try_or_reject};
use super::{positive, strict_sign, CriterionName, CriterionReport, DetectionMode, Reduction};

/// `b2 b0 = a c D²` and `ḃ2/b2 + b1 = Ḋ/D + b D`.
#[derive(Debug, Clone, PartialEq)]
pub struct Zh99Hint {
    pub d: Expr,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// `b2 L[E] = a c D²` and `ḃ2/b2 + b1 + 2 E b2 = Ḋ/D + b D`.
#[derive(Debug, Clone, PartialEq)]
pub struct Zh99EHint {
    pub e: Expr,
    pub d: Expr,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// Free data for one row of the table. Rows 2 to 6 need `e`; rows 5 and 6
/// also need the pair `A(t)`, `B(t)` (stored as `func_a`, `func_b`).
#[derive(Debug, Clone, PartialEq)]
pub struct TableHint {
    pub row: u8,
    pub d: Expr,
    pub e: Option<Expr>,
    pub func_a: Option<Expr>,
    pub func_b: Option<Expr>,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// `L[E] = -Ė + b2 E² + b1 E + b0`.
pub fn l_operator(eq: &RiccatiEquation, e: &Expr) -> Expr {
    -e.differentiate() + &eq.b2 * e * e + &eq.b1 * e + &eq.b0
}

/// Returns `(a, c)` or `(-a, -c)`, whichever makes `arg(a, c)` positive on
/// the whole grid.
fn choose_branch(
    label: &str,
    arg: impl Fn(f64, f64) -> Expr,
    a: f64,
    c: f64,
    grid: &Grid,
) -> Result<(f64, f64), String> {
    let first = positive(label, &arg(a, c), grid);
    if first.is_ok() {
        return Ok((a, c));
    }
    match positive(label, &arg(-a, -c), grid) {
        Ok(()) => Ok((-a, -c)),
        Err(second) => Err(format!(
            "square root argument negative on both branches: {} / (a, c) -> (-a, -c): {second}",
            first.unwrap_err()
        )),
    }
}

fn record_abc(r: &mut CriterionReport, a: f64, b: f64, c: f64) {
    r.constant("a", a);
    r.constant("b", b);
    r.constant("c", c);
}

/// Basic form. Without a hint `|a| = 1`, `a c = sign(b0 b2)`,
/// `D = √|b0 b2|` and `b` is fitted from the second condition.
pub fn check_zh99_basic(eq: &RiccatiEquation, grid: &Grid, tol: f64, hint: Option<&Zh99Hint>) -> CriterionReport {
    let RiccatiEquation { b0, b1, b2 } = eq;
    let (mut r, d, a, b, c) = match hint {
        None => {
            let mut r = CriterionReport::new(CriterionName::Zh99Basic, DetectionMode::Discovery, grid);
            let product = b0 * b2;
            let s = try_or_reject!(r, strict_sign(&product, grid));
            let a = try_or_reject!(r, strict_sign(b2, grid));
            let d = (s * product).sqrt();
            let quotient = (b2.differentiate() / b2 + b1 - d.differentiate() / &d) / &d;
            let b = try_or_reject!(r, fit_constant(&mut r, "b", &quotient, grid, tol));
            (r, d, a, b, s * a)
        }
        Some(h) => {
            let mut r = CriterionReport::new(CriterionName::Zh99Basic, DetectionMode::Hinted, grid);
            let d = &h.d;
            let rhs = h.a * h.c * d.powi(2);
            try_or_reject!(r, check_identity(&mut r, "b2 b0 = a c D^2", &(b2 * b0), &rhs, grid, tol));
            let lhs = b2.differentiate() / b2 + b1;
            let rhs = d.differentiate() / d + h.b * d;
            try_or_reject!(r, check_identity(&mut r, "b2'/b2 + b1 = D'/D + b D", &lhs, &rhs, grid, tol));
            (r, d.clone(), h.a, h.b, h.c)
        }
    };
    r.function("D", &d);
    let (a, c) = try_or_reject!(r, choose_branch("b2/(a D)", |a, _| b2 / (a * &d), a, c, grid));
    record_abc(&mut r, a, b, c);
    let alpha = (b2 / (a * &d)).sqrt();
    let delta = ((a * &d) / b2).sqrt();
    let curve = CurveSL2::new(alpha, Expr::zero(), Expr::zero(), delta);
    r.conclude(eq, Reduction::one_dimensional(curve, [c, b, a], d), grid, tol)
}

/// E-form: verification of both conditions for the supplied `E`, `D`.
pub fn check_zh99_e(eq: &RiccatiEquation, grid: &Grid, tol: f64, hint: &Zh99EHint) -> CriterionReport {
    let mut r = CriterionReport::new(CriterionName::Zh99E, DetectionMode::Hinted, grid);
    let RiccatiEquation { b1, b2, .. } = eq;
    let Zh99EHint { e, d, .. } = hint;
    let l = l_operator(eq, e);
    r.function("D", d);
    r.function("E", e);
    r.function("L", &l);
    let rhs = hint.a * hint.c * d.powi(2);
    try_or_reject!(r, check_identity(&mut r, "b2 L[E] = a c D^2", &(b2 * &l), &rhs, grid, tol));
    let lhs = b2.differentiate() / b2 + b1 + 2.0 * e * b2;
    let rhs = d.differentiate() / d + hint.b * d;
    try_or_reject!(r, check_identity(&mut r, "b2'/b2 + b1 + 2 E b2 = D'/D + b D", &lhs, &rhs, grid, tol));
    let (a, c) = try_or_reject!(r, choose_branch("b2/(a D)", |a, _| b2 / (a * d), hint.a, hint.c, grid));
    record_abc(&mut r, a, hint.b, c);
    let alpha = (b2 / (a * d)).sqrt();
    let delta = ((a * d) / b2).sqrt();
    let curve = CurveSL2::new(alpha.clone(), -(&alpha * e), Expr::zero(), delta);
    r.conclude(eq, Reduction::one_dimensional(curve, [c, hint.b, a], d.clone()), grid, tol)
}

/// One row of the table: both printed conditions are verified for the
/// supplied data, then the row's curve is built and checked.
pub fn check_zh99_table(eq: &RiccatiEquation, grid: &Grid, tol: f64, hint: &TableHint) -> CriterionReport {
    let row = hint.row;
    let mut r = CriterionReport::new(CriterionName::Zh99Table(row), DetectionMode::Hinted, grid);
    if !(1..=6).contains(&row) {
        return r.reject(format!("table row {row} does not exist"));
    }
    let RiccatiEquation { b0, b1, b2 } = eq;
    let d = &hint.d;
    r.function("D", d);
    let e = match (&hint.e, row) {
        (_, 1) => Expr::zero(),
        (Some(e), _) => e.clone(),
        (None, _) => return r.reject(format!("row {row} needs the function E")),
    };
    if row != 1 {
        r.function("E", &e);
    }
    let rho = if row >= 5 {
        let (Some(fa), Some(fb)) = (&hint.func_a, &hint.func_b) else {
            return r.reject(format!("row {row} needs the functions A and B"));
        };
        r.function("A", fa);
        r.function("B", fb);
        Some((fb / fa, fa / fb))
    } else {
        None
    };
    let l = l_operator(eq, &e);
    if row != 1 {
        r.function("L", &l);
    }
    let l2 = rho.as_ref().map(|(_, inv)| l_operator(eq, &(inv + &e)));
    if let Some(l2) = &l2 {
        r.function("L2", l2);
    }

    let (a, b, c) = (hint.a, hint.b, hint.c);
    let acd2 = a * c * d.powi(2);
    let log_d = d.differentiate() / d;
    let g = b1 + 2.0 * &e * b2;
    let log_diff = |f: &Expr| f.differentiate() / f;
    let (first_lhs, second_lhs, second_rhs) = match (row, &rho, &l2) {
        (1, _, _) => (b2 * b0, log_diff(b0) - b1, &log_d - b * d),
        (2, _, _) => (b2 * &l, log_diff(&l) - &g, &log_d + b * d),
        (3, _, _) => (b2 * &l, log_diff(b2) + &g, &log_d - b * d),
        (4, _, _) => (b2 * &l, log_diff(&l) - &g, &log_d - b * d),
        (5, Some((rho, _)), Some(l2)) => (
            rho.powi(2) * &l * l2,
            log_diff(&l) - 2.0 * rho * &l - &g,
            &log_d + b * d,
        ),
        (6, Some((rho, inv)), Some(l2)) => (
            rho.powi(2) * &l * l2,
            log_diff(l2) - 2.0 * log_diff(inv) + 2.0 * rho * &l + &g,
            &log_d - b * d,
        ),
        _ => unreachable!("row checked above"),
    };
    try_or_reject!(r, check_identity(&mut r, "first condition", &first_lhs, &acd2, grid, tol));
    try_or_reject!(r, check_identity(&mut r, "second condition", &second_lhs, &second_rhs, grid, tol));

    // Each row's curve is built from one square root `s = √arg` and its
    // reciprocal `√(1/arg)`, both written out as printed.
    let (label, arg): (&str, Box<dyn Fn(f64, f64) -> Expr>) = match row {
        1 => ("c D/b0", Box::new(|_, c| c * d / b0)),
        2 | 5 => ("L/(a D)", Box::new(|a, _| &l / (a * d))),
        3 => ("c D/b2", Box::new(|_, c| c * d / b2)),
        4 => ("c D/L", Box::new(|_, c| c * d / &l)),
        _ => ("c D/L2", Box::new(|_, c| c * d / l2.as_ref().unwrap())),
    };
    let (a, c) = try_or_reject!(r, choose_branch(label, &arg, a, c, grid));
    record_abc(&mut r, a, b, c);
    let (s, s_inv) = match row {
        1 => ((c * d / b0).sqrt(), (b0 / (c * d)).sqrt()),
        2 | 5 => ((&l / (a * d)).sqrt(), ((a * d) / &l).sqrt()),
        3 => ((c * d / b2).sqrt(), (b2 / (c * d)).sqrt()),
        4 => ((c * d / &l).sqrt(), (&l / (c * d)).sqrt()),
        _ => {
            let l2 = l2.as_ref().unwrap();
            ((c * d / l2).sqrt(), (l2 / (c * d)).sqrt())
        }
    };
    let zero = Expr::zero;
    let curve = match (row, &rho) {
        (1, _) => CurveSL2::new(s, zero(), zero(), s_inv),
        (2 | 3, _) => CurveSL2::new(zero(), s, -&s_inv, &e * &s_inv),
        (4, _) => CurveSL2::new(s.clone(), -(&e * &s), zero(), s_inv),
        (5, Some((rho, _))) => CurveSL2::new(-(&s * rho), &s * (1.0 + &e * rho), -&s_inv, &s_inv * &e),
        (_, Some((rho, inv))) => CurveSL2::new(-&s, &s * (1.0 + rho * &e) * inv, -(rho * &s_inv), rho * &e * &s_inv),
        _ => unreachable!("rows 5 and 6 carry A and B"),
    };
    r.conclude(eq, Reduction::one_dimensional(curve, [c, b, a], d.clone()), grid, tol)
}
