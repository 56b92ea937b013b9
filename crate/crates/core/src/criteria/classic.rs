//! Rao, Rao–Ukidave, Allen–Stein, Kovalev, Ra61 and RDM05 detectors.

use crate::expr::Expr;
use crate::grid::Grid;
use crate::riccati::RiccatiEquation;
use crate::sl2::AffineKind;
use crate::transform::CurveSL2;

use super::{
    constancy_fit, identity_deviation, positive, strict_sign, CriterionName, CriterionReport, DetectionMode,
    Reduction, Ru68Hint,
};

/// Fits a constant and records it, or explains why it is not constant.
pub(super) fn fit_constant(
    report: &mut CriterionReport,
    key: &str,
    f: &Expr,
    grid: &Grid,
    tol: f64,
) -> Result<f64, String> {
    let fit = constancy_fit(f, grid).map_err(|e| format!("{key} cannot be fitted: {e}"))?;
    report.record_fit(key, &fit);
    if fit.max_dev <= tol {
        Ok(fit.value)
    } else {
        Err(format!(
            "{key} is not constant (max deviation {:e} at t = {})",
            fit.max_dev, fit.at
        ))
    }
}

/// Checks `lhs ≡ rhs` on the grid and records the deviation.
pub(super) fn check_identity(
    report: &mut CriterionReport,
    label: &str,
    lhs: &Expr,
    rhs: &Expr,
    grid: &Grid,
    tol: f64,
) -> Result<(), String> {
    let (dev, at) = identity_deviation(lhs, rhs, grid).map_err(|e| format!("{label} cannot be evaluated: {e}"))?;
    report.record_deviation(dev, at);
    if dev <= tol {
        Ok(())
    } else {
        Err(format!("{label} fails (deviation {dev:e} at t = {at})"))
    }
}

/// `W = b2² b0 + ḃ1 b2 - b1 ḃ2`.
pub fn rao_invariant(eq: &RiccatiEquation) -> Expr {
    let RiccatiEquation { b0, b1, b2 } = eq;
    b2 * b2 * b0 + b1.differentiate() * b2 - b1 * b2.differentiate()
}

macro_rules! try_or_reject {
    ($report:ident, $e:expr) => {
        match $e {
            Ok(v) => v,
            Err(reason) => return $report.reject(reason),
        }
    };
}
pub(super) use try_or_reject;

/// `K = (b2 Ẇ - (3 ḃ2 - 2 b1 b2) W) / (2 √b2 W^{3/2})` constant, with
/// `b2 > 0` and `W > 0`: the curve `(1/√v, b1/(b2 √v), 0, √v)`,
/// `v = √(W/b2³)`, reduces the equation to `√(W/b2)(1 - K y + y²)`.
pub fn check_rao_k(eq: &RiccatiEquation, grid: &Grid, tol: f64) -> CriterionReport {
    let mut r = CriterionReport::new(CriterionName::RaoK, DetectionMode::Discovery, grid);
    let RiccatiEquation { b1, b2, .. } = eq;
    let w = rao_invariant(eq);
    r.function("W", &w);
    try_or_reject!(r, positive("b2", b2, grid));
    try_or_reject!(r, positive("W", &w, grid));
    let db2 = b2.differentiate();
    let quotient = (b2 * w.differentiate() - (3.0 * &db2 - 2.0 * b1 * b2) * &w) / (2.0 * b2.sqrt() * &w * w.sqrt());
    let k = try_or_reject!(r, fit_constant(&mut r, "K", &quotient, grid, tol));
    let v = (&w / b2.powi(3)).sqrt();
    r.function("v", &v);
    let sv = v.sqrt();
    let curve = CurveSL2::new(1.0 / &sv, b1 / (b2 * &sv), Expr::zero(), sv);
    let rate = (&w / b2).sqrt();
    r.conclude(eq, Reduction::one_dimensional(curve, [1.0, -k, 1.0], rate), grid, tol)
}

/// `W ≡ 0` with `b2 ≠ 0`: the curve `(e^{I/2}, e^{I/2} b1/b2, 0, e^{-I/2})`,
/// `I = ∫ b1`, reduces the equation to `b2 e^{-I} y²`.
pub fn check_rao_w0(eq: &RiccatiEquation, grid: &Grid, tol: f64) -> CriterionReport {
    let mut r = CriterionReport::new(CriterionName::RaoW0, DetectionMode::Discovery, grid);
    let RiccatiEquation { b0, b1, b2 } = eq;
    let w = rao_invariant(eq);
    r.function("W", &w);
    let (db1, db2) = (b1.differentiate(), b2.differentiate());
    for &t in grid.points() {
        let terms = (|| -> Result<[f64; 3], crate::expr::EvalError> {
            let (b0, b1, b2) = (b0.eval(t)?, b1.eval(t)?, b2.eval(t)?);
            Ok([b2 * b2 * b0, db1.eval(t)? * b2, b1 * db2.eval(t)?])
        })();
        let [p, q, s] = try_or_reject!(r, terms.map_err(|e| format!("W cannot be evaluated: {e}")));
        let dev = (p + q - s).abs() / (1.0 + p.abs() + q.abs() + s.abs());
        r.record_deviation(dev, t);
    }
    let dev = r.diagnostics.max_deviation.unwrap_or(0.0);
    if dev > tol {
        return r.reject(format!("W does not vanish (relative size {dev:e})"));
    }
    try_or_reject!(r, strict_sign(b2, grid).map(|_| ()));
    let integral = try_or_reject!(r, b1.integral_from(grid.start()).map_err(|e| e.to_string()));
    let half = 0.5 * &integral;
    let alpha = half.exp();
    let curve = CurveSL2::new(alpha.clone(), &alpha * b1 / b2, Expr::zero(), (-&half).exp());
    let rate = b2 * (-&integral).exp();
    r.conclude(eq, Reduction::one_dimensional(curve, [0.0, 0.0, 1.0], rate), grid, tol)
}

/// `v̇ = -k b0 + b1 v` and `b2 = b0 / (c v²)`: the curve `diag(1/√v, √v)`
/// reduces the equation to `(b0/v)(1 + k y + y²/c)`.
///
/// Without a hint, `c = sign(b0/b2)`, `v = √|b0/b2|` and `k` is fitted.
pub fn check_ru68(eq: &RiccatiEquation, grid: &Grid, tol: f64, hint: Option<&Ru68Hint>) -> CriterionReport {
    let RiccatiEquation { b0, b1, b2 } = eq;
    let (mut r, v, c, k) = match hint {
        None => {
            let mut r = CriterionReport::new(CriterionName::Ru68, DetectionMode::Discovery, grid);
            let ratio = b0 / b2;
            let c = try_or_reject!(r, strict_sign(&ratio, grid));
            let v = (c * ratio).sqrt();
            r.function("v", &v);
            let quotient = (b1 * &v - v.differentiate()) / b0;
            let k = try_or_reject!(r, fit_constant(&mut r, "k", &quotient, grid, tol));
            (r, v, c, k)
        }
        Some(h) => {
            let mut r = CriterionReport::new(CriterionName::Ru68, DetectionMode::Hinted, grid);
            r.function("v", &h.v);
            r.constant("k", h.k);
            if h.c == 0.0 {
                return r.reject("c must be non-zero");
            }
            let lhs = h.v.differentiate();
            let rhs = -h.k * b0 + b1 * &h.v;
            try_or_reject!(r, check_identity(&mut r, "dv/dt = -k b0 + b1 v", &lhs, &rhs, grid, tol));
            let rhs = b0 / (h.c * h.v.powi(2));
            try_or_reject!(r, check_identity(&mut r, "b2 = b0/(c v^2)", b2, &rhs, grid, tol));
            (r, h.v.clone(), h.c, h.k)
        }
    };
    r.constant("c", c);
    try_or_reject!(r, positive("v", &v, grid));
    let sv = v.sqrt();
    let curve = CurveSL2::new(1.0 / &sv, Expr::zero(), Expr::zero(), sv);
    r.conclude(eq, Reduction::one_dimensional(curve, [1.0, k, 1.0 / c], b0 / &v), grid, tol)
}

/// `C = (b1 + (ḃ2/b2 - ḃ0/b0)/2) / √(b0 b2)` constant, `b0 b2 > 0`: the curve
/// `diag((b2/b0)^{1/4}, (b0/b2)^{1/4})` reduces the equation to
/// `√(b0 b2)(1 + C y + y²)` (to `√(b0 b2)(-1 + C y - y²)` when both
/// coefficients are negative).
pub fn check_allen_stein(eq: &RiccatiEquation, grid: &Grid, tol: f64) -> CriterionReport {
    let mut r = CriterionReport::new(CriterionName::AllenStein, DetectionMode::Discovery, grid);
    let RiccatiEquation { b0, b1, b2 } = eq;
    let product = b0 * b2;
    try_or_reject!(r, positive("b0*b2", &product, grid));
    let s = try_or_reject!(r, strict_sign(b0, grid));
    let root = product.sqrt();
    let quotient = (b1 + 0.5 * (b2.differentiate() / b2 - b0.differentiate() / b0)) / &root;
    let c = try_or_reject!(r, fit_constant(&mut r, "C", &quotient, grid, tol));
    let alpha = (b2 / b0).sqrt().sqrt();
    let delta = (b0 / b2).sqrt().sqrt();
    let curve = CurveSL2::new(alpha, Expr::zero(), Expr::zero(), delta);
    r.conclude(eq, Reduction::one_dimensional(curve, [s, c, s], root), grid, tol)
}

/// The family `b0 = F > 0`, `b1 = c2 + Ḟ/F`, `b2 = -c1/F`: the curve
/// `diag(1/√F, √F)` reduces it to `1 + c2 y - c1 y²`. When `c1 < 0` two
/// further diagonal curves are reported as alternates.
pub fn check_ko06(eq: &RiccatiEquation, grid: &Grid, tol: f64) -> CriterionReport {
    let mut r = CriterionReport::new(CriterionName::Ko06, DetectionMode::Discovery, grid);
    let RiccatiEquation { b0: f, b1, b2 } = eq;
    r.function("F", f);
    try_or_reject!(r, positive("F", f, grid));
    let c2 = try_or_reject!(r, fit_constant(&mut r, "c2", &(b1 - f.differentiate() / f), grid, tol));
    let c1 = try_or_reject!(r, fit_constant(&mut r, "c1", &-(b2 * f), grid, tol));
    let sf = f.sqrt();
    let curve = CurveSL2::new(1.0 / &sf, Expr::zero(), Expr::zero(), sf);
    let r = r.conclude(eq, Reduction::one_dimensional(curve, [1.0, c2, -c1], Expr::one()), grid, tol);
    if !r.satisfied || -c1 <= 0.0 {
        return r;
    }
    let mut r = r;
    let first = CurveSL2::diagonal((-c1 / f).sqrt());
    let root = (-c1).sqrt();
    let second = CurveSL2::diagonal((-c1 / f.powi(2)).sqrt().sqrt());
    let candidates = [
        Reduction::one_dimensional(first, [-c1, c2, 1.0], Expr::one()),
        Reduction::one_dimensional(second, [root, c2, root], Expr::one()),
    ];
    for alt in candidates {
        if alt.curve_residual(eq, grid).is_ok_and(|res| res <= tol) {
            r.alternates.push(alt);
        }
    }
    r
}

/// `(-b0/b2) e^{-2I} = a` constant with `I = ∫ b1` and `-b0/b2 > 0`: the
/// curve `diag(e^{-I/2}, e^{I/2})` reduces the equation to
/// `b2 e^{I} (y² - a)`.
pub fn check_ra61(eq: &RiccatiEquation, grid: &Grid, tol: f64) -> CriterionReport {
    let mut r = CriterionReport::new(CriterionName::Ra61, DetectionMode::Discovery, grid);
    let RiccatiEquation { b0, b1, b2 } = eq;
    let ratio = -(b0 / b2);
    try_or_reject!(r, positive("-b0/b2", &ratio, grid));
    let integral = try_or_reject!(r, b1.integral_from(grid.start()).map_err(|e| e.to_string()));
    let quotient = &ratio * (-2.0 * &integral).exp();
    let a = try_or_reject!(r, fit_constant(&mut r, "a", &quotient, grid, tol));
    let half = 0.5 * &integral;
    let curve = CurveSL2::new((-&half).exp(), Expr::zero(), Expr::zero(), half.exp());
    let rate = b2 * integral.exp();
    r.conclude(eq, Reduction::one_dimensional(curve, [-a, 0.0, 1.0], rate), grid, tol)
}

/// Real roots of `b2 r² + b1 r + b0` at `t`, largest first; `None` when the
/// polynomial vanishes identically there.
fn roots_at(eq: &RiccatiEquation, t: f64) -> Result<Option<Vec<f64>>, crate::expr::EvalError> {
    let [b0, b1, b2] = eq.coefficients_at(t)?;
    Ok(if b2 != 0.0 {
        let disc = b1 * b1 - 4.0 * b2 * b0;
        if disc < 0.0 {
            Some(Vec::new())
        } else {
            let q = -0.5 * (b1 + b1.signum() * disc.sqrt());
            let mut roots = if q == 0.0 { vec![0.0, 0.0] } else { vec![q / b2, b0 / q] };
            roots.sort_by(|a, b| b.total_cmp(a));
            Some(roots)
        }
    } else if b1 != 0.0 {
        Some(vec![-b0 / b1])
    } else if b0 != 0.0 {
        Some(Vec::new())
    } else {
        None
    })
}

/// Largest relative residual of the constant `r` as a solution.
fn constant_residual(eq: &RiccatiEquation, r: f64, grid: &Grid) -> Result<(f64, f64), crate::expr::EvalError> {
    let mut worst = (0.0f64, grid.start());
    for &t in grid.points() {
        let [b0, b1, b2] = eq.coefficients_at(t)?;
        let dev = (b0 + b1 * r + b2 * r * r).abs() / (1.0 + b0.abs() + (b1 * r).abs() + (b2 * r * r).abs());
        if dev > worst.0 {
            worst = (dev, t);
        }
    }
    Ok(worst)
}

/// The pattern `b0 = P`, `b1 = Q`, `b2 = k(Q - kP)`, recognised through its
/// constant solution `-1/k`: the curve `(0, -1/k, k, 1)` reduces the
/// equation to the linear `Q/k - P + (Q - 2kP) y`.
pub fn check_rdm05(eq: &RiccatiEquation, grid: &Grid, tol: f64) -> CriterionReport {
    let mut r = CriterionReport::new(CriterionName::Rdm05, DetectionMode::Discovery, grid);
    let points = grid.points();
    let mid = points.len() / 2;
    let order = (0..points.len()).map(|i| if i % 2 == 0 { mid + i / 2 } else { mid - 1 - i / 2 });
    let mut candidates = None;
    for i in order.filter(|&i| i < points.len()) {
        match roots_at(eq, points[i]) {
            Ok(Some(roots)) => {
                candidates = Some(roots);
                break;
            }
            Ok(None) => {}
            Err(e) => return r.reject(format!("coefficients cannot be evaluated: {e}")),
        }
    }
    // A vanishing equation has every constant as a solution.
    let candidates = candidates.unwrap_or_else(|| vec![1.0]);
    if candidates.is_empty() {
        return r.reject("no real constant solution");
    }
    let mut found = None;
    let mut zero_root = false;
    for root in candidates {
        let (dev, at) = try_or_reject!(r, constant_residual(eq, root, grid).map_err(|e| e.to_string()));
        r.record_deviation(dev, at);
        if dev <= tol {
            if root == 0.0 {
                zero_root = true;
            } else {
                found = Some(root);
                break;
            }
        }
    }
    let Some(root) = found else {
        return r.reject(if zero_root {
            "the only constant solution is 0 (Bernoulli case, k must be non-zero)"
        } else {
            "no real constant solution"
        });
    };
    r.diagnostics.max_deviation = None;
    let (dev, at) = try_or_reject!(r, constant_residual(eq, root, grid).map_err(|e| e.to_string()));
    r.record_deviation(dev, at);
    let k = -1.0 / root;
    r.constant("r", root);
    r.constant("k", k);
    let RiccatiEquation { b0: p, b1: q, .. } = eq;
    let curve = CurveSL2::constant(&crate::projline::Mat2::new(0.0, -1.0 / k, k, 1.0));
    let target = RiccatiEquation::new(q / k - p, q - 2.0 * k * p, Expr::zero());
    r.conclude(eq, Reduction::affine(curve, AffineKind::B2Zero, target), grid, tol)
}
