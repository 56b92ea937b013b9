//! SL(2,R)-valued curves and their actions: `Θ` on solutions, the affine
//! action on coefficient triples, and the gauge action on algebra curves.

use thiserror::Error;

use crate::expr::{EvalError, Expr};
use crate::grid::Grid;
use crate::projline::{mobius_apply, ExtReal, Mat2, ProjectiveError, UNIT_DET_TOL};
use crate::riccati::RiccatiEquation;
use crate::sl2::AlgebraCurve;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransformError {
    #[error("curve determinant is {det} at t = {t}, expected 1")]
    NotUnimodular { det: f64, t: f64 },
    #[error("determinant changes sign or vanishes (det = {det} at t = {t})")]
    IndefiniteDeterminant { det: f64, t: f64 },
    #[error(transparent)]
    Projective(#[from] ProjectiveError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A curve `t -> Ā(t) = (ᾱ β̄; γ̄ δ̄)` with symbolic entries.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSL2 {
    pub alpha: Expr,
    pub beta: Expr,
    pub gamma: Expr,
    pub delta: Expr,
}

impl CurveSL2 {
    pub fn new(alpha: Expr, beta: Expr, gamma: Expr, delta: Expr) -> Self {
        CurveSL2 { alpha, beta, gamma, delta }
    }

    pub fn identity() -> Self {
        CurveSL2::constant(&Mat2::IDENTITY)
    }

    pub fn constant(m: &Mat2) -> Self {
        CurveSL2::new(m.a11.into(), m.a12.into(), m.a21.into(), m.a22.into())
    }

    /// `x -> x + c(t)`.
    pub fn translation(c: Expr) -> Self {
        CurveSL2::new(Expr::one(), c, Expr::zero(), Expr::one())
    }

    /// `x -> λ(t) x`, as `(√λ, 0, 0, 1/√λ)`.
    pub fn scaling(lambda: &Expr) -> Self {
        let s = lambda.sqrt();
        CurveSL2::diagonal(s)
    }

    /// `diag(α, 1/α)`.
    pub fn diagonal(alpha: Expr) -> Self {
        let inv = 1.0 / &alpha;
        CurveSL2::new(alpha, Expr::zero(), Expr::zero(), inv)
    }

    /// `x -> -1/x`.
    pub fn inversion() -> Self {
        CurveSL2::constant(&Mat2::new(0.0, 1.0, -1.0, 0.0))
    }

    pub fn entries(&self) -> [&Expr; 4] {
        [&self.alpha, &self.beta, &self.gamma, &self.delta]
    }

    pub fn matrix_at(&self, t: f64) -> Result<Mat2, EvalError> {
        Ok(Mat2::new(
            self.alpha.eval(t)?,
            self.beta.eval(t)?,
            self.gamma.eval(t)?,
            self.delta.eval(t)?,
        ))
    }

    pub fn determinant(&self) -> Expr {
        &self.alpha * &self.delta - &self.beta * &self.gamma
    }

    /// Checks `|det Ā(t) - 1| <= 1e-9` on every grid point.
    pub fn check_unimodular(&self, grid: &Grid) -> Result<(), TransformError> {
        for &t in grid.points() {
            let det = self.matrix_at(t)?.det();
            if !((det - 1.0).abs() <= UNIT_DET_TOL) {
                return Err(TransformError::NotUnimodular { det, t });
            }
        }
        Ok(())
    }

    /// Largest entrywise discrepancy to another curve on a grid.
    pub fn max_entry_gap(&self, other: &CurveSL2, grid: &Grid) -> Result<f64, EvalError> {
        let mut worst = 0.0f64;
        for &t in grid.points() {
            worst = worst.max(self.matrix_at(t)?.max_abs_diff(&other.matrix_at(t)?));
        }
        Ok(worst)
    }
}

impl std::fmt::Display for CurveSL2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.alpha, self.beta, self.gamma, self.delta)
    }
}

/// `Θ(Ā, t, x) = Φ(Ā(t), x)`.
pub fn theta_apply(c: &CurveSL2, t: f64, x: ExtReal) -> Result<ExtReal, TransformError> {
    Ok(mobius_apply(&c.matrix_at(t)?, x)?)
}

/// The coefficients of the equation satisfied by `x' = Θ(Ā, t, x)` when `x`
/// solves `eq`.
pub fn transform_coefficients(eq: &RiccatiEquation, c: &CurveSL2) -> RiccatiEquation {
    let CurveSL2 { alpha: a, beta: b, gamma: g, delta: d } = c;
    let (da, db, dg, dd) = (
        a.differentiate(),
        b.differentiate(),
        g.differentiate(),
        d.differentiate(),
    );
    let RiccatiEquation { b0, b1, b2 } = eq;

    let new_b2 = d * d * b2 - d * g * b1 + g * g * b0 + g * &dd - d * &dg;
    let new_b1 = -2.0 * b * d * b2 + (a * d + b * g) * b1 - 2.0 * a * g * b0 + d * &da - a * &dd
        + b * &dg
        - g * &db;
    let new_b0 = b * b * b2 - a * b * b1 + a * a * b0 + a * &db - b * &da;
    RiccatiEquation::new(new_b0, new_b1, new_b2)
}

#[derive(Clone)]
struct ExprMat([Expr; 4]);

impl ExprMat {
    fn mul(&self, o: &ExprMat) -> ExprMat {
        let [a, b, c, d] = &self.0;
        let [e, f, g, h] = &o.0;
        ExprMat([a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h])
    }

    fn add(&self, o: &ExprMat) -> ExprMat {
        let [a, b, c, d] = &self.0;
        let [e, f, g, h] = &o.0;
        ExprMat([a + e, b + f, c + g, d + h])
    }
}

/// `a'(t) = Ā a Ā⁻¹ + Ā̇ Ā⁻¹`, with the inverse taken as the adjugate of a
/// unimodular matrix.
pub fn gauge_transform_algebra(a: &AlgebraCurve, c: &CurveSL2) -> AlgebraCurve {
    let m = ExprMat([c.alpha.clone(), c.beta.clone(), c.gamma.clone(), c.delta.clone()]);
    let inv = ExprMat([c.delta.clone(), -&c.beta, -&c.gamma, c.alpha.clone()]);
    let dm = ExprMat(m.0.clone().map(|e| e.differentiate()));
    let half_b1 = 0.5 * &a.b1;
    let am = ExprMat([half_b1.clone(), a.b0.clone(), -&a.b2, -half_b1]);
    let out = m.mul(&am).mul(&inv).add(&dm.mul(&inv));
    let [p11, p12, p21, p22] = out.0;
    AlgebraCurve::new(p12, p11 - p22, -p21)
}

/// Pointwise product `c2(t) c1(t)`: first `c1`, then `c2`.
pub fn compose(c2: &CurveSL2, c1: &CurveSL2) -> CurveSL2 {
    let [a, b, c, d] = c2.entries();
    let [e, f, g, h] = c1.entries();
    CurveSL2::new(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
}

/// `(δ̄, -β̄, -γ̄, ᾱ)`.
pub fn inverse(c: &CurveSL2) -> CurveSL2 {
    CurveSL2::new(c.delta.clone(), -&c.beta, -&c.gamma, c.alpha.clone())
}

/// Factors a homography `y' = h(y)` of negative determinant as
/// `h = c ∘ flip` with `flip: y'' = -y` and `c` in SL(2,R).
///
/// `entries` are the coefficients of `h(y) = (αy + β)/(γy + δ)`. The
/// determinant must keep a constant sign on the grid; when it is positive no
/// flip is needed. Either way the result is rescaled by `√|det|` unless the
/// determinant already has modulus one. Returns whether a flip was applied.
pub fn normalize_negative_determinant(
    entries: [Expr; 4],
    grid: &Grid,
) -> Result<(bool, CurveSL2), TransformError> {
    let [a, b, g, d] = entries;
    let det = &a * &d - &b * &g;
    let mut sign = 0.0f64;
    let mut unit = true;
    for &t in grid.points() {
        let v = det.eval(t)?;
        if v == 0.0 || !v.is_finite() || (sign != 0.0 && v.signum() != sign) {
            return Err(TransformError::IndefiniteDeterminant { det: v, t });
        }
        sign = v.signum();
        unit &= (v.abs() - 1.0).abs() <= UNIT_DET_TOL;
    }
    let flip = sign < 0.0;
    let (a, g) = if flip { (-&a, -&g) } else { (a, g) };
    let curve = CurveSL2::new(a, b, g, d);
    if unit {
        return Ok((flip, curve));
    }
    let root = if flip { (-det).sqrt() } else { det.sqrt() };
    let scale = |e: &Expr| e / &root;
    Ok((
        flip,
        CurveSL2::new(
            scale(&curve.alpha),
            scale(&curve.beta),
            scale(&curve.gamma),
            scale(&curve.delta),
        ),
    ))
}
