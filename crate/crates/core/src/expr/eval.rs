use std::fmt;

use thiserror::Error;

use super::{Expr, Func, Node};

/// Absolute tolerance requested from the quadrature behind `integral(...)`.
pub const QUADRATURE_TOL: f64 = 1e-12;

/// Relative floor applied on top of [`QUADRATURE_TOL`] so that integrals of
/// large magnitude do not ask for more digits than an f64 carries.
const QUADRATURE_REL_FLOOR: f64 = 1e-14;

const MAX_SUBINTERVALS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalErrorKind {
    LogOfNonPositive,
    SqrtOfNegative,
    DivisionByZero,
    /// The value overflowed or became NaN.
    NonFinite,
    QuadratureNonConvergence,
}

impl fmt::Display for EvalErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EvalErrorKind::LogOfNonPositive => "log of a non-positive value",
            EvalErrorKind::SqrtOfNegative => "sqrt of a negative value",
            EvalErrorKind::DivisionByZero => "division by zero",
            EvalErrorKind::NonFinite => "non-finite value",
            EvalErrorKind::QuadratureNonConvergence => "quadrature did not converge",
        };
        f.write_str(s)
    }
}

/// Evaluation failure: what went wrong, in which subexpression, and where.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} in `{subexpr}` at t = {t}")]
pub struct EvalError {
    pub kind: EvalErrorKind,
    pub subexpr: String,
    pub t: f64,
}

impl EvalError {
    fn new(kind: EvalErrorKind, e: &Expr, t: f64) -> Self {
        let mut subexpr = e.to_string();
        if subexpr.len() > 200 {
            subexpr.truncate(197);
            subexpr.push_str("...");
        }
        EvalError { kind, subexpr, t }
    }
}

pub(super) fn apply_func(f: Func, x: f64) -> Result<f64, EvalErrorKind> {
    Ok(match f {
        Func::Sqrt => {
            if x < 0.0 {
                return Err(EvalErrorKind::SqrtOfNegative);
            }
            x.sqrt()
        }
        Func::Exp => x.exp(),
        Func::Log => {
            if x <= 0.0 {
                return Err(EvalErrorKind::LogOfNonPositive);
            }
            x.ln()
        }
        Func::Sin => x.sin(),
        Func::Cos => x.cos(),
        Func::Tan => x.tan(),
        Func::Tanh => x.tanh(),
        Func::Arctan => x.atan(),
    })
}

pub(super) fn eval(e: &Expr, t: f64) -> Result<f64, EvalError> {
    let value = match e.node() {
        Node::Const(c) => return Ok(*c),
        Node::Var => return Ok(t),
        Node::Neg(a) => -eval(a, t)?,
        Node::Add(a, b) => eval(a, t)? + eval(b, t)?,
        Node::Sub(a, b) => eval(a, t)? - eval(b, t)?,
        Node::Mul(a, b) => eval(a, t)? * eval(b, t)?,
        Node::Div(a, b) => {
            let num = eval(a, t)?;
            let den = eval(b, t)?;
            if den == 0.0 {
                return Err(EvalError::new(EvalErrorKind::DivisionByZero, e, t));
            }
            num / den
        }
        Node::Pow(a, n) => {
            let base = eval(a, t)?;
            if base == 0.0 && *n < 0 {
                return Err(EvalError::new(EvalErrorKind::DivisionByZero, e, t));
            }
            base.powi(*n)
        }
        Node::Call(f, a) => {
            let x = eval(a, t)?;
            apply_func(*f, x).map_err(|kind| EvalError::new(kind, e, t))?
        }
        Node::Integral(a) => {
            let (value, converged) = integrate(|s| eval(a, s), 0.0, t)?;
            if !converged {
                return Err(EvalError::new(EvalErrorKind::QuadratureNonConvergence, e, t));
            }
            value
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(EvalError::new(EvalErrorKind::NonFinite, e, t))
    }
}

// Gauss–Kronrod 7/15 abscissae and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for the abscissae XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod<F, E>(f: &F, a: f64, b: f64) -> Result<(f64, f64), E>
where
    F: Fn(f64) -> Result<f64, E>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = half * XGK[i];
        let sum = f(center - dx)? + f(center + dx)?;
        kronrod += WGK[i] * sum;
        if i % 2 == 1 {
            gauss += WG[i / 2] * sum;
        }
    }
    Ok((kronrod * half, ((kronrod - gauss) * half).abs()))
}

/// Globally adaptive Gauss–Kronrod quadrature of `f` over `[a, b]`
/// (`b < a` allowed). Returns the estimate and whether the error target
/// `max(QUADRATURE_TOL, 1e-14 |I|)` was met within the subdivision budget.
pub fn integrate<F, E>(f: F, a: f64, b: f64) -> Result<(f64, bool), E>
where
    F: Fn(f64) -> Result<f64, E>,
{
    if a == b {
        return Ok((0.0, true));
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let (v, err) = gauss_kronrod(&f, lo, hi)?;
    let mut intervals = vec![(lo, hi, v, err)];
    let mut total = v;
    let mut total_err = err;
    loop {
        let target = QUADRATURE_TOL.max(QUADRATURE_REL_FLOOR * total.abs());
        if total_err <= target {
            return Ok((sign * total, true));
        }
        if intervals.len() >= MAX_SUBINTERVALS {
            return Ok((sign * total, false));
        }
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .expect("nonempty");
        let (l, h, v, e) = intervals.swap_remove(worst);
        let mid = 0.5 * (l + h);
        if mid <= l || mid >= h {
            return Ok((sign * total, false));
        }
        let (v1, e1) = gauss_kronrod(&f, l, mid)?;
        let (v2, e2) = gauss_kronrod(&f, mid, h)?;
        total += v1 + v2 - v;
        total_err += e1 + e2 - e;
        intervals.push((l, mid, v1, e1));
        intervals.push((mid, h, v2, e2));
    }
}
