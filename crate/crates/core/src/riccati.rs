//! The Riccati equation `dx/dt = b0(t) + b1(t) x + b2(t) x²` and the direct
//! numerical integrator used as ground truth by every other module.
//!
//! The integrator is classical fixed-step RK4 on the projective line: it
//! works in the chart `x` while `|x| <= 1` and in the chart `w = -1/x`,
//! where the equation reads `dw/dt = b0 w² - b1 w + b2`, while `|w| <= 1`.
//! Solutions therefore continue through blow-up instead of stopping there.

use std::fmt::Write as _;

use thiserror::Error;

use crate::expr::{EvalError, Expr, ParseError};
use crate::projline::ExtReal;

/// Default RK4 step.
pub const DEFAULT_STEP: f64 = 1e-3;

/// `|w|` at or below this value is recorded as `x = ∞`.
pub const INFINITY_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrationError {
    #[error("step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("invalid interval [{0}, {1}]")]
    InvalidInterval(f64, f64),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A Riccati equation given by its three coefficient functions.
#[derive(Debug, Clone, PartialEq)]
pub struct RiccatiEquation {
    pub b0: Expr,
    pub b1: Expr,
    pub b2: Expr,
}

impl RiccatiEquation {
    pub fn new(b0: Expr, b1: Expr, b2: Expr) -> Self {
        RiccatiEquation { b0, b1, b2 }
    }

    /// Equation with constant coefficients.
    pub fn constant(c0: f64, c1: f64, c2: f64) -> Self {
        RiccatiEquation::new(c0.into(), c1.into(), c2.into())
    }

    pub fn parse(b0: &str, b1: &str, b2: &str) -> Result<Self, ParseError> {
        Ok(RiccatiEquation::new(b0.parse()?, b1.parse()?, b2.parse()?))
    }

    pub fn coefficients(&self) -> [&Expr; 3] {
        [&self.b0, &self.b1, &self.b2]
    }

    pub fn coefficients_at(&self, t: f64) -> Result<[f64; 3], EvalError> {
        Ok([self.b0.eval(t)?, self.b1.eval(t)?, self.b2.eval(t)?])
    }

    /// `b0(t) + b1(t) x + b2(t) x²`.
    pub fn rhs(&self, t: f64, x: f64) -> Result<f64, EvalError> {
        let [b0, b1, b2] = self.coefficients_at(t)?;
        Ok(b0 + b1 * x + b2 * x * x)
    }

    /// The equation satisfied by `w = -1/x`: `(b2, -b1, b0)`.
    pub fn inverted_chart(&self) -> RiccatiEquation {
        RiccatiEquation::new(self.b2.clone(), -&self.b1, self.b0.clone())
    }

    /// The equation multiplied by a scalar function (time reparametrisation).
    pub fn scaled(&self, factor: &Expr) -> RiccatiEquation {
        RiccatiEquation::new(factor * &self.b0, factor * &self.b1, factor * &self.b2)
    }

    /// Residual `|ẋ - rhs(t, x)| / (1 + |rhs|)` of a candidate solution,
    /// maximised over the given points, with the derivative taken
    /// symbolically.
    pub fn max_residual(&self, x: &Expr, points: &[f64]) -> Result<(f64, f64), EvalError> {
        let dx = x.differentiate();
        let mut worst = (0.0f64, f64::NAN);
        for &t in points {
            let rhs = self.rhs(t, x.eval(t)?)?;
            let r = (dx.eval(t)? - rhs).abs() / (1.0 + rhs.abs());
            if r > worst.0 || worst.1.is_nan() {
                worst = (r, t);
            }
        }
        Ok(worst)
    }
}

impl std::fmt::Display for RiccatiEquation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "dx/dt = ({}) + ({})*x + ({})*x^2", self.b0, self.b1, self.b2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub x: ExtReal,
}

/// Samples of a solution curve on the compactified line.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    /// Step used to produce the samples (0 for trajectories that were not
    /// produced by stepping).
    pub step: f64,
    /// Times at which the integrator changed chart.
    pub chart_switches: Vec<f64>,
    /// Set when a coefficient could not be evaluated; the samples stop at the
    /// last successful step.
    pub truncated: Option<EvalError>,
}

impl Trajectory {
    pub fn from_samples(samples: Vec<Sample>, step: f64) -> Self {
        Trajectory {
            samples,
            step,
            chart_switches: Vec::new(),
            truncated: None,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn last(&self) -> Option<Sample> {
        self.samples.last().copied()
    }

    /// Sample times at which the value is ∞ or changes sign through ∞
    /// (consecutive finite samples with opposite signs and magnitude > 1).
    pub fn infinity_crossings(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for pair in self.samples.windows(2) {
            match (pair[0].x, pair[1].x) {
                (_, ExtReal::Infinity) => out.push(pair[1].t),
                (ExtReal::Finite(a), ExtReal::Finite(b)) if a * b < 0.0 && a.abs() > 1.0 && b.abs() > 1.0 => {
                    out.push(pair[1].t)
                }
                _ => {}
            }
        }
        out
    }

    /// CSV with header `t,x`; ∞ is written as `inf`, numbers with 17
    /// significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x\n");
        for s in &self.samples {
            let _ = writeln!(out, "{},{}", format_f64(s.t), format_ext(s.x));
        }
        out
    }
}

/// Fixed 17-significant-digit formatting shared by the CSV and JSON writers.
pub fn format_f64(v: f64) -> String {
    if v == 0.0 {
        // no negative zero in outputs
        return format!("{:.16e}", 0.0);
    }
    format!("{v:.16e}")
}

pub fn format_ext(x: ExtReal) -> String {
    match x {
        ExtReal::Finite(v) => format_f64(v),
        ExtReal::Infinity => "inf".to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Chart {
    /// The state is `x`.
    Direct,
    /// The state is `w = -1/x`.
    Inverted,
}

fn chart_rhs(chart: Chart, [b0, b1, b2]: [f64; 3], y: f64) -> f64 {
    match chart {
        Chart::Direct => b0 + b1 * y + b2 * y * y,
        Chart::Inverted => b0 * y * y - b1 * y + b2,
    }
}

fn chart_point(chart: Chart, y: f64) -> ExtReal {
    match chart {
        Chart::Direct => ExtReal::Finite(y),
        Chart::Inverted if y.abs() <= INFINITY_THRESHOLD => ExtReal::Infinity,
        Chart::Inverted => ExtReal::Finite(-1.0 / y),
    }
}

/// Number of equal steps covering `[ta, tb]` with a step no larger than
/// `step` (up to rounding of the ratio).
pub(crate) fn step_count(ta: f64, tb: f64, step: f64) -> Result<usize, IntegrationError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(IntegrationError::InvalidStep(step));
    }
    if !(ta.is_finite() && tb.is_finite() && ta < tb) {
        return Err(IntegrationError::InvalidInterval(ta, tb));
    }
    let ratio = (tb - ta) / step;
    let n = if (ratio - ratio.round()).abs() < 1e-9 * ratio.max(1.0) {
        ratio.round()
    } else {
        ratio.ceil()
    };
    Ok((n as usize).max(1))
}

/// Integrates `eq` from `x(t_a) = x0` over `[t_a, t_b]` with classical RK4.
///
/// The step is adjusted to `(t_b - t_a)/n` for the smallest `n` with
/// `(t_b - t_a)/n <= step`. After every step the chart is switched to
/// `w = -1/x` when `|x| > 1` and back when `|w| > 1`. A coefficient domain
/// error does not fail the call: the trajectory is truncated and the error
/// recorded in [`Trajectory::truncated`].
pub fn integrate_direct(
    eq: &RiccatiEquation,
    x0: ExtReal,
    (ta, tb): (f64, f64),
    step: f64,
) -> Result<Trajectory, IntegrationError> {
    let n = step_count(ta, tb, step)?;
    let h = (tb - ta) / n as f64;
    let (mut chart, mut y) = match x0 {
        ExtReal::Finite(x) if x.abs() <= 1.0 => (Chart::Direct, x),
        ExtReal::Finite(x) => (Chart::Inverted, -1.0 / x),
        ExtReal::Infinity => (Chart::Inverted, 0.0),
    };
    let mut traj = Trajectory {
        samples: Vec::with_capacity(n + 1),
        step: h,
        chart_switches: Vec::new(),
        truncated: None,
    };
    traj.samples.push(Sample { t: ta, x: x0 });

    let mut c_start = match eq.coefficients_at(ta) {
        Ok(c) => c,
        Err(e) => {
            traj.truncated = Some(e);
            return Ok(traj);
        }
    };
    for i in 0..n {
        let t = ta + i as f64 * h;
        let t_next = if i + 1 == n { tb } else { ta + (i + 1) as f64 * h };
        let coeffs = eq
            .coefficients_at(t + 0.5 * h)
            .and_then(|mid| eq.coefficients_at(t_next).map(|end| (mid, end)));
        let (c_mid, c_end) = match coeffs {
            Ok(c) => c,
            Err(e) => {
                traj.truncated = Some(e);
                break;
            }
        };
        let k1 = chart_rhs(chart, c_start, y);
        let k2 = chart_rhs(chart, c_mid, y + 0.5 * h * k1);
        let k3 = chart_rhs(chart, c_mid, y + 0.5 * h * k2);
        let k4 = chart_rhs(chart, c_end, y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !y.is_finite() {
            traj.truncated = Some(EvalError {
                kind: crate::expr::EvalErrorKind::NonFinite,
                subexpr: "integrator state".into(),
                t: t_next,
            });
            break;
        }
        traj.samples.push(Sample {
            t: t_next,
            x: chart_point(chart, y),
        });
        if y.abs() > 1.0 && y.abs().is_finite() {
            chart = match chart {
                Chart::Direct => Chart::Inverted,
                Chart::Inverted => Chart::Direct,
            };
            y = -1.0 / y;
            traj.chart_switches.push(t_next);
        }
        c_start = c_end;
    }
    Ok(traj)
}

/// Maximum relative gap `|a - b| / (1 + |b|)` between two trajectories on
/// their common sample times, ignoring samples where either value is ∞ or
/// exceeds `pole_guard` in magnitude.
pub fn max_trajectory_gap(a: &Trajectory, b: &Trajectory, pole_guard: f64) -> f64 {
    let mut worst = 0.0f64;
    let mut j = 0;
    for sa in &a.samples {
        while j < b.samples.len() && b.samples[j].t < sa.t - 1e-12 * (1.0 + sa.t.abs()) {
            j += 1;
        }
        let Some(sb) = b.samples.get(j) else { break };
        if (sb.t - sa.t).abs() > 1e-12 * (1.0 + sa.t.abs()) {
            continue;
        }
        if let (ExtReal::Finite(x), ExtReal::Finite(y)) = (sa.x, sb.x) {
            if x.abs() <= pole_guard && y.abs() <= pole_guard {
                worst = worst.max(crate::grid::relative_gap(x, y));
            }
        }
    }
    worst
}
