//! Integration by quadratures: linear and Bernoulli equations, reductions
//! from one or two known particular solutions, the three-solution
//! superposition rule, and autonomous and separable equations.
//!
//! Closed forms are returned as a homogeneous pair `[num(t) : den(t)]` so
//! that a solution passing through ∞ stays representable.

use std::fmt;

use thiserror::Error;

use crate::expr::{EvalError, Expr};
use crate::grid::Grid;
use crate::projline::ExtReal;
use crate::riccati::{RiccatiEquation, Sample, Trajectory};

/// Residual threshold for accepting a caller-supplied particular solution.
pub const KNOWN_SOLUTION_TOL: f64 = 1e-8;

/// Absolute threshold for "this coefficient vanishes identically".
pub const VANISHING_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("{coefficient} is not identically zero (|{coefficient}| = {value} at t = {t})")]
    NonVanishingCoefficient {
        coefficient: &'static str,
        value: f64,
        t: f64,
    },
    #[error("supplied solution `{solution}` fails the equation: residual {residual} at t = {t}")]
    NotASolution { solution: String, residual: f64, t: f64 },
    #[error("particular solutions coincide on the grid")]
    CoincidentSolutions,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Which procedure produced a solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    Linear,
    Bernoulli,
    OneKnownSolution,
    TwoKnownSolutions,
    Autonomous,
    Separable,
    /// Pulled back from a reduction found by the named detector.
    Criterion(String),
    DirectIntegration,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Linear => f.write_str("linear"),
            Provenance::Bernoulli => f.write_str("bernoulli"),
            Provenance::OneKnownSolution => f.write_str("one_known_solution"),
            Provenance::TwoKnownSolutions => f.write_str("two_known_solutions"),
            Provenance::Autonomous => f.write_str("autonomous"),
            Provenance::Separable => f.write_str("separable"),
            Provenance::Criterion(name) => write!(f, "criterion:{name}"),
            Provenance::DirectIntegration => f.write_str("direct_integration"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolutionKind {
    /// `x(t) = numerator(t) / denominator(t)` on the projective line.
    ClosedForm { numerator: Expr, denominator: Expr },
    TrajectoryOnly(Trajectory),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionForm {
    pub kind: SolutionKind,
    pub provenance: Provenance,
}

impl SolutionForm {
    pub fn closed(numerator: Expr, denominator: Expr, provenance: Provenance) -> Self {
        SolutionForm {
            kind: SolutionKind::ClosedForm { numerator, denominator },
            provenance,
        }
    }

    pub fn expression(x: Expr, provenance: Provenance) -> Self {
        SolutionForm::closed(x, Expr::one(), provenance)
    }

    /// The closed form as a single expression, if there is one.
    pub fn as_expr(&self) -> Option<Expr> {
        match &self.kind {
            SolutionKind::ClosedForm { numerator, denominator } if denominator.is_const(1.0) => {
                Some(numerator.clone())
            }
            SolutionKind::ClosedForm { numerator, denominator } => Some(numerator / denominator),
            SolutionKind::TrajectoryOnly(_) => None,
        }
    }

    /// The homogeneous pair of a closed form.
    pub fn homogeneous(&self) -> Option<(Expr, Expr)> {
        match &self.kind {
            SolutionKind::ClosedForm { numerator, denominator } => Some((numerator.clone(), denominator.clone())),
            SolutionKind::TrajectoryOnly(_) => None,
        }
    }

    /// Value at `t`; for trajectory-only solutions `t` must be a sample time.
    pub fn eval_at(&self, t: f64) -> Result<ExtReal, EvalError> {
        match &self.kind {
            SolutionKind::ClosedForm { numerator, denominator } => {
                Ok(ExtReal::from_homogeneous(numerator.eval(t)?, denominator.eval(t)?))
            }
            SolutionKind::TrajectoryOnly(traj) => traj
                .samples
                .iter()
                .find(|s| (s.t - t).abs() <= 1e-12 * (1.0 + t.abs()))
                .map(|s| s.x)
                .ok_or_else(|| EvalError {
                    kind: crate::expr::EvalErrorKind::NonFinite,
                    subexpr: "trajectory sample".into(),
                    t,
                }),
        }
    }

    /// Samples the solution; stops at the first evaluation failure and records
    /// it as a truncation.
    pub fn sample(&self, times: &[f64]) -> Trajectory {
        let mut samples = Vec::with_capacity(times.len());
        let mut truncated = None;
        for &t in times {
            match self.eval_at(t) {
                Ok(x) => samples.push(Sample { t, x }),
                Err(e) => {
                    truncated = Some(e);
                    break;
                }
            }
        }
        let step = if times.len() > 1 { times[1] - times[0] } else { 0.0 };
        let mut traj = Trajectory::from_samples(samples, step);
        traj.truncated = truncated;
        traj
    }
}

fn ensure_vanishes(coefficient: &'static str, e: &Expr, grid: &Grid) -> Result<(), SolverError> {
    for &t in grid.points() {
        let value = e.eval(t)?.abs();
        if !(value <= VANISHING_TOL) {
            return Err(SolverError::NonVanishingCoefficient { coefficient, value, t });
        }
    }
    Ok(())
}

/// Checks that `x` solves `eq` on the grid within [`KNOWN_SOLUTION_TOL`].
pub fn verify_solution(eq: &RiccatiEquation, x: &Expr, grid: &Grid) -> Result<(), SolverError> {
    let (residual, t) = eq.max_residual(x, grid.points())?;
    if residual <= KNOWN_SOLUTION_TOL {
        Ok(())
    } else {
        Err(SolverError::NotASolution {
            solution: x.to_string(),
            residual,
            t,
        })
    }
}

/// `dx/dt = b0 + b1 x` with `x(t0) = x0`:
/// `x = E(t)(x0 + ∫_{t0}^t b0/E)` with `E = exp(∫_{t0}^t b1)`.
pub fn solve_linear(
    eq: &RiccatiEquation,
    t0: f64,
    x0: ExtReal,
    grid: &Grid,
) -> Result<SolutionForm, SolverError> {
    ensure_vanishes("b2", &eq.b2, grid)?;
    let growth = eq.b1.integral_from(t0)?;
    let (p, q) = x0.homogeneous();
    let forcing = (&eq.b0 * (-&growth).exp()).integral_from(t0)?;
    let numerator = growth.exp() * (p + q * &forcing);
    Ok(SolutionForm::closed(numerator, q.into(), Provenance::Linear))
}

/// `dx/dt = b1 x + b2 x²` through the linear equation for `w = -1/x`.
/// With `x0 = [p : q]` the solution is `p e^{G} / (q - p ∫ b2 e^{G})`,
/// `G = ∫_{t0}^t b1`.
pub fn solve_bernoulli(
    eq: &RiccatiEquation,
    t0: f64,
    x0: ExtReal,
    grid: &Grid,
) -> Result<SolutionForm, SolverError> {
    ensure_vanishes("b0", &eq.b0, grid)?;
    let (num, den) = bernoulli_pair(&eq.b1, &eq.b2, t0, x0.homogeneous())?;
    Ok(SolutionForm::closed(num, den, Provenance::Bernoulli))
}

fn bernoulli_pair(b1: &Expr, b2: &Expr, t0: f64, (p, q): (f64, f64)) -> Result<(Expr, Expr), EvalError> {
    if p == 0.0 {
        return Ok((Expr::zero(), Expr::one()));
    }
    let growth = b1.integral_from(t0)?;
    let e = growth.exp();
    let j = (b2 * &e).integral_from(t0)?;
    Ok((p * e, q - p * j))
}

/// One known solution `x1`: `z = x - x1` solves the Bernoulli equation with
/// linear coefficient `b1 + 2 b2 x1`, integrated by two quadratures.
pub fn reduce_with_known_solution(
    eq: &RiccatiEquation,
    x1: &Expr,
    t0: f64,
    x0: ExtReal,
    grid: &Grid,
) -> Result<SolutionForm, SolverError> {
    verify_solution(eq, x1, grid)?;
    let (p, q) = x0.homogeneous();
    let x10 = x1.eval(t0)?;
    let g = &eq.b1 + 2.0 * &eq.b2 * x1;
    let (num, den) = bernoulli_pair(&g, &eq.b2, t0, (p - x10 * q, q))?;
    let numerator = x1 * &den + num;
    Ok(SolutionForm::closed(numerator, den, Provenance::OneKnownSolution))
}

/// Two known solutions: `z = (x - x1)/(x - x2)` obeys `ż = b2 (x1 - x2) z`,
/// so one quadrature suffices.
pub fn solve_with_two_solutions(
    eq: &RiccatiEquation,
    x1: &Expr,
    x2: &Expr,
    t0: f64,
    x0: ExtReal,
    grid: &Grid,
) -> Result<SolutionForm, SolverError> {
    verify_solution(eq, x1, grid)?;
    verify_solution(eq, x2, grid)?;
    ensure_distinct(&[x1, x2], grid)?;
    let (p, q) = x0.homogeneous();
    let (x10, x20) = (x1.eval(t0)?, x2.eval(t0)?);
    let (u, v) = (p - x20 * q, p - x10 * q);
    let e = (&eq.b2 * (x1 - x2)).integral_from(t0)?.exp();
    let ve = v * e;
    let numerator = u * x1 - &ve * x2;
    let denominator = u - ve;
    Ok(SolutionForm::closed(numerator, denominator, Provenance::TwoKnownSolutions))
}

fn ensure_distinct(xs: &[&Expr], grid: &Grid) -> Result<(), SolverError> {
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            let mut differ = false;
            for &t in grid.points() {
                let (a, b) = (xs[i].eval(t)?, xs[j].eval(t)?);
                if (a - b).abs() > VANISHING_TOL * (1.0 + a.abs()) {
                    differ = true;
                    break;
                }
            }
            if !differ {
                return Err(SolverError::CoincidentSolutions);
            }
        }
    }
    Ok(())
}

/// The solution whose cross-ratio with `(x1, x2, x3)` is the constant `k`:
/// `k = 0` gives `x1`, `k = 1` gives `x3` and `k = ∞` gives `x2`.
pub fn superpose_three(
    x1: &Expr,
    x2: &Expr,
    x3: &Expr,
    k: ExtReal,
    grid: &Grid,
) -> Result<Expr, SolverError> {
    ensure_distinct(&[x1, x2, x3], grid)?;
    Ok(match k {
        ExtReal::Infinity => x2.clone(),
        ExtReal::Finite(k) if k == 0.0 => x1.clone(),
        ExtReal::Finite(k) => {
            let d32 = x3 - x2;
            let d31 = x3 - x1;
            (x1 * &d32 - k * x2 * &d31) / (d32 - k * d31)
        }
    })
}

/// Closed form of `dx/ds = c0 + c1 x + c2 x²` after elapsed time `s`, from
/// `x = [p : q]` at `s = 0`.
pub(crate) fn autonomous_pair([c0, c1, c2]: [f64; 3], (p, q): (f64, f64), s: &Expr) -> (Expr, Expr) {
    if c2 == 0.0 {
        if c1 == 0.0 {
            return (p + c0 * q * s, q.into());
        }
        let shift = c0 / c1;
        let e = (c1 * s).exp();
        return ((p + shift * q) * e - shift * q, q.into());
    }
    let disc = c1 * c1 - 4.0 * c0 * c2;
    if disc > 0.0 {
        let root = disc.sqrt();
        let r1 = (-c1 + root) / (2.0 * c2);
        let r2 = (-c1 - root) / (2.0 * c2);
        let (u, v) = (p - r2 * q, p - r1 * q);
        let ve = v * (c2 * (r1 - r2) * s).exp();
        (r1 * u - r2 * &ve, u - ve)
    } else if disc == 0.0 {
        let r = -c1 / (2.0 * c2);
        let u = p - r * q;
        let den = q - c2 * u * s;
        (r * &den + u, den)
    } else {
        let centre = -c1 / (2.0 * c2);
        let width = (-disc).sqrt() / (2.0 * c2.abs());
        let theta0 = (p - centre * q).atan2(width * q);
        let phase = c2 * width * s + theta0;
        let (cos, sin) = (phase.cos(), phase.sin());
        (centre * &cos + width * sin, cos)
    }
}

/// `dx/dt = c0 + c1 x + c2 x²` with `x(t0) = x0`, by the sign of the
/// discriminant `c1² - 4 c0 c2`: two constant solutions, a double one, or the
/// tangent form with periodic passages through ∞.
pub fn solve_autonomous(c: [f64; 3], t0: f64, x0: ExtReal) -> SolutionForm {
    let s = Expr::t() - t0;
    let (num, den) = autonomous_pair(c, x0.homogeneous(), &s);
    SolutionForm::closed(num, den, Provenance::Autonomous)
}

/// `dx/dt = φ(t)(c0 + c1 x + c2 x²)`: the autonomous solution evaluated at
/// `τ(t) = ∫_{t0}^t φ`.
pub fn solve_separable(phi: &Expr, c: [f64; 3], t0: f64, x0: ExtReal) -> Result<SolutionForm, SolverError> {
    let tau = match phi.as_const() {
        Some(k) => k * (Expr::t() - t0),
        None => phi.integral_from(t0)?,
    };
    let (num, den) = autonomous_pair(c, x0.homogeneous(), &tau);
    Ok(SolutionForm::closed(num, den, Provenance::Separable))
}
