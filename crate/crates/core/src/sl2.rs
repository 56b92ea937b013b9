//! Curves in sl(2,R), the matrix equation `Ȧ = a(t) A` on SL(2,R), and the
//! reconstruction of Riccati solutions as `x(t) = Φ(A(t), x0)`.
//!
//! Sign convention: the Riccati equation `(b0, b1, b2)` corresponds to
//! `a(t) = b0 M0 + b1 M1 + b2 M2 = (b1/2, b0; -b2, -b1/2)`. With this sign
//! `Φ(A(t), x0)` solves the equation (for `a = M0` one gets
//! `A = (1 t; 0 1)` and `x = x0 + t`, a solution of `dx/dt = 1`).

use thiserror::Error;

use crate::expr::{EvalError, Expr};
use crate::projline::{mobius_apply, ExtReal, Mat2};
use crate::riccati::{step_count, IntegrationError, RiccatiEquation, Sample, Trajectory};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Sl2Error {
    #[error("the direction of a one-dimensional target must be non-zero")]
    ZeroDirection,
    #[error("determinant left SL(2,R) during integration (det = {det} at t = {t})")]
    LostUnimodularity { det: f64, t: f64 },
    #[error(transparent)]
    Integration(#[from] IntegrationError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// The curve `a(t) = b0(t) M0 + b1(t) M1 + b2(t) M2` of traceless matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraCurve {
    pub b0: Expr,
    pub b1: Expr,
    pub b2: Expr,
}

impl AlgebraCurve {
    pub fn new(b0: Expr, b1: Expr, b2: Expr) -> Self {
        AlgebraCurve { b0, b1, b2 }
    }

    pub fn from_riccati(eq: &RiccatiEquation) -> Self {
        algebra_curve_from_riccati(eq)
    }

    pub fn to_riccati(&self) -> RiccatiEquation {
        RiccatiEquation::new(self.b0.clone(), self.b1.clone(), self.b2.clone())
    }

    pub fn matrix_at(&self, t: f64) -> Result<Mat2, EvalError> {
        Ok(Mat2::from_algebra(
            self.b0.eval(t)?,
            self.b1.eval(t)?,
            self.b2.eval(t)?,
        ))
    }
}

/// Carries the coefficient triple over to the M-basis verbatim.
pub fn algebra_curve_from_riccati(eq: &RiccatiEquation) -> AlgebraCurve {
    AlgebraCurve::new(eq.b0.clone(), eq.b1.clone(), eq.b2.clone())
}

/// Samples of a curve in SL(2,R) starting at the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupTrajectory {
    pub samples: Vec<(f64, Mat2)>,
}

impl GroupTrajectory {
    pub fn max_det_defect(&self) -> f64 {
        self.samples
            .iter()
            .map(|(_, a)| (a.det() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// CSV with header `t,a11,a12,a21,a22`.
    pub fn to_csv(&self) -> String {
        use crate::riccati::format_f64;
        let mut out = String::from("t,a11,a12,a21,a22\n");
        for (t, a) in &self.samples {
            out.push_str(&format_f64(*t));
            for v in a.entries() {
                out.push(',');
                out.push_str(&format_f64(v));
            }
            out.push('\n');
        }
        out
    }
}

/// Solves `Ȧ = a(t) A`, `A(t_a) = I` by RK4 on the four entries, rescaling
/// `A <- A / sqrt(det A)` after every step.
pub fn integrate_group_equation(
    a: &AlgebraCurve,
    (ta, tb): (f64, f64),
    step: f64,
) -> Result<GroupTrajectory, Sl2Error> {
    let n = step_count(ta, tb, step)?;
    let h = (tb - ta) / n as f64;
    let mut samples = Vec::with_capacity(n + 1);
    let mut m = Mat2::IDENTITY;
    samples.push((ta, m));
    let mut a_start = a.matrix_at(ta)?;
    for i in 0..n {
        let t = ta + i as f64 * h;
        let t_next = if i + 1 == n { tb } else { ta + (i + 1) as f64 * h };
        let a_mid = a.matrix_at(t + 0.5 * h)?;
        let a_end = a.matrix_at(t_next)?;
        let k1 = a_start * m;
        let k2 = a_mid * m.add(&k1.scale(0.5 * h));
        let k3 = a_mid * m.add(&k2.scale(0.5 * h));
        let k4 = a_end * m.add(&k3.scale(h));
        let incr = k1.add(&k2.scale(2.0)).add(&k3.scale(2.0)).add(&k4);
        m = m.add(&incr.scale(h / 6.0));
        let det = m.det();
        if !(det > 0.0 && det.is_finite()) {
            return Err(Sl2Error::LostUnimodularity { det, t: t_next });
        }
        m = m.scale(1.0 / det.sqrt());
        samples.push((t_next, m));
        a_start = a_end;
    }
    Ok(GroupTrajectory { samples })
}

/// `x(t) = Φ(A(t), x0)` at the sample times of `g`.
pub fn reconstruct_solution(g: &GroupTrajectory, x0: ExtReal) -> Trajectory {
    let samples = g
        .samples
        .iter()
        .map(|(t, a)| Sample {
            t: *t,
            x: mobius_apply(a, x0).expect("group trajectory stays unimodular"),
        })
        .collect();
    let step = if g.samples.len() > 1 {
        g.samples[1].0 - g.samples[0].0
    } else {
        0.0
    };
    Trajectory::from_samples(samples, step)
}

/// Which half of sl(2,R) an affine (two-dimensional solvable) target lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AffineKind {
    /// `⟨M0, M1⟩`: the target has `b2 ≡ 0` (inhomogeneous linear equation).
    B2Zero,
    /// `⟨M1, M2⟩`: the target has `b0 ≡ 0` (Bernoulli equation).
    B0Zero,
}

/// A solvable subalgebra that a reduction lands in.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetSubalgebra {
    /// `⟨c0 M0 + c1 M1 + c2 M2⟩` traversed at rate `rate(t)`; the target
    /// equation is `dy/dt = rate(t) (c0 + c1 y + c2 y²)`.
    OneDimensional { direction: [f64; 3], rate: Expr },
    AffineSolvable(AffineKind),
}

impl TargetSubalgebra {
    pub fn one_dimensional(direction: [f64; 3], rate: Expr) -> Self {
        TargetSubalgebra::OneDimensional { direction, rate }
    }

    /// The target Riccati equation of a one-dimensional target.
    pub fn equation(&self) -> Option<RiccatiEquation> {
        match self {
            TargetSubalgebra::OneDimensional { direction: [c0, c1, c2], rate } => Some(RiccatiEquation::new(
                rate * *c0,
                rate * *c1,
                rate * *c2,
            )),
            TargetSubalgebra::AffineSolvable(_) => None,
        }
    }
}

/// `exp(N)` for a traceless 2×2 matrix, via `exp(N) = cosh(μ) I + sinh(μ)/μ N`
/// with `μ² = -det N` (trigonometric when `det N > 0`, `I + N` when
/// `det N = 0`).
pub fn exp_traceless(n: &Mat2) -> Mat2 {
    let mu2 = -n.det();
    let (c, s) = if mu2 > 0.0 {
        let mu = mu2.sqrt();
        (mu.cosh(), mu.sinh() / mu)
    } else if mu2 < 0.0 {
        let omega = (-mu2).sqrt();
        (omega.cos(), omega.sin() / omega)
    } else {
        (1.0, 1.0)
    };
    Mat2::IDENTITY.scale(c).add(&n.scale(s))
}

/// Closed-form group solution `A'(t) = exp(τ(t) N)` of a one-dimensional
/// target, with `τ(t) = ∫_{t_a}^t rate` evaluated by quadrature.
pub fn solve_one_dimensional_target(
    target: &TargetSubalgebra,
    (ta, tb): (f64, f64),
    step: f64,
) -> Result<GroupTrajectory, Sl2Error> {
    let TargetSubalgebra::OneDimensional { direction: [c0, c1, c2], rate } = target else {
        return Err(Sl2Error::ZeroDirection);
    };
    if *c0 == 0.0 && *c1 == 0.0 && *c2 == 0.0 {
        return Err(Sl2Error::ZeroDirection);
    }
    let n_dir = Mat2::from_algebra(*c0, *c1, *c2);
    let tau = rate.integral_from(ta)?;
    let n = step_count(ta, tb, step)?;
    let h = (tb - ta) / n as f64;
    let mut samples = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let t = if i == n { tb } else { ta + i as f64 * h };
        let s = if i == 0 { 0.0 } else { tau.eval(t)? };
        samples.push((t, exp_traceless(&n_dir.scale(s))));
    }
    Ok(GroupTrajectory { samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algebra_curve_examples() {
        let a = algebra_curve_from_riccati(&RiccatiEquation::constant(1.0, 0.0, 0.0));
        assert_eq!(a.matrix_at(0.3).unwrap(), Mat2::M0);
        let a = algebra_curve_from_riccati(&RiccatiEquation::constant(0.0, 1.0, 0.0));
        assert_eq!(a.matrix_at(0.3).unwrap(), Mat2::M1);
        let a = algebra_curve_from_riccati(&RiccatiEquation::constant(0.0, 0.0, 0.0));
        assert_eq!(a.matrix_at(0.3).unwrap(), Mat2::ZERO);
    }

    #[test]
    fn zero_curve_stays_at_identity() {
        let a = AlgebraCurve::new(0.0.into(), 0.0.into(), 0.0.into());
        let g = integrate_group_equation(&a, (0.0, 1.0), 1e-2).unwrap();
        assert!(g.samples.iter().all(|(_, m)| *m == Mat2::IDENTITY));
    }

    #[test]
    fn dilation_generator() {
        let a = AlgebraCurve::new(0.0.into(), 1.0.into(), 0.0.into());
        let g = integrate_group_equation(&a, (0.0, 2.0), 1e-3).unwrap();
        for (t, m) in &g.samples {
            let exact = Mat2::new((t / 2.0).exp(), 0.0, 0.0, (-t / 2.0).exp());
            assert!(m.max_abs_diff(&exact) <= 1e-8);
        }
        assert!(g.max_det_defect() <= 1e-9);
    }

    #[test]
    fn translation_generator_fixes_the_sign_convention() {
        let eq = RiccatiEquation::constant(1.0, 0.0, 0.0);
        let g = integrate_group_equation(&algebra_curve_from_riccati(&eq), (0.0, 1.0), 1e-3).unwrap();
        for (t, m) in &g.samples {
            assert!(m.max_abs_diff(&Mat2::new(1.0, *t, 0.0, 1.0)) <= 1e-12);
        }
        let x = reconstruct_solution(&g, 2.0.into());
        assert!((x.last().unwrap().x.finite().unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn reconstruction_through_infinity() {
        let a = AlgebraCurve::new(0.0.into(), 0.0.into(), 1.0.into());
        let g = integrate_group_equation(&a, (0.0, 2.0), 1e-3).unwrap();
        let x = reconstruct_solution(&g, 1.0.into());
        assert_eq!(x.samples[1000].x, ExtReal::Infinity);
        for s in &x.samples {
            if let ExtReal::Finite(v) = s.x {
                if (s.t - 1.0).abs() > 1e-2 {
                    assert!((v - 1.0 / (1.0 - s.t)).abs() <= 1e-9 * (1.0 + v.abs()));
                }
            }
        }
    }

    #[test]
    fn identity_group_trajectory_reconstructs_constant() {
        let g = GroupTrajectory {
            samples: vec![(0.0, Mat2::IDENTITY), (1.0, Mat2::IDENTITY)],
        };
        let x = reconstruct_solution(&g, ExtReal::Infinity);
        assert!(x.samples.iter().all(|s| s.x == ExtReal::Infinity));
    }

    #[test]
    fn exponential_branches() {
        let t = 0.7;
        assert_eq!(exp_traceless(&Mat2::M0.scale(t)), Mat2::new(1.0, t, 0.0, 1.0));
        let d = exp_traceless(&Mat2::M1.scale(t));
        assert!(d.max_abs_diff(&Mat2::new((t / 2.0).exp(), 0.0, 0.0, (-t / 2.0).exp())) < 1e-15);
        let rot = exp_traceless(&Mat2::from_algebra(1.0, 0.0, 1.0).scale(std::f64::consts::FRAC_PI_2));
        assert!(rot.max_abs_diff(&Mat2::new(0.0, 1.0, -1.0, 0.0)) < 1e-15);
    }

    #[test]
    fn one_dimensional_target_matches_group_integration() {
        for dir in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.5, -1.0, 2.0]] {
            let target = TargetSubalgebra::one_dimensional(dir, "1 + t/2".parse().unwrap());
            let closed = solve_one_dimensional_target(&target, (0.0, 2.0), 1e-2).unwrap();
            let eq = target.equation().unwrap();
            let numeric = integrate_group_equation(&algebra_curve_from_riccati(&eq), (0.0, 2.0), 1e-3).unwrap();
            for (i, (t, m)) in closed.samples.iter().enumerate() {
                let (tn, mn) = numeric.samples[i * 10];
                assert!((t - tn).abs() < 1e-12);
                assert!(m.max_abs_diff(&mn) <= 1e-8, "{dir:?} at {t}");
            }
        }
    }

    #[test]
    fn zero_direction_is_rejected() {
        let target = TargetSubalgebra::one_dimensional([0.0; 3], 1.0.into());
        assert_eq!(
            solve_one_dimensional_target(&target, (0.0, 1.0), 0.1),
            Err(Sl2Error::ZeroDirection)
        );
    }

    #[test]
    fn csv_header() {
        let g = GroupTrajectory { samples: vec![(0.0, Mat2::IDENTITY)] };
        assert!(g.to_csv().starts_with("t,a11,a12,a21,a22\n0.0000000000000000e0,1.0000000000000000e0,"));
    }
}
