//! Shared fixtures: planted instances for every detector and random
//! equations and curves.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use riccati_lie::criteria::{CriterionName, Hints, Ru68Hint, TableHint, Zh99EHint};
use riccati_lie::expr::Expr;
use riccati_lie::grid::Grid;
use riccati_lie::riccati::{integrate_direct, max_trajectory_gap, RiccatiEquation};
use riccati_lie::transform::{compose, CurveSL2};

pub fn e(src: &str) -> Expr {
    src.parse().unwrap()
}

pub fn unit_grid() -> Grid {
    Grid::uniform(0.0, 1.0, 101)
}

/// An equation built to satisfy one detector, with the constants the
/// detector must recover.
pub struct Planted {
    pub name: CriterionName,
    pub eq: RiccatiEquation,
    pub hints: Hints,
    pub expected: Vec<(&'static str, f64)>,
    pub x0: f64,
}

fn planted(name: CriterionName, eq: RiccatiEquation, expected: Vec<(&'static str, f64)>) -> Planted {
    Planted { name, eq, hints: Hints::default(), expected, x0: 0.3 }
}

/// `b0 = L + Ė - b2 E² - b1 E`, the inverse of `L[E]`.
fn b0_from_l(l: &Expr, e: &Expr, b1: &Expr, b2: &Expr) -> Expr {
    l + e.differentiate() - b2 * e * e - b1 * e
}

fn log_diff(f: &Expr) -> Expr {
    f.differentiate() / f
}

pub fn table_row(row: u8) -> Planted {
    let (a, b, c) = (1.0, 0.5, 1.0);
    let d = e("exp(t)");
    let ed = e("t/2");
    let acd2 = a * c * d.powi(2);
    let (eq, func_a, func_b) = match row {
        1 => {
            let b2 = e("1 + t^2");
            let b0 = &acd2 / &b2;
            let b1 = log_diff(&b0) - log_diff(&d) + b * &d;
            (RiccatiEquation::new(b0, b1, b2), None, None)
        }
        2 | 4 => {
            let l = e("1 + t^2");
            let b2 = &acd2 / &l;
            let sign = if row == 2 { -1.0 } else { 1.0 };
            let b1 = log_diff(&l) - 2.0 * &ed * &b2 - log_diff(&d) + sign * b * &d;
            let b0 = b0_from_l(&l, &ed, &b1, &b2);
            (RiccatiEquation::new(b0, b1, b2), None, None)
        }
        3 => {
            let b2 = e("2 + sin(t)");
            let l = &acd2 / &b2;
            let b1 = log_diff(&d) - b * &d - log_diff(&b2) - 2.0 * &ed * &b2;
            let b0 = b0_from_l(&l, &ed, &b1, &b2);
            (RiccatiEquation::new(b0, b1, b2), None, None)
        }
        5 | 6 => {
            let (fa, fb) = (e("2 + t"), e("1 + t^2"));
            let rho = &fb / &fa;
            let l = e("1 + t^2/2");
            let l2 = &acd2 / (rho.powi(2) * &l);
            let g = if row == 5 {
                log_diff(&l) - 2.0 * &rho * &l - log_diff(&d) - b * &d
            } else {
                log_diff(&d) - b * &d - log_diff(&l2) - 2.0 * log_diff(&rho) - 2.0 * &rho * &l
            };
            let b2 = rho.powi(2) * (&l2 - &l) - &g * &rho - rho.differentiate();
            let b1 = &g - 2.0 * &b2 * &ed;
            let b0 = b0_from_l(&l, &ed, &b1, &b2);
            (RiccatiEquation::new(b0, b1, b2), Some(fa), Some(fb))
        }
        _ => panic!("no row {row}"),
    };
    let hint = TableHint {
        row,
        d,
        e: (row != 1).then_some(ed),
        func_a,
        func_b,
        a,
        b,
        c,
    };
    let mut p = planted(CriterionName::Zh99Table(row), eq, vec![("a", a), ("b", b), ("c", c)]);
    p.hints.zh99_table.push(hint);
    p
}

/// One planted instance per detector, then the six table rows.
pub fn all_planted() -> Vec<Planted> {
    let mut out = Vec::new();

    // Rao K: v = 1 + t², b2 = 1, K = 0.5, pushed back through the inverse curve.
    {
        let (v, b2, k) = (e("1 + t^2"), Expr::one(), 0.5);
        let b1 = k * &b2 * &v - v.differentiate() / &v;
        let sv = v.sqrt();
        let curve = CurveSL2::new(1.0 / &sv, &b1 / (&b2 * &sv), Expr::zero(), sv);
        let rate = &v * &b2;
        let target = RiccatiEquation::new(rate.clone(), -k * &rate, rate);
        let eq = riccati_lie::transform::transform_coefficients(&target, &riccati_lie::transform::inverse(&curve));
        out.push(planted(CriterionName::RaoK, eq, vec![("K", k)]));
    }
    // W = 0 with b1 = 1, b2 = e^t.
    out.push(planted(
        CriterionName::RaoW0,
        RiccatiEquation::parse("exp(-t)", "1", "exp(t)").unwrap(),
        vec![],
    ));
    // Allen–Stein with b0 = e^t, b2 = 1 + t, C = 0.7.
    {
        let (b0, b2, c) = (e("exp(t)"), e("1 + t"), 0.7);
        let b1 = c * (&b0 * &b2).sqrt() - 0.5 * (log_diff(&b2) - log_diff(&b0));
        out.push(planted(CriterionName::AllenStein, RiccatiEquation::new(b0, b1, b2), vec![("C", c)]));
    }
    // Kovalev family with F = e^t, c1 = 2, c2 = 3.
    {
        let f = e("exp(t)");
        let (c1, c2) = (2.0, 3.0);
        let eq = RiccatiEquation::new(f.clone(), c2 + log_diff(&f), -c1 / &f);
        out.push(planted(CriterionName::Ko06, eq, vec![("c1", c1), ("c2", c2)]));
    }
    // Ra61 with b1 = cos t, b2 = 1 + t, a = 2: b0 = -a b2 e^{2 sin t}.
    {
        let b2 = e("1 + t");
        let b0 = -2.0 * &b2 * (2.0 * e("sin(t)")).exp();
        let eq = RiccatiEquation::new(b0, e("cos(t)"), b2);
        out.push(planted(CriterionName::Ra61, eq, vec![("a", 2.0)]));
    }
    // RDM05 pattern with P = 1 + t, Q = sin t, k = 2.
    {
        let (p, q, k) = (e("1 + t"), e("sin(t)"), 2.0);
        let b2 = k * (&q - k * &p);
        out.push(planted(CriterionName::Rdm05, RiccatiEquation::new(p, q, b2), vec![("k", k)]));
    }
    // Zh99 basic with D = e^t, a = c = 1, b = 0.5, b2 = 1 + t².
    {
        let (d, b2, b) = (e("exp(t)"), e("1 + t^2"), 0.5);
        let b0 = d.powi(2) / &b2;
        let b1 = log_diff(&d) + b * &d - log_diff(&b2);
        let eq = RiccatiEquation::new(b0, b1, b2);
        out.push(planted(CriterionName::Zh99Basic, eq, vec![("a", 1.0), ("b", b), ("c", 1.0)]));
    }
    // RU68 with v = e^t, k = 1, c = 2, b1 = 2.
    {
        let (v, k, c) = (e("exp(t)"), 1.0, 2.0);
        let b1 = Expr::constant(2.0);
        let b0 = (&b1 * &v - v.differentiate()) / k;
        let b2 = &b0 / (c * v.powi(2));
        let mut p = planted(CriterionName::Ru68, RiccatiEquation::new(b0, b1, b2), vec![("k", k), ("c", c)]);
        p.hints.ru68 = Some(Ru68Hint { v, c, k });
        out.push(p);
    }
    // Zh99 E-form with E = t, D = 1, a = b = c = 1, b2 = 1.
    {
        let (ed, d) = (Expr::t(), Expr::one());
        let b2 = Expr::one();
        let b1 = log_diff(&d) + &d - log_diff(&b2) - 2.0 * &ed * &b2;
        let b0 = b0_from_l(&(&d * &d / &b2), &ed, &b1, &b2);
        let mut p = planted(CriterionName::Zh99E, RiccatiEquation::new(b0, b1, b2), vec![("a", 1.0), ("b", 1.0), ("c", 1.0)]);
        p.hints.zh99_e = Some(Zh99EHint { e: ed, d, a: 1.0, b: 1.0, c: 1.0 });
        out.push(p);
    }
    for row in 1..=6 {
        out.push(table_row(row));
    }
    out
}

/// Maximum relative gap between a closed-form solution and the direct
/// integrator on `[0, 1]`, away from poles.
pub fn oracle_gap(eq: &RiccatiEquation, x0: f64, form: &riccati_lie::solvers::SolutionForm) -> f64 {
    let oracle = integrate_direct(eq, x0.into(), (0.0, 1.0), 1e-3).unwrap();
    assert!(oracle.truncated.is_none());
    let sampled = form.sample(&oracle.times());
    assert!(sampled.truncated.is_none(), "{:?}", sampled.truncated);
    max_trajectory_gap(&sampled, &oracle, 1e6)
}

/// A random polynomial or exponential coefficient of degree at most 3.
pub fn random_coefficient(rng: &mut ChaCha8Rng) -> Expr {
    let t = Expr::t();
    match rng.gen_range(0..3) {
        0 => {
            let degree = rng.gen_range(0..=3);
            let mut p = Expr::constant(rng.gen_range(-1.0..1.0));
            for n in 1..=degree {
                p = p + rng.gen_range(-1.0..1.0) * t.powi(n);
            }
            p
        }
        1 => rng.gen_range(-1.0..1.0) * (rng.gen_range(-1.0..1.0) * &t).exp(),
        _ => rng.gen_range(-1.0..1.0) + rng.gen_range(-1.0..1.0) * (&t * rng.gen_range(0.5..2.0)).sin(),
    }
}

pub fn random_equation(rng: &mut ChaCha8Rng) -> RiccatiEquation {
    RiccatiEquation::new(random_coefficient(rng), random_coefficient(rng), random_coefficient(rng))
}

/// An elementary factor: translation, positive scaling or inversion.
pub fn random_factor(rng: &mut ChaCha8Rng) -> CurveSL2 {
    let t = Expr::t();
    match rng.gen_range(0..3) {
        0 => CurveSL2::translation(rng.gen_range(-1.0..1.0) + rng.gen_range(-1.0..1.0) * &t),
        1 => CurveSL2::scaling(&(rng.gen_range(0.5..2.0) * (rng.gen_range(-0.5..0.5) * &t).exp())),
        _ => CurveSL2::inversion(),
    }
}

/// Product of 2 to 4 elementary factors.
pub fn random_curve(rng: &mut ChaCha8Rng) -> CurveSL2 {
    let n = rng.gen_range(2..=4);
    let mut c = random_factor(rng);
    for _ in 1..n {
        c = compose(&random_factor(rng), &c);
    }
    c
}
