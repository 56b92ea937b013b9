use super::{Expr, Func, Node};

pub(super) fn differentiate(e: &Expr) -> Expr {
    match e.node() {
        Node::Const(_) => Expr::zero(),
        Node::Var => Expr::one(),
        Node::Neg(a) => -differentiate(a),
        Node::Add(a, b) => differentiate(a) + differentiate(b),
        Node::Sub(a, b) => differentiate(a) - differentiate(b),
        Node::Mul(a, b) => differentiate(a) * b + a * differentiate(b),
        Node::Div(a, b) => {
            // (a/b)' = a'/b - a b'/b²
            let da = differentiate(a);
            let db = differentiate(b);
            &da / b - a * &db / b.powi(2)
        }
        Node::Pow(a, n) => f64::from(*n) * a.powi(n - 1) * differentiate(a),
        Node::Call(f, a) => {
            let da = differentiate(a);
            let outer = match f {
                Func::Sqrt => 0.5 / e,
                Func::Exp => e.clone(),
                Func::Log => 1.0 / a,
                Func::Sin => a.cos(),
                Func::Cos => -a.sin(),
                Func::Tan => 1.0 + e.powi(2),
                Func::Tanh => 1.0 - e.powi(2),
                Func::Arctan => 1.0 / (1.0 + a.powi(2)),
            };
            outer * da
        }
        // d/dt ∫₀ᵗ a(s) ds = a(t)
        Node::Integral(a) => a.clone(),
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::{parse, Node};

    fn d(s: &str) -> crate::expr::Expr {
        parse(s).unwrap().differentiate()
    }

    #[test]
    fn square() {
        let e = d("t^2");
        for t in [-1.5, 0.0, 2.0] {
            assert_eq!(e.eval(t).unwrap(), 2.0 * t);
        }
    }

    #[test]
    fn exponential() {
        let e = d("exp(2*t)");
        for t in [-1.0f64, 0.3, 1.0] {
            let expected = 2.0 * f64::exp(2.0 * t);
            assert!((e.eval(t).unwrap() - expected).abs() <= 1e-15 * expected);
        }
    }

    #[test]
    fn integral_rule_is_exact() {
        let e = d("integral(sin(t))");
        assert_eq!(e, parse("sin(t)").unwrap());
        assert!(matches!(e.node(), Node::Call(..)));
    }

    #[test]
    fn functions_against_central_differences() {
        let cases = [
            "sqrt(1 + t^2)",
            "log(2 + sin(t))",
            "tan(t/3)",
            "tanh(2*t - 1)",
            "arctan(t^3)",
            "cos(t)/(2 + t^2)",
            "exp(-t)*integral(exp(t))",
        ];
        for src in cases {
            let e = parse(src).unwrap();
            let de = e.differentiate();
            for t in [-0.7, 0.1, 0.9] {
                let h = 1e-6;
                let fd = (e.eval(t + h).unwrap() - e.eval(t - h).unwrap()) / (2.0 * h);
                let v = de.eval(t).unwrap();
                assert!((v - fd).abs() <= 1e-5 * (1.0 + v.abs()), "{src} at {t}: {v} vs {fd}");
            }
        }
    }
}
