//! Printing in the parser's grammar with minimal parentheses.
//!
//! The printer and [`super::parse`] are inverse up to constant signs: a
//! negative constant prints as a unary minus, so `print(parse(print(e)))`
//! equals `print(e)` and both trees evaluate identically.

use std::fmt::{self, Write};

use super::{Expr, Node};

const PREC_SUM: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_UNARY: u8 = 3;
const PREC_ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e.node() {
        Node::Add(..) | Node::Sub(..) => PREC_SUM,
        Node::Mul(..) | Node::Div(..) => PREC_PRODUCT,
        Node::Neg(_) => PREC_UNARY,
        Node::Const(c) if c.is_sign_negative() => PREC_UNARY,
        Node::Pow(..) => 4,
        Node::Const(_) | Node::Var | Node::Call(..) | Node::Integral(_) => PREC_ATOM,
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    if precedence(e) < min_prec {
        f.write_char('(')?;
        write_expr(f, e)?;
        f.write_char(')')
    } else {
        write_expr(f, e)
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e.node() {
        Node::Const(c) => {
            if c.is_sign_negative() {
                write!(f, "-{}", -c)
            } else {
                write!(f, "{c}")
            }
        }
        Node::Var => f.write_char('t'),
        Node::Neg(a) => {
            f.write_char('-')?;
            write_child(f, a, PREC_UNARY)
        }
        Node::Add(a, b) => {
            write_child(f, a, PREC_SUM)?;
            f.write_str(" + ")?;
            write_child(f, b, PREC_PRODUCT)
        }
        Node::Sub(a, b) => {
            write_child(f, a, PREC_SUM)?;
            f.write_str(" - ")?;
            write_child(f, b, PREC_PRODUCT)
        }
        Node::Mul(a, b) => {
            write_child(f, a, PREC_PRODUCT)?;
            f.write_char('*')?;
            write_child(f, b, PREC_UNARY)
        }
        Node::Div(a, b) => {
            write_child(f, a, PREC_PRODUCT)?;
            f.write_char('/')?;
            write_child(f, b, PREC_UNARY)
        }
        Node::Pow(a, n) => {
            write_child(f, a, PREC_ATOM)?;
            write!(f, "^{n}")
        }
        Node::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            write_expr(f, a)?;
            f.write_char(')')
        }
        Node::Integral(a) => {
            f.write_str("integral(")?;
            write_expr(f, a)?;
            f.write_char(')')
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self)
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::{parse, Expr};

    #[test]
    fn minimal_parentheses() {
        let cases = [
            ("t", "t"),
            ("exp(2*t) + 1/t", "exp(2*t) + 1/t"),
            ("(t + 1)*(t - 1)", "(t + 1)*(t - 1)"),
            ("t - (t - 1)", "t - (t - 1)"),
            ("(t - 1) - t", "t - 1 - t"),
            ("t / (2 * t)", "t/(2*t)"),
            ("-(t + 1)", "-(t + 1)"),
            ("(-t)^2", "(-t)^2"),
            ("-t^2", "-t^2"),
            ("integral(sin(t))", "integral(sin(t))"),
            ("t^-3", "t^-3"),
        ];
        for (src, printed) in cases {
            assert_eq!(parse(src).unwrap().to_string(), printed, "{src}");
        }
    }

    #[test]
    fn negative_constants_print_as_unary_minus() {
        let e = Expr::t() * -2.0;
        assert_eq!(e.to_string(), "t*-2");
        let again = parse(&e.to_string()).unwrap();
        assert_eq!(again.to_string(), e.to_string());
        assert_eq!(again.eval(3.0).unwrap(), -6.0);
        let p = Expr::constant(-2.0).powi(3);
        assert_eq!(p.to_string(), "-8");
        let base = crate::expr::Expr::from_node(crate::expr::Node::Pow(Expr::constant(-2.0), 2));
        assert_eq!(base.to_string(), "(-2)^2");
        assert_eq!(parse(&base.to_string()).unwrap().eval(0.0).unwrap(), 4.0);
    }

    #[test]
    fn constants_round_trip_exactly() {
        for c in [0.1, 1.0 / 3.0, 1e-300, 6.02e23, std::f64::consts::PI] {
            let e = Expr::constant(c);
            assert_eq!(parse(&e.to_string()).unwrap().eval(0.0).unwrap(), c);
        }
    }
}
