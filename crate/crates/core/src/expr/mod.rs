//! Symbolic expressions in the single variable `t`.
//!
//! Every time-dependent coefficient in the crate is an [`Expr`]: Riccati
//! coefficients, entries of SL(2,R)-valued curves, auxiliary functions of the
//! integrability detectors and closed-form solutions. Expressions are
//! immutable and cheap to clone (nodes are reference counted), and they are
//! closed under [`Expr::differentiate`].
//!
//! There is no general simplifier. The arithmetic constructors (`+`, `-`,
//! `*`, `/` and the methods below) only fold constants locally
//! (`0*e -> 0`, `e+0 -> e`, `1*e -> e`, ...). Equality of two expressions
//! is always decided numerically on a grid, see [`crate::grid`].
//!
//! The deferred-integral node `integral(e)` stands for the function
//! `t -> ∫₀ᵗ e(s) ds`; it is evaluated by adaptive Gauss–Kronrod quadrature
//! whenever the expression is evaluated.

mod diff;
mod display;
mod eval;
mod parse;

use std::fmt;
use std::ops;
use std::sync::Arc;

pub use eval::{integrate, EvalError, EvalErrorKind, QUADRATURE_TOL};
pub use parse::{parse, ParseError};

/// Elementary functions available in the expression grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
    Tan,
    Tanh,
    Arctan,
}

impl Func {
    pub const ALL: [Func; 8] = [
        Func::Sqrt,
        Func::Exp,
        Func::Log,
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Tanh,
        Func::Arctan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Tanh => "tanh",
            Func::Arctan => "arctan",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == name)
    }
}

/// A node of the expression tree.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Const(f64),
    /// The independent variable `t`.
    Var,
    Neg(Expr),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    /// Integer power.
    Pow(Expr, i32),
    Call(Func, Expr),
    /// `∫₀ᵗ e(s) ds`.
    Integral(Expr),
}

/// An immutable symbolic expression in `t`.
#[derive(Clone, PartialEq)]
pub struct Expr(Arc<Node>);

impl Expr {
    /// Wraps a node without any folding. The parser builds trees this way so
    /// that the AST mirrors the source text.
    pub fn from_node(node: Node) -> Expr {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(value: f64) -> Expr {
        Expr::from_node(Node::Const(value))
    }

    pub fn zero() -> Expr {
        Expr::constant(0.0)
    }

    pub fn one() -> Expr {
        Expr::constant(1.0)
    }

    /// The variable `t`.
    pub fn t() -> Expr {
        Expr::from_node(Node::Var)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self.node() {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_const(&self, value: f64) -> bool {
        self.as_const() == Some(value)
    }

    /// Integer power with folding of the trivial exponents.
    pub fn powi(&self, n: i32) -> Expr {
        match n {
            0 => Expr::one(),
            1 => self.clone(),
            _ => match self.as_const() {
                Some(c) if c.powi(n).is_finite() && c != 0.0 => Expr::constant(c.powi(n)),
                _ => Expr::from_node(Node::Pow(self.clone(), n)),
            },
        }
    }

    pub fn call(&self, f: Func) -> Expr {
        if let Some(c) = self.as_const() {
            if let Ok(v) = eval::apply_func(f, c) {
                if v.is_finite() {
                    return Expr::constant(v);
                }
            }
        }
        Expr::from_node(Node::Call(f, self.clone()))
    }

    pub fn sqrt(&self) -> Expr {
        self.call(Func::Sqrt)
    }

    pub fn exp(&self) -> Expr {
        self.call(Func::Exp)
    }

    pub fn ln(&self) -> Expr {
        self.call(Func::Log)
    }

    pub fn sin(&self) -> Expr {
        self.call(Func::Sin)
    }

    pub fn cos(&self) -> Expr {
        self.call(Func::Cos)
    }

    pub fn tan(&self) -> Expr {
        self.call(Func::Tan)
    }

    pub fn tanh(&self) -> Expr {
        self.call(Func::Tanh)
    }

    pub fn arctan(&self) -> Expr {
        self.call(Func::Arctan)
    }

    /// The deferred integral `t -> ∫₀ᵗ self(s) ds`.
    pub fn integral(&self) -> Expr {
        if self.is_const(0.0) {
            return Expr::zero();
        }
        Expr::from_node(Node::Integral(self.clone()))
    }

    /// `t -> ∫_{t0}^t self(s) ds`, built as `integral(self) - I(t0)` with
    /// the offset evaluated once.
    pub fn integral_from(&self, t0: f64) -> Result<Expr, EvalError> {
        let base = self.integral();
        if t0 == 0.0 {
            return Ok(base);
        }
        let offset = base.eval(t0)?;
        Ok(&base - offset)
    }

    /// Symbolic derivative with respect to `t`.
    pub fn differentiate(&self) -> Expr {
        diff::differentiate(self)
    }

    /// Evaluates the expression at `t`.
    pub fn eval(&self, t: f64) -> Result<f64, EvalError> {
        eval::eval(self, t)
    }

    /// Number of nodes in the tree (shared subtrees counted every time).
    pub fn size(&self) -> usize {
        match self.node() {
            Node::Const(_) | Node::Var => 1,
            Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) | Node::Integral(a) => 1 + a.size(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl From<f64> for Expr {
    fn from(value: f64) -> Self {
        Expr::constant(value)
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

fn fold_add(a: &Expr, b: &Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::constant(x + y),
        (Some(x), _) if x == 0.0 => b.clone(),
        (_, Some(y)) if y == 0.0 => a.clone(),
        _ => Expr::from_node(Node::Add(a.clone(), b.clone())),
    }
}

fn fold_sub(a: &Expr, b: &Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::constant(x - y),
        (Some(x), _) if x == 0.0 => fold_neg(b),
        (_, Some(y)) if y == 0.0 => a.clone(),
        _ => Expr::from_node(Node::Sub(a.clone(), b.clone())),
    }
}

fn fold_mul(a: &Expr, b: &Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::constant(x * y),
        (Some(x), _) if x == 0.0 => Expr::zero(),
        (_, Some(y)) if y == 0.0 => Expr::zero(),
        (Some(x), _) if x == 1.0 => b.clone(),
        (_, Some(y)) if y == 1.0 => a.clone(),
        (Some(x), _) if x == -1.0 => fold_neg(b),
        (_, Some(y)) if y == -1.0 => fold_neg(a),
        _ => Expr::from_node(Node::Mul(a.clone(), b.clone())),
    }
}

fn fold_div(a: &Expr, b: &Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) if y != 0.0 => Expr::constant(x / y),
        (Some(x), _) if x == 0.0 && !b.is_const(0.0) => Expr::zero(),
        (_, Some(y)) if y == 1.0 => a.clone(),
        (_, Some(y)) if y == -1.0 => fold_neg(a),
        _ => Expr::from_node(Node::Div(a.clone(), b.clone())),
    }
}

fn fold_neg(a: &Expr) -> Expr {
    match a.node() {
        Node::Const(c) => Expr::constant(-c),
        Node::Neg(inner) => inner.clone(),
        _ => Expr::from_node(Node::Neg(a.clone())),
    }
}

macro_rules! binary_op {
    ($trait:ident, $method:ident, $fold:ident) => {
        impl ops::$trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $fold(self, rhs)
            }
        }
        impl ops::$trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $fold(&self, &rhs)
            }
        }
        impl ops::$trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $fold(&self, rhs)
            }
        }
        impl ops::$trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $fold(self, &rhs)
            }
        }
        impl ops::$trait<f64> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                $fold(self, &Expr::constant(rhs))
            }
        }
        impl ops::$trait<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                $fold(&self, &Expr::constant(rhs))
            }
        }
        impl ops::$trait<&Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $fold(&Expr::constant(self), rhs)
            }
        }
        impl ops::$trait<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $fold(&Expr::constant(self), &rhs)
            }
        }
    };
}

binary_op!(Add, add, fold_add);
binary_op!(Sub, sub, fold_sub);
binary_op!(Mul, mul, fold_mul);
binary_op!(Div, div, fold_div);

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        fold_neg(self)
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        fold_neg(&self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn local_folding() {
        let t = Expr::t();
        assert_eq!(&t * 0.0, Expr::zero());
        assert_eq!(&t + 0.0, t);
        assert_eq!(1.0 * &t, t);
        assert_eq!(Expr::constant(2.0) + Expr::constant(3.0), Expr::constant(5.0));
        assert_eq!(-(-&t), t);
        assert_eq!(t.powi(1), t);
        assert_eq!(t.powi(0), Expr::one());
    }

    #[test]
    fn no_general_simplification() {
        let t = Expr::t();
        let e = &t - &t;
        assert!(matches!(e.node(), Node::Sub(_, _)));
        assert_eq!(e.eval(3.0).unwrap(), 0.0);
    }

    #[test]
    fn integral_from_offsets_the_base_point() {
        let e = Expr::one().integral_from(1.5).unwrap();
        assert!((e.eval(4.0).unwrap() - 2.5).abs() < 1e-13);
        assert!(e.eval(1.5).unwrap().abs() < 1e-13);
    }
}
