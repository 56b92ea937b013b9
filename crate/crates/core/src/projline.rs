//! The one-point compactification of the real line and the Möbius action of
//! 2×2 matrices on it.
//!
//! Points are handled in homogeneous coordinates internally: a finite `x`
//! is `[x : 1]` and infinity is `[1 : 0]`. That keeps pole cases out of the
//! formulas for the action and for the cross-ratio.

use std::fmt;
use std::ops::Mul;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

/// Relative threshold under which a denominator is treated as a pole.
pub const POLE_THRESHOLD: f64 = 1e-13;

/// Tolerance on `|det - 1|` for matrices that must lie in SL(2,R).
pub const UNIT_DET_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProjectiveError {
    #[error("singular matrix (det = {det})")]
    Singular { det: f64 },
    #[error("reference points of the cross-ratio coincide")]
    CoincidentPoints,
}

/// A point of ℝ ∪ {∞}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinity,
}

impl ExtReal {
    /// Maps ±inf to [`ExtReal::Infinity`]; `None` for NaN.
    pub fn from_f64(value: f64) -> Option<ExtReal> {
        if value.is_nan() {
            None
        } else if value.is_infinite() {
            Some(ExtReal::Infinity)
        } else {
            Some(ExtReal::Finite(value))
        }
    }

    /// The point `[num : den]`, with the pole guard of the Möbius action.
    pub fn from_homogeneous(num: f64, den: f64) -> ExtReal {
        if den == 0.0 || den.abs() <= POLE_THRESHOLD * num.abs() {
            ExtReal::Infinity
        } else {
            ExtReal::Finite(num / den)
        }
    }

    pub fn homogeneous(self) -> (f64, f64) {
        match self {
            ExtReal::Finite(x) => (x, 1.0),
            ExtReal::Infinity => (1.0, 0.0),
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            ExtReal::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtReal::Infinity)
    }

    /// Chordal distance on the projective line; continuous through ∞.
    pub fn chordal_distance(self, other: ExtReal) -> f64 {
        let (p1, q1) = self.homogeneous();
        let (p2, q2) = other.homogeneous();
        (p1 * q2 - p2 * q1).abs() / ((p1 * p1 + q1 * q1).sqrt() * (p2 * p2 + q2 * q2).sqrt())
    }
}

impl From<f64> for ExtReal {
    fn from(value: f64) -> Self {
        ExtReal::from_f64(value).expect("NaN is not a point of the projective line")
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::Infinity => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(x) => serializer.serialize_f64(*x),
            ExtReal::Infinity => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ExtRealVisitor;

        impl Visitor<'_> for ExtRealVisitor {
            type Value = ExtReal;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a finite number or the string \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<ExtReal, E> {
                ExtReal::from_f64(v).ok_or_else(|| E::custom("NaN is not allowed"))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtReal, E> {
                Ok(ExtReal::Finite(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtReal, E> {
                Ok(ExtReal::Finite(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<ExtReal, E> {
                match v {
                    "inf" => Ok(ExtReal::Infinity),
                    _ => v
                        .parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .map(ExtReal::Finite)
                        .ok_or_else(|| E::custom(format!("invalid point `{v}`"))),
                }
            }
        }

        deserializer.deserialize_any(ExtRealVisitor)
    }
}

/// A real 2×2 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2::new(1.0, 0.0, 0.0, 1.0);
    pub const ZERO: Mat2 = Mat2::new(0.0, 0.0, 0.0, 0.0);
    /// Generator of translations `x -> x + s`.
    pub const M0: Mat2 = Mat2::new(0.0, 1.0, 0.0, 0.0);
    /// Generator of dilations `x -> e^s x`.
    pub const M1: Mat2 = Mat2::new(0.5, 0.0, 0.0, -0.5);
    /// Generator of `x -> x / (1 - s x)`.
    pub const M2: Mat2 = Mat2::new(0.0, 0.0, -1.0, 0.0);

    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Mat2 {
        Mat2 { a11, a12, a21, a22 }
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        Mat2::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }

    pub fn add(&self, other: &Mat2) -> Mat2 {
        Mat2::new(
            self.a11 + other.a11,
            self.a12 + other.a12,
            self.a21 + other.a21,
            self.a22 + other.a22,
        )
    }

    /// Inverse of a unimodular matrix, `(δ, -β; -γ, α)`, divided by the
    /// determinant for general invertible input.
    pub fn inverse(&self) -> Result<Mat2, ProjectiveError> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return Err(ProjectiveError::Singular { det });
        }
        Ok(Mat2::new(self.a22, -self.a12, -self.a21, self.a11).scale(1.0 / det))
    }

    /// `c0 M0 + c1 M1 + c2 M2`.
    pub fn from_algebra(c0: f64, c1: f64, c2: f64) -> Mat2 {
        Mat2::new(0.5 * c1, c0, -c2, -0.5 * c1)
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        (self.a11 - other.a11)
            .abs()
            .max((self.a12 - other.a12).abs())
            .max((self.a21 - other.a21).abs())
            .max((self.a22 - other.a22).abs())
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.a11, self.a12, self.a21, self.a22]
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, rhs: Mat2) -> Mat2 {
        Mat2::new(
            self.a11 * rhs.a11 + self.a12 * rhs.a21,
            self.a11 * rhs.a12 + self.a12 * rhs.a22,
            self.a21 * rhs.a11 + self.a22 * rhs.a21,
            self.a21 * rhs.a12 + self.a22 * rhs.a22,
        )
    }
}

/// The homographic action `x -> (αx + β) / (γx + δ)` on ℝ ∪ {∞}.
///
/// A finite image whose denominator satisfies
/// `|γx + δ| <= 1e-13 (1 + |γx| + |δ|)` is reported as ∞. For `x = ∞` the
/// image is `α/γ`, or ∞ when `γ` vanishes relative to `α`.
pub fn mobius_apply(a: &Mat2, x: ExtReal) -> Result<ExtReal, ProjectiveError> {
    let det = a.det();
    if det == 0.0 || !det.is_finite() {
        return Err(ProjectiveError::Singular { det });
    }
    Ok(match x {
        ExtReal::Finite(x) => {
            let gx = a.a21 * x;
            let den = gx + a.a22;
            if den.abs() <= POLE_THRESHOLD * (1.0 + gx.abs() + a.a22.abs()) {
                ExtReal::Infinity
            } else {
                ExtReal::Finite((a.a11 * x + a.a12) / den)
            }
        }
        ExtReal::Infinity => ExtReal::from_homogeneous(a.a11, a.a21),
    })
}

fn bracket(x: ExtReal, y: ExtReal) -> f64 {
    let (p1, q1) = x.homogeneous();
    let (p2, q2) = y.homogeneous();
    p1 * q2 - p2 * q1
}

/// Cross-ratio `((x - x1)/(x - x2)) : ((x3 - x1)/(x3 - x2))`, extended to ∞
/// by continuity (factors containing ∞ cancel).
pub fn cross_ratio(
    x: ExtReal,
    x1: ExtReal,
    x2: ExtReal,
    x3: ExtReal,
) -> Result<ExtReal, ProjectiveError> {
    if x1 == x2 || x1 == x3 || x2 == x3 {
        return Err(ProjectiveError::CoincidentPoints);
    }
    let num = bracket(x, x1) * bracket(x3, x2);
    let den = bracket(x, x2) * bracket(x3, x1);
    Ok(if den == 0.0 {
        ExtReal::Infinity
    } else {
        ExtReal::Finite(num / den)
    })
}
