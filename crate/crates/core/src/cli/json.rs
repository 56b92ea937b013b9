//! Serialization of reports with fixed field order and 17 significant digits.

use std::collections::BTreeMap;

use serde::ser::Error as _;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use super::problem::{Options, SCHEMA_VERSION};
use crate::criteria::{CriterionReport, Reduction};
use crate::projline::ExtReal;
use crate::riccati::{format_f64, RiccatiEquation};
use crate::sl2::{AffineKind, TargetSubalgebra};
use crate::transform::CurveSL2;

/// A float written as `d.ddddddddddddddddde±x`; non-finite values become
/// `"inf"`, `"-inf"` or `null`.
#[derive(Debug, Clone, Copy)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v = self.0;
        if v.is_nan() {
            s.serialize_none()
        } else if v.is_infinite() {
            s.serialize_str(if v > 0.0 { "inf" } else { "-inf" })
        } else {
            RawValue::from_string(format_f64(v)).map_err(S::Error::custom)?.serialize(s)
        }
    }
}

/// A point of the projective line: a number or `"inf"`.
#[derive(Debug, Clone, Copy)]
pub struct Point(pub ExtReal);

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            ExtReal::Finite(v) => Num(v).serialize(s),
            ExtReal::Infinity => s.serialize_str("inf"),
        }
    }
}

pub fn opt(v: Option<f64>) -> Option<Num> {
    v.map(Num)
}

#[derive(Serialize)]
pub struct EquationJson {
    pub b0: String,
    pub b1: String,
    pub b2: String,
}

impl From<&RiccatiEquation> for EquationJson {
    fn from(eq: &RiccatiEquation) -> Self {
        let [b0, b1, b2] = eq.coefficients();
        EquationJson {
            b0: b0.to_string(),
            b1: b1.to_string(),
            b2: b2.to_string(),
        }
    }
}

#[derive(Serialize)]
pub struct OptionsJson {
    pub step: Num,
    pub grid: usize,
    pub tol: Num,
}

/// Fields shared by every command's output.
#[derive(Serialize)]
pub struct Header {
    pub schema: u32,
    pub command: &'static str,
    pub equation: EquationJson,
    pub t_interval: [Num; 2],
    pub options: OptionsJson,
}

impl Header {
    pub fn new(command: &'static str, eq: &RiccatiEquation, (ta, tb): (f64, f64), o: &Options) -> Self {
        Header {
            schema: SCHEMA_VERSION,
            command,
            equation: eq.into(),
            t_interval: [Num(ta), Num(tb)],
            options: OptionsJson {
                step: Num(o.step),
                grid: o.grid,
                tol: Num(o.tol),
            },
        }
    }
}

#[derive(Serialize)]
struct CurveJson {
    alpha: String,
    beta: String,
    gamma: String,
    delta: String,
}

impl From<&CurveSL2> for CurveJson {
    fn from(c: &CurveSL2) -> Self {
        CurveJson {
            alpha: c.alpha.to_string(),
            beta: c.beta.to_string(),
            gamma: c.gamma.to_string(),
            delta: c.delta.to_string(),
        }
    }
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum SubalgebraJson {
    OneDimensional { direction: [Num; 3], rate: String },
    Affine { vanishing: &'static str },
}

#[derive(Serialize)]
struct ReductionJson {
    curve: CurveJson,
    subalgebra: SubalgebraJson,
    target: EquationJson,
}

impl From<&Reduction> for ReductionJson {
    fn from(r: &Reduction) -> Self {
        let subalgebra = match &r.subalgebra {
            TargetSubalgebra::OneDimensional { direction, rate } => SubalgebraJson::OneDimensional {
                direction: direction.map(Num),
                rate: rate.to_string(),
            },
            TargetSubalgebra::AffineSolvable(AffineKind::B2Zero) => SubalgebraJson::Affine { vanishing: "b2" },
            TargetSubalgebra::AffineSolvable(AffineKind::B0Zero) => SubalgebraJson::Affine { vanishing: "b0" },
        };
        ReductionJson {
            curve: (&r.curve).into(),
            subalgebra,
            target: (&r.target).into(),
        }
    }
}

#[derive(Serialize)]
struct GridJson {
    start: Num,
    end: Num,
    points: usize,
}

#[derive(Serialize)]
struct DiagnosticsJson {
    max_deviation: Option<Num>,
    deviation_at: Option<Num>,
    curve_residual: Option<Num>,
    grid: GridJson,
    skipped_points: usize,
    reason: Option<String>,
}

#[derive(Serialize)]
pub struct ReportJson {
    name: String,
    mode: String,
    satisfied: bool,
    constants: BTreeMap<String, Num>,
    functions: BTreeMap<String, String>,
    reduction: Option<ReductionJson>,
    alternates: Vec<ReductionJson>,
    diagnostics: DiagnosticsJson,
}

impl From<&CriterionReport> for ReportJson {
    fn from(r: &CriterionReport) -> Self {
        let d = &r.diagnostics;
        ReportJson {
            name: r.name.to_string(),
            mode: r.mode.to_string(),
            satisfied: r.satisfied,
            constants: r.constants.iter().map(|(k, v)| (k.clone(), Num(*v))).collect(),
            functions: r.functions.iter().map(|(k, v)| (k.clone(), v.to_string())).collect(),
            reduction: r.reduction.as_ref().map(Into::into),
            alternates: r.alternates.iter().map(Into::into).collect(),
            diagnostics: DiagnosticsJson {
                max_deviation: opt(d.max_deviation),
                deviation_at: opt(d.deviation_at),
                curve_residual: opt(d.curve_residual),
                grid: GridJson {
                    start: Num(d.grid_start),
                    end: Num(d.grid_end),
                    points: d.grid_points,
                },
                skipped_points: d.skipped_points,
                reason: d.reason.clone(),
            },
        }
    }
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_have_seventeen_digits() {
        assert_eq!(to_string(&Num(0.1)), "1.0000000000000001e-1\n");
        assert_eq!(to_string(&Num(-2.0)), "-2.0000000000000000e0\n");
        assert_eq!(to_string(&Num(-0.0)), "0.0000000000000000e0\n");
        assert_eq!(to_string(&Num(f64::INFINITY)), "\"inf\"\n");
        assert_eq!(to_string(&Num(f64::NAN)), "null\n");
        assert_eq!(to_string(&Point(ExtReal::Infinity)), "\"inf\"\n");
        let v: f64 = serde_json::from_str(to_string(&Num(std::f64::consts::PI)).trim()).unwrap();
        assert_eq!(v, std::f64::consts::PI);
    }
}
