//! The JSON problem file.
//!
//! ```json
//! {
//!   "schema": 1,
//!   "coefficients": { "b0": "1", "b1": "0", "b2": "-1" },
//!   "t_interval": [0, 2],
//!   "initial_conditions": [0, "inf"],
//!   "options": { "step": 0.001, "grid": 101, "tol": 1e-6 },
//!   "hints": { "zh99_e": { "E": "t", "D": "1", "a": 1, "b": 1, "c": 1 } },
//!   "known_solutions": ["tanh(t)"]
//! }
//! ```

use std::path::Path;

use serde::Deserialize;

use super::CliError;
use crate::criteria::{Hints, Ru68Hint, TableHint, Zh99EHint, Zh99Hint, DEFAULT_TOL};
use crate::expr::Expr;
use crate::grid::DEFAULT_GRID_POINTS;
use crate::projline::ExtReal;
use crate::riccati::{RiccatiEquation, DEFAULT_STEP};

pub const SCHEMA_VERSION: u32 = 1;

/// A coefficient or hint function: an expression string or a bare number.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ExprSource {
    Number(f64),
    Text(String),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum PointSource {
    Number(f64),
    Text(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoefficients {
    b0: ExprSource,
    b1: ExprSource,
    b2: ExprSource,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOptions {
    step: Option<f64>,
    grid: Option<usize>,
    tol: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRu68 {
    v: ExprSource,
    c: f64,
    k: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawZh99 {
    #[serde(rename = "D")]
    d: ExprSource,
    a: f64,
    b: f64,
    c: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawZh99E {
    #[serde(rename = "E")]
    e: ExprSource,
    #[serde(rename = "D")]
    d: ExprSource,
    a: f64,
    b: f64,
    c: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTableRow {
    row: u8,
    #[serde(rename = "D")]
    d: ExprSource,
    #[serde(rename = "E")]
    e: Option<ExprSource>,
    #[serde(rename = "A")]
    func_a: Option<ExprSource>,
    #[serde(rename = "B")]
    func_b: Option<ExprSource>,
    a: f64,
    b: f64,
    c: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHints {
    ru68: Option<RawRu68>,
    zh99_basic: Option<RawZh99>,
    zh99_e: Option<RawZh99E>,
    #[serde(default)]
    zh99_table: Vec<RawTableRow>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    schema: u32,
    coefficients: RawCoefficients,
    #[serde(alias = "interval")]
    t_interval: [f64; 2],
    #[serde(default)]
    initial_conditions: Option<Vec<PointSource>>,
    #[serde(default)]
    options: RawOptions,
    #[serde(default)]
    hints: RawHints,
    #[serde(default)]
    known_solutions: Vec<ExprSource>,
}

/// Numerical settings; command-line flags override the file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub step: f64,
    pub grid: usize,
    pub tol: f64,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            step: DEFAULT_STEP,
            grid: DEFAULT_GRID_POINTS,
            tol: DEFAULT_TOL,
        }
    }
}

/// A validated problem.
#[derive(Debug, Clone)]
pub struct Problem {
    pub equation: RiccatiEquation,
    pub interval: (f64, f64),
    pub initial_conditions: Vec<ExtReal>,
    pub options: Options,
    pub hints: Hints,
    pub known_solutions: Vec<Expr>,
}

fn expr(field: &str, src: &ExprSource) -> Result<Expr, CliError> {
    match src {
        ExprSource::Number(v) => Ok(Expr::constant(*v)),
        ExprSource::Text(s) => s.parse().map_err(|source| CliError::Expression {
            field: field.to_string(),
            source,
        }),
    }
}

fn point(field: &str, src: &PointSource) -> Result<ExtReal, CliError> {
    match src {
        PointSource::Number(v) => Ok(ExtReal::Finite(*v)),
        PointSource::Text(s) => match s.trim() {
            "inf" | "infinity" | "∞" => Ok(ExtReal::Infinity),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(ExtReal::Finite)
                .ok_or_else(|| CliError::Invalid(format!("{field}: expected a number or \"inf\", got {s:?}"))),
        },
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

impl Problem {
    pub fn from_path(path: &Path) -> Result<Problem, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Problem::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Problem, CliError> {
        let raw: RawProblem = serde_json::from_str(text).map_err(|e| CliError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if raw.schema != SCHEMA_VERSION {
            return Err(invalid(format!("unsupported schema {} (expected {SCHEMA_VERSION})", raw.schema)));
        }
        let equation = RiccatiEquation::new(
            expr("coefficients.b0", &raw.coefficients.b0)?,
            expr("coefficients.b1", &raw.coefficients.b1)?,
            expr("coefficients.b2", &raw.coefficients.b2)?,
        );
        let [ta, tb] = raw.t_interval;
        if !(ta.is_finite() && tb.is_finite() && ta < tb) {
            return Err(invalid(format!("t_interval: need t_a < t_b, got [{ta}, {tb}]")));
        }
        let initial_conditions = match &raw.initial_conditions {
            None => vec![ExtReal::Finite(0.0)],
            Some(list) => list
                .iter()
                .enumerate()
                .map(|(i, p)| point(&format!("initial_conditions[{i}]"), p))
                .collect::<Result<_, _>>()?,
        };
        let defaults = Options::default();
        let options = Options {
            step: raw.options.step.unwrap_or(defaults.step),
            grid: raw.options.grid.unwrap_or(defaults.grid),
            tol: raw.options.tol.unwrap_or(defaults.tol),
        };
        let hints = hints(&raw.hints)?;
        let known_solutions = raw
            .known_solutions
            .iter()
            .enumerate()
            .map(|(i, s)| expr(&format!("known_solutions[{i}]"), s))
            .collect::<Result<_, _>>()?;
        let problem = Problem {
            equation,
            interval: (ta, tb),
            initial_conditions,
            options,
            hints,
            known_solutions,
        };
        problem.options.validate()?;
        Ok(problem)
    }
}

impl Options {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(invalid(format!("step must be positive, got {}", self.step)));
        }
        if self.grid < 2 {
            return Err(invalid(format!("grid needs at least 2 points, got {}", self.grid)));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(invalid(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

fn hints(raw: &RawHints) -> Result<Hints, CliError> {
    let ru68 = raw
        .ru68
        .as_ref()
        .map(|h| {
            Ok::<_, CliError>(Ru68Hint {
                v: expr("hints.ru68.v", &h.v)?,
                c: h.c,
                k: h.k,
            })
        })
        .transpose()?;
    let zh99_basic = raw
        .zh99_basic
        .as_ref()
        .map(|h| {
            Ok::<_, CliError>(Zh99Hint {
                d: expr("hints.zh99_basic.D", &h.d)?,
                a: h.a,
                b: h.b,
                c: h.c,
            })
        })
        .transpose()?;
    let zh99_e = raw
        .zh99_e
        .as_ref()
        .map(|h| {
            Ok::<_, CliError>(Zh99EHint {
                e: expr("hints.zh99_e.E", &h.e)?,
                d: expr("hints.zh99_e.D", &h.d)?,
                a: h.a,
                b: h.b,
                c: h.c,
            })
        })
        .transpose()?;
    let mut zh99_table = Vec::new();
    for (i, h) in raw.zh99_table.iter().enumerate() {
        if !(1..=6).contains(&h.row) {
            return Err(invalid(format!("hints.zh99_table[{i}].row must be 1 to 6, got {}", h.row)));
        }
        let field = |name: &str| format!("hints.zh99_table[{i}].{name}");
        let optional = |name: &str, src: &Option<ExprSource>| src.as_ref().map(|s| expr(&field(name), s)).transpose();
        zh99_table.push(TableHint {
            row: h.row,
            d: expr(&field("D"), &h.d)?,
            e: optional("E", &h.e)?,
            func_a: optional("A", &h.func_a)?,
            func_b: optional("B", &h.func_b)?,
            a: h.a,
            b: h.b,
            c: h.c,
        });
    }
    Ok(Hints {
        ru68,
        zh99_basic,
        zh99_e,
        zh99_table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_problem_gets_defaults() {
        let p = Problem::from_json(r#"{"schema":1,"coefficients":{"b0":"1","b1":0,"b2":"-1"},"t_interval":[0,2]}"#)
            .unwrap();
        assert_eq!(p.initial_conditions, vec![ExtReal::Finite(0.0)]);
        assert_eq!(p.options, Options::default());
        assert_eq!(p.equation.coefficients_at(0.5).unwrap(), [1.0, 0.0, -1.0]);
    }

    #[test]
    fn infinity_and_hints_parse() {
        let p = Problem::from_json(
            r#"{"schema":1,"coefficients":{"b0":"1","b1":"0","b2":"1"},"interval":[0,1],
                "initial_conditions":[0.5,"inf"],
                "hints":{"zh99_table":[{"row":2,"D":"exp(t)","E":"t","a":1,"b":0.5,"c":1}]}}"#,
        )
        .unwrap();
        assert_eq!(p.initial_conditions[1], ExtReal::Infinity);
        assert_eq!(p.hints.zh99_table[0].row, 2);
        assert!(p.hints.zh99_table[0].func_a.is_none());
    }

    #[test]
    fn malformed_expression_reports_field_and_offset() {
        let err = Problem::from_json(r#"{"schema":1,"coefficients":{"b0":"1 +* t","b1":"0","b2":"0"},"t_interval":[0,1]}"#)
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("coefficients.b0") && msg.contains("byte 3"), "{msg}");
    }

    #[test]
    fn bad_interval_and_unknown_fields_are_rejected() {
        assert!(Problem::from_json(r#"{"schema":1,"coefficients":{"b0":"1","b1":"0","b2":"0"},"t_interval":[1,0]}"#)
            .is_err());
        let err = Problem::from_json(
            r#"{"schema":1,"coefficients":{"b0":"1","b1":"0","b2":"0"},"t_interval":[0,1],"stepp":1}"#,
        )
        .unwrap_err();
        assert!(matches!(err, CliError::Json { line: 1, .. }));
    }
}
