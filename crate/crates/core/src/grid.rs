//! Sample grids and numeric comparison of expressions.
//!
//! Symbolic results are never compared structurally. Two expressions are
//! considered equal when they agree on a grid of sample points.

use crate::expr::{EvalError, Expr};

/// Default number of points of a detection / comparison grid.
pub const DEFAULT_GRID_POINTS: usize = 101;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
}

impl Grid {
    /// `n` equispaced points covering `[start, end]` including both ends.
    pub fn uniform(start: f64, end: f64, n: usize) -> Grid {
        assert!(n >= 2, "a grid needs at least two points");
        assert!(start < end, "grid interval must be increasing");
        let h = (end - start) / (n - 1) as f64;
        let mut points: Vec<f64> = (0..n).map(|i| start + i as f64 * h).collect();
        points[n - 1] = end;
        Grid { points }
    }

    pub fn from_points(points: Vec<f64>) -> Grid {
        assert!(!points.is_empty(), "empty grid");
        Grid { points }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.points[0]
    }

    pub fn end(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// The middle sample of the grid.
    pub fn median_point(&self) -> f64 {
        self.points[self.points.len() / 2]
    }
}

/// Largest pointwise discrepancy found on a grid, and where.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deviation {
    pub value: f64,
    pub at: f64,
}

impl Deviation {
    pub const ZERO: Deviation = Deviation { value: 0.0, at: f64::NAN };

    pub fn max(self, other: Deviation) -> Deviation {
        if other.value > self.value || self.value.is_nan() {
            other
        } else {
            self
        }
    }
}

/// Relative discrepancy `|a - b| / (1 + |b|)` used throughout the crate.
pub fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}

/// `max_i |a(t_i) - b(t_i)| / (1 + |b(t_i)|)` over the grid.
pub fn max_relative_deviation(a: &Expr, b: &Expr, grid: &Grid) -> Result<Deviation, EvalError> {
    let mut worst = Deviation::ZERO;
    for &t in grid.points() {
        let gap = relative_gap(a.eval(t)?, b.eval(t)?);
        worst = worst.max(Deviation { value: gap, at: t });
    }
    Ok(worst)
}
