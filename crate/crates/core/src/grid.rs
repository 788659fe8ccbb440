//! Sampled functions on `[−1, 1]` with monotone piecewise-cubic
//! (Fritsch–Carlson) interpolation.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::geometry::Point;

const MODULE: &str = "grid";

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    points: Vec<Point>,
    values: Vec<f64>,
}

impl GridFunction {
    /// `points` must be strictly increasing and run from `−1` to `1`.
    pub fn new(points: Vec<Point>, values: Vec<f64>) -> Result<Self> {
        if points.len() != values.len() || points.len() < 2 {
            return Err(Error::invalid(MODULE, "new", "need at least two points and one value per point"));
        }
        if points[0] != Point::LEFT_END || *points.last().unwrap() != Point::RIGHT_END {
            return Err(Error::invalid(MODULE, "new", "grid must start at -1 and end at 1"));
        }
        if points.windows(2).any(|w| w[0].cmp_pos(&w[1]) != Ordering::Less) {
            return Err(Error::invalid(MODULE, "new", "grid must be strictly increasing"));
        }
        Ok(GridFunction { points, values })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Same grid, values transformed pointwise.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            points: self.points.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination with a function on the same grid.
    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<GridFunction> {
        if self.points != other.points {
            return Err(Error::invalid(MODULE, "zip_with", "grids differ"));
        }
        Ok(GridFunction {
            points: self.points.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    /// `sup |self − other|` over the common grid.
    pub fn max_abs_diff(&self, other: &GridFunction) -> Result<f64> {
        Ok(self.zip_with(other, |a, b| (a - b).abs())?.sup())
    }

    pub fn eval_x(&self, x: f64) -> f64 {
        self.eval(Point::new(x))
    }

    /// Monotone cubic interpolant at `pt`.
    pub fn eval(&self, pt: Point) -> f64 {
        let i = self.points.partition_point(|p| p.cmp_pos(&pt) != Ordering::Greater);
        if i == 0 {
            return self.values[0];
        }
        if i >= self.points.len() {
            return *self.values.last().unwrap();
        }
        let k = i - 1;
        if self.points[k] == pt {
            return self.values[k];
        }
        let h = self.points[k].gap_to(&self.points[k + 1]);
        let s = self.points[k].gap_to(&pt) / h;
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        if !(y0.is_finite() && y1.is_finite()) {
            return if s < 0.5 { y0 } else { y1 };
        }
        let m0 = self.slope(k) * h;
        let m1 = self.slope(k + 1) * h;
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * m0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * m1
    }

    fn secant(&self, k: usize) -> f64 {
        (self.values[k + 1] - self.values[k]) / self.points[k].gap_to(&self.points[k + 1])
    }

    // Fritsch–Carlson derivative at node k
    fn slope(&self, k: usize) -> f64 {
        let n = self.points.len();
        if k == 0 {
            return self.secant(0);
        }
        if k == n - 1 {
            return self.secant(n - 2);
        }
        let (d0, d1) = (self.secant(k - 1), self.secant(k));
        if !(d0.is_finite() && d1.is_finite()) || d0 * d1 <= 0.0 {
            return 0.0;
        }
        let h0 = self.points[k - 1].gap_to(&self.points[k]);
        let h1 = self.points[k].gap_to(&self.points[k + 1]);
        let w1 = 2.0 * h1 + h0;
        let w2 = h1 + 2.0 * h0;
        (w1 + w2) / (w1 / d0 + w2 / d1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Vec<Point> {
        (0..=n).map(|i| Point::new(-1.0 + 2.0 * i as f64 / n as f64)).collect()
    }

    #[test]
    fn reproduces_nodes_and_linear_data() {
        let pts = grid(10);
        let vals: Vec<f64> = pts.iter().map(|p| 2.0 * p.x() + 1.0).collect();
        let g = GridFunction::new(pts.clone(), vals.clone()).unwrap();
        for (p, v) in pts.iter().zip(&vals) {
            assert_eq!(g.eval(*p), *v);
        }
        assert!((g.eval_x(0.33) - 1.66).abs() < 1e-14);
    }

    #[test]
    fn interpolant_preserves_monotonicity() {
        let pts = grid(8);
        let vals: Vec<f64> = pts.iter().map(|p| if p.x() < 0.0 { 0.0 } else { 1.0 }).collect();
        let g = GridFunction::new(pts, vals).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=400 {
            let v = g.eval_x(-1.0 + i as f64 / 200.0);
            assert!(v >= prev - 1e-15 && (-1e-15..=1.0 + 1e-15).contains(&v));
            prev = v;
        }
    }

    #[test]
    fn rejects_bad_grids() {
        let mut pts = grid(4);
        pts.swap(1, 2);
        assert!(GridFunction::new(pts, vec![0.0; 5]).is_err());
        let pts = vec![Point::new(-0.5), Point::RIGHT_END];
        assert!(GridFunction::new(pts, vec![0.0; 2]).is_err());
    }
}
