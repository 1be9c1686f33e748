//! Bounded lattices over `R^d`, level sets restricted to them, and discrete
//! set-limit diagnostics for the level-set map `s -> [g <= s]`.

mod level;
mod limits;

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::funcspec::{EvalError, FuncExpr};

pub use level::{sublevel, superlevel, LevelKind, LevelSet};
pub use limits::{
    directed_gap, hausdorff_gap, hemicontinuity_probe, pk_limits, Gap, HemiProbe, HemiRow,
    PKLimitResult,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GridError {
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error("axis {axis}: resolution must be at least 2, got {got}")]
    InvalidResolution { axis: usize, got: usize },
    #[error("symmetric grid requested but axis {axis} is not negation-symmetric with an odd point count")]
    SymmetryInfeasible { axis: usize },
    #[error("lattice has too many points")]
    TooLarge,
    #[error("level sets live on different grids")]
    MismatchedGrids,
    #[error("sequence of level sets is empty")]
    EmptySequence,
    #[error("deltas must be positive and strictly decreasing")]
    InvalidDeltas,
    #[error("function dimension {got} does not match grid dimension {expected}")]
    Dimension { expected: usize, got: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    #[serde(skip)]
    symmetric: bool,
}

impl Axis {
    pub fn coord(&self, i: usize) -> f64 {
        debug_assert!(i < self.points);
        if self.symmetric {
            // hi * k / mid keeps the lattice exactly closed under negation.
            let mid = (self.points - 1) / 2;
            let k = i as f64 - mid as f64;
            self.hi * k / mid as f64
        } else if i == self.points - 1 {
            self.hi
        } else {
            self.lo + (self.hi - self.lo) * i as f64 / (self.points - 1) as f64
        }
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.points - 1) as f64
    }
}

/// A rectangular lattice, row-major with the last axis varying fastest.
///
/// When every axis is negation-symmetric with an odd point count the lattice
/// is built so that `-x` is a lattice point for every lattice point `x`, and
/// the origin is a lattice point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleGrid {
    axes: Vec<Axis>,
    symmetric: bool,
    origin_included: bool,
}

impl SampleGrid {
    /// Builds a lattice from per-axis `(lo, hi)` bounds and point counts.
    ///
    /// With `symmetric` set, every axis must satisfy `lo == -hi` and have an
    /// odd point count. Grids that happen to satisfy this are marked
    /// symmetric even when it was not requested.
    pub fn new(
        bounds: &[(f64, f64)],
        resolution: &[usize],
        symmetric: bool,
    ) -> Result<Self, GridError> {
        if bounds.is_empty() {
            return Err(GridError::InvalidBounds("no axes".into()));
        }
        if bounds.len() != resolution.len() {
            return Err(GridError::InvalidBounds(format!(
                "{} bounds for {} resolutions",
                bounds.len(),
                resolution.len()
            )));
        }
        let mut total: usize = 1;
        for (axis, (&(lo, hi), &n)) in bounds.iter().zip(resolution).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(GridError::InvalidBounds(format!(
                    "axis {axis}: need finite lo < hi, got [{lo}, {hi}]"
                )));
            }
            if n < 2 {
                return Err(GridError::InvalidResolution { axis, got: n });
            }
            total = total.checked_mul(n).ok_or(GridError::TooLarge)?;
        }
        let feasible: Vec<bool> = bounds
            .iter()
            .zip(resolution)
            .map(|(&(lo, hi), &n)| lo == -hi && n % 2 == 1)
            .collect();
        if symmetric {
            if let Some(axis) = feasible.iter().position(|ok| !ok) {
                return Err(GridError::SymmetryInfeasible { axis });
            }
        }
        let all_symmetric = feasible.iter().all(|&ok| ok);
        let axes: Vec<Axis> = bounds
            .iter()
            .zip(resolution)
            .map(|(&(lo, hi), &points)| Axis {
                lo,
                hi,
                points,
                symmetric: all_symmetric,
            })
            .collect();
        let origin_included = axes
            .iter()
            .all(|a| (0..a.points).any(|i| a.coord(i) == 0.0));
        Ok(SampleGrid {
            axes,
            symmetric: all_symmetric,
            origin_included,
        })
    }

    /// One-dimensional convenience constructor.
    pub fn line(lo: f64, hi: f64, points: usize, symmetric: bool) -> Result<Self, GridError> {
        Self::new(&[(lo, hi)], &[points], symmetric)
    }

    pub fn dimension(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.points).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn origin_included(&self) -> bool {
        self.origin_included
    }

    /// Largest per-axis lattice step.
    pub fn max_step(&self) -> f64 {
        self.axes.iter().map(Axis::step).fold(0.0, f64::max)
    }

    pub fn min_step(&self) -> f64 {
        self.axes
            .iter()
            .map(Axis::step)
            .fold(f64::INFINITY, f64::min)
    }

    /// Radius of the largest origin-centred ball inside the bounds.
    pub fn inscribed_radius(&self) -> f64 {
        self.axes
            .iter()
            .map(|a| (-a.lo).min(a.hi))
            .fold(f64::INFINITY, f64::min)
            .max(0.0)
    }

    pub fn multi_index(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.axes.len()];
        for (k, a) in self.axes.iter().enumerate().rev() {
            out[k] = index % a.points;
            index /= a.points;
        }
        out
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi
            .iter()
            .zip(&self.axes)
            .fold(0, |acc, (&i, a)| acc * a.points + i)
    }

    pub fn point(&self, index: usize) -> Vec<f64> {
        let mut buf = vec![0.0; self.axes.len()];
        self.point_into(index, &mut buf);
        buf
    }

    pub fn point_into(&self, mut index: usize, buf: &mut [f64]) {
        for (k, a) in self.axes.iter().enumerate().rev() {
            buf[k] = a.coord(index % a.points);
            index /= a.points;
        }
    }

    pub fn origin_index(&self) -> Option<usize> {
        if !self.origin_included {
            return None;
        }
        let multi: Vec<usize> = self
            .axes
            .iter()
            .map(|a| (0..a.points).position(|i| a.coord(i) == 0.0).unwrap())
            .collect();
        Some(self.flat_index(&multi))
    }

    /// Index of `-x` for the lattice point `x`; `None` unless symmetric.
    pub fn negated_index(&self, index: usize) -> Option<usize> {
        if !self.symmetric {
            return None;
        }
        let multi: Vec<usize> = self
            .multi_index(index)
            .iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.points - 1 - i)
            .collect();
        Some(self.flat_index(&multi))
    }

    /// Lattice points one step away along a single axis.
    pub fn neighbors(&self, index: usize) -> Vec<usize> {
        let multi = self.multi_index(index);
        let mut out = Vec::with_capacity(2 * multi.len());
        for k in 0..multi.len() {
            let mut m = multi.clone();
            if multi[k] > 0 {
                m[k] = multi[k] - 1;
                out.push(self.flat_index(&m));
            }
            if multi[k] + 1 < self.axes[k].points {
                m[k] = multi[k] + 1;
                out.push(self.flat_index(&m));
            }
        }
        out
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let (pa, pb) = (self.point(a), self.point(b));
        pa.iter()
            .zip(&pb)
            .map(|(u, v)| (u - v) * (u - v))
            .sum::<f64>()
            .sqrt()
    }

    /// Evaluates `f` at every lattice point, in index order.
    ///
    /// On failure the error of the lowest failing index is returned, so the
    /// result does not depend on scheduling.
    pub fn sample(&self, f: &FuncExpr) -> Result<Vec<f64>, GridError> {
        if f.dimension() != self.dimension() {
            return Err(GridError::Dimension {
                expected: self.dimension(),
                got: f.dimension(),
            });
        }
        let results: Vec<Result<f64, EvalError>> = (0..self.len())
            .into_par_iter()
            .map_init(
                || vec![0.0; self.dimension()],
                |buf, i| {
                    self.point_into(i, buf);
                    f.eval(buf)
                },
            )
            .collect();
        results
            .into_iter()
            .collect::<Result<Vec<f64>, EvalError>>()
            .map_err(GridError::from)
    }
}

impl fmt::Display for SampleGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, a) in self.axes.iter().enumerate() {
            if k > 0 {
                f.write_str(" x ")?;
            }
            write!(f, "[{}, {}]/{}", a.lo, a.hi, a.points)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_line_has_hundredth_step() {
        let g = SampleGrid::line(-5.0, 5.0, 1001, true).unwrap();
        assert_eq!(g.len(), 1001);
        assert!(g.origin_included());
        assert!((g.max_step() - 0.01).abs() < 1e-15);
        assert_eq!(g.point(500), vec![0.0]);
        assert_eq!(g.point(550), vec![0.5]);
        assert_eq!(g.point(700), vec![2.0]);
        assert_eq!(g.point(1000), vec![5.0]);
    }

    #[test]
    fn symmetric_square_contains_origin() {
        let g = SampleGrid::new(&[(-1.0, 1.0), (-1.0, 1.0)], &[101, 101], true).unwrap();
        assert_eq!(g.len(), 101 * 101);
        let o = g.origin_index().unwrap();
        assert_eq!(g.point(o), vec![0.0, 0.0]);
    }

    #[test]
    fn negation_closure_is_exact() {
        let g = SampleGrid::new(&[(-3.7, 3.7), (-1.0, 1.0)], &[37, 9], true).unwrap();
        for i in 0..g.len() {
            let j = g.negated_index(i).unwrap();
            let (p, q) = (g.point(i), g.point(j));
            for (a, b) in p.iter().zip(&q) {
                assert_eq!(*a, -*b);
            }
        }
    }

    #[test]
    fn symmetry_infeasible() {
        assert_eq!(
            SampleGrid::line(0.0, 1.0, 2, true),
            Err(GridError::SymmetryInfeasible { axis: 0 })
        );
        assert!(SampleGrid::line(-1.0, 1.0, 4, true).is_err());
    }

    #[test]
    fn invalid_bounds_and_resolution() {
        assert!(matches!(
            SampleGrid::line(1.0, 1.0, 5, false),
            Err(GridError::InvalidBounds(_))
        ));
        assert!(matches!(
            SampleGrid::line(0.0, 1.0, 1, false),
            Err(GridError::InvalidResolution { .. })
        ));
        assert!(matches!(
            SampleGrid::new(&[(0.0, 1.0)], &[3, 3], false),
            Err(GridError::InvalidBounds(_))
        ));
    }

    #[test]
    fn asymmetric_grid_endpoints_and_origin() {
        let g = SampleGrid::line(-1.0, 3.0, 5, false).unwrap();
        assert!(!g.is_symmetric());
        assert!(g.origin_included());
        assert_eq!(g.point(4), vec![3.0]);
        let h = SampleGrid::line(0.5, 3.0, 5, false).unwrap();
        assert!(!h.origin_included());
        assert_eq!(h.origin_index(), None);
    }

    #[test]
    fn index_round_trip_and_neighbors() {
        let g = SampleGrid::new(&[(0.0, 1.0), (0.0, 2.0)], &[3, 4], false).unwrap();
        for i in 0..g.len() {
            assert_eq!(g.flat_index(&g.multi_index(i)), i);
        }
        // (1, 1) in a 3x4 lattice
        let mut n = g.neighbors(5);
        n.sort();
        assert_eq!(n, vec![1, 4, 6, 9]);
        assert_eq!(g.neighbors(0).len(), 2);
    }

    #[test]
    fn sample_reports_lowest_failing_index() {
        let g = SampleGrid::line(-1.0, 1.0, 5, true).unwrap();
        let f = FuncExpr::parse("1 / x1", 1).unwrap();
        assert!(matches!(
            g.sample(&f),
            Err(GridError::Eval(EvalError::DivisionByZero { .. }))
        ));
        let h = FuncExpr::parse("x1 + x2", 2).unwrap();
        assert!(matches!(g.sample(&h), Err(GridError::Dimension { .. })));
    }
}
