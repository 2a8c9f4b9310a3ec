use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// A finite family of piecewise-linear lines sampled on a common grid.
///
/// Rows are numbered by `line` from 1 (top) to `n_lines` (bottom). Each line
/// also carries a global integer label: line 1 is `top_index` and labels
/// increase downwards by one. One-sided ensembles use `top_index = 0`;
/// landscape windows label line `r` by the global index `-floor(t*n)` of the
/// time slice it represents.
///
/// `values` is row-major: `n_lines` rows of `grid.points()` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct LineEnsemble {
    pub top_index: i64,
    pub n_lines: usize,
    pub grid: GridSpec,
    pub values: Vec<f64>,
    /// Mixed stream seed recorded for provenance.
    pub seed: u64,
}

impl LineEnsemble {
    pub fn new(top_index: i64, n_lines: usize, grid: GridSpec, values: Vec<f64>, seed: u64) -> Result<Self> {
        if n_lines == 0 {
            return Err(Error::Config("ensemble requires at least one line"));
        }
        if values.len() != n_lines * grid.points() {
            return Err(Error::Config("value matrix does not match n_lines x grid points"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("ensemble values must be finite"));
        }
        Ok(LineEnsemble { top_index, n_lines, grid, values, seed })
    }

    pub fn cols(&self) -> usize {
        self.grid.points()
    }

    /// Value of `line` (1-based) at grid column `col`.
    #[inline]
    pub fn value(&self, line: usize, col: usize) -> f64 {
        debug_assert!((1..=self.n_lines).contains(&line) && col < self.cols());
        self.values[(line - 1) * self.cols() + col]
    }

    /// Full row of `line` (1-based).
    #[inline]
    pub fn row(&self, line: usize) -> &[f64] {
        let w = self.cols();
        &self.values[(line - 1) * w..line * w]
    }

    /// 1-based line number of a global label, if inside this ensemble.
    pub fn line_of_global(&self, global: i64) -> Result<usize> {
        let off = global - self.top_index;
        if off < 0 || off >= self.n_lines as i64 {
            return Err(Error::Domain("global line index outside ensemble"));
        }
        Ok(off as usize + 1)
    }

    pub fn global_of_line(&self, line: usize) -> i64 {
        self.top_index + (line as i64 - 1)
    }

    /// Value of `line` at an off-grid time, by linear interpolation
    /// (clamped to the grid range; callers check coverage separately).
    pub fn interpolate(&self, line: usize, t: f64) -> f64 {
        let g = &self.grid;
        if t <= g.t_start {
            return self.value(line, 0);
        }
        if t >= g.t_end {
            return self.value(line, g.steps);
        }
        let j = g.segment_of(t);
        let (a, b) = (g.time(j), g.time(j + 1));
        let frac = (t - a) / (b - a);
        self.value(line, j) * (1.0 - frac) + self.value(line, j + 1) * frac
    }

    /// Sub-ensemble keeping columns `c0..=c1`, rebased so the first kept
    /// column is the new grid origin.
    pub fn restrict_columns(&self, c0: usize, c1: usize) -> Result<LineEnsemble> {
        if c0 >= c1 || c1 > self.grid.steps {
            return Err(Error::Domain("column restriction requires c0 < c1 <= steps"));
        }
        let grid = match self.grid.knots() {
            Some(ts) => GridSpec::new_explicit(ts[c0..=c1].to_vec())?,
            None => GridSpec::new(self.grid.time(c0), self.grid.time(c1), c1 - c0)?,
        };
        let mut values = Vec::with_capacity(self.n_lines * (c1 - c0 + 1));
        for line in 1..=self.n_lines {
            values.extend_from_slice(&self.row(line)[c0..=c1]);
        }
        LineEnsemble::new(self.top_index, self.n_lines, grid, values, self.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn small() -> LineEnsemble {
        let grid = GridSpec::new(0.0, 1.0, 2).unwrap();
        LineEnsemble::new(-3, 2, grid, vec![0.0, 1.0, 2.0, 10.0, 11.0, 12.0], 7).unwrap()
    }

    #[test]
    fn indexing_roundtrip() {
        let e = small();
        assert_eq!(e.value(1, 2), 2.0);
        assert_eq!(e.value(2, 0), 10.0);
        assert_eq!(e.row(2), &[10.0, 11.0, 12.0]);
        assert_eq!(e.global_of_line(1), -3);
        assert_eq!(e.line_of_global(-2).unwrap(), 2);
        assert!(e.line_of_global(0).is_err());
    }

    #[test]
    fn interpolation_is_linear() {
        let e = small();
        assert_eq!(e.interpolate(1, 0.25), 0.5);
        assert_eq!(e.interpolate(2, 1.0), 12.0);
        assert_eq!(e.interpolate(2, -4.0), 10.0);
    }

    #[test]
    fn restriction_rebases() {
        let e = small();
        let r = e.restrict_columns(1, 2).unwrap();
        assert_eq!(r.grid.t_start, 0.5);
        assert_eq!(r.row(1), &[1.0, 2.0]);
        assert_eq!(r.n_lines, 2);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let grid = GridSpec::new(0.0, 1.0, 2).unwrap();
        assert!(LineEnsemble::new(0, 2, grid, vec![0.0; 5], 0).is_err());
    }
}
