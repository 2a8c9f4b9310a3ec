use crate::error::{Error, Result};
use alloc::vec::Vec;

/// Time grid for line ensembles.
///
/// Two flavours share one type. A *uniform* grid has `steps` equal intervals
/// between `t_start` and `t_end`. An *explicit* grid carries its strictly
/// increasing knot times directly; these arise from sorting ensembles, where
/// running maxima introduce breakpoints between the original sample points
/// and the output is only piecewise linear on a refined knot set.
///
/// All path optimizations in this crate restrict jump times to grid points.
/// For lines that are piecewise linear *on the grid* the objective is linear
/// in each jump time within a cell, so a grid-aligned optimum always exists
/// and the restriction loses nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub t_start: f64,
    pub t_end: f64,
    pub steps: usize,
    times: Option<Vec<f64>>,
}

impl GridSpec {
    pub fn new(t_start: f64, t_end: f64, steps: usize) -> Result<Self> {
        if !(t_start < t_end) || !t_start.is_finite() || !t_end.is_finite() {
            return Err(Error::Config("grid requires finite t_start < t_end"));
        }
        if steps == 0 {
            return Err(Error::Config("grid requires steps >= 1"));
        }
        Ok(GridSpec { t_start, t_end, steps, times: None })
    }

    /// Grid with explicitly listed knot times (strictly increasing).
    pub fn new_explicit(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::Config("explicit grid requires at least two knots"));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::Config("explicit grid requires finite knots"));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config("explicit grid knots must strictly increase"));
        }
        Ok(GridSpec {
            t_start: times[0],
            t_end: times[times.len() - 1],
            steps: times.len() - 1,
            times: Some(times),
        })
    }

    pub fn is_uniform(&self) -> bool {
        self.times.is_none()
    }

    /// Explicit knot vector, if this grid carries one.
    pub fn knots(&self) -> Option<&[f64]> {
        self.times.as_deref()
    }

    /// Number of grid points (`steps + 1`).
    pub fn points(&self) -> usize {
        self.steps + 1
    }

    /// Average cell width. Exact for uniform grids; explicit grids use this
    /// only for slack in [`covers`](Self::covers)-style checks.
    pub fn dt(&self) -> f64 {
        (self.t_end - self.t_start) / self.steps as f64
    }

    /// Time of grid point `j`. Exact at both endpoints.
    pub fn time(&self, j: usize) -> f64 {
        debug_assert!(j <= self.steps);
        match &self.times {
            Some(ts) => ts[j],
            None => self.t_start + (self.t_end - self.t_start) * (j as f64 / self.steps as f64),
        }
    }

    /// Closest grid column to `t`, clamped into range.
    pub fn nearest_column(&self, t: f64) -> usize {
        match &self.times {
            Some(ts) => {
                let i = ts.partition_point(|&x| x < t);
                if i == 0 {
                    0
                } else if i >= ts.len() {
                    ts.len() - 1
                } else if t - ts[i - 1] <= ts[i] - t {
                    i - 1
                } else {
                    i
                }
            }
            None => {
                let u = (t - self.t_start) / (self.t_end - self.t_start) * self.steps as f64;
                let j = libm::round(u);
                if j <= 0.0 {
                    0
                } else if j >= self.steps as f64 {
                    self.steps
                } else {
                    j as usize
                }
            }
        }
    }

    /// Index `j < steps` with `time(j) <= t <= time(j+1)`, clamped into range.
    pub fn segment_of(&self, t: f64) -> usize {
        match &self.times {
            Some(ts) => {
                let i = ts.partition_point(|&x| x <= t);
                i.max(1).min(ts.len() - 1) - 1
            }
            None => {
                let u = (t - self.t_start) / (self.t_end - self.t_start) * self.steps as f64;
                if u <= 0.0 {
                    0
                } else if u >= self.steps as f64 {
                    self.steps - 1
                } else {
                    u as usize
                }
            }
        }
    }

    /// Column holding exactly time `t`, if one does (to within `tol`).
    pub fn column_at(&self, t: f64, tol: f64) -> Option<usize> {
        let j = self.nearest_column(t);
        if (self.time(j) - t).abs() <= tol {
            Some(j)
        } else {
            None
        }
    }

    /// Whether `t` lies inside `[t_start, t_end]` up to a half-cell slack.
    pub fn covers(&self, t: f64) -> bool {
        let half = 0.5 * self.dt();
        t >= self.t_start - half && t <= self.t_end + half
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_degenerate() {
        assert!(GridSpec::new(1.0, 1.0, 4).is_err());
        assert!(GridSpec::new(0.0, 1.0, 0).is_err());
        assert!(GridSpec::new(2.0, 1.0, 4).is_err());
        assert!(GridSpec::new_explicit(vec![0.0]).is_err());
        assert!(GridSpec::new_explicit(vec![0.0, 0.0, 1.0]).is_err());
        assert!(GridSpec::new_explicit(vec![0.0, 1.0, 0.5]).is_err());
    }

    #[test]
    fn endpoints_exact() {
        let g = GridSpec::new(-0.3, 1.7, 7).unwrap();
        assert_eq!(g.time(0), -0.3);
        assert_eq!(g.time(7), 1.7);
        assert_eq!(g.points(), 8);
    }

    #[test]
    fn snapping_clamps() {
        let g = GridSpec::new(0.0, 1.0, 10).unwrap();
        assert_eq!(g.nearest_column(-5.0), 0);
        assert_eq!(g.nearest_column(0.249), 2);
        assert_eq!(g.nearest_column(0.251), 3);
        assert_eq!(g.nearest_column(7.0), 10);
    }

    #[test]
    fn explicit_grid_lookups() {
        let g = GridSpec::new_explicit(vec![0.0, 0.25, 0.3, 1.0]).unwrap();
        assert!(!g.is_uniform());
        assert_eq!(g.steps, 3);
        assert_eq!(g.time(2), 0.3);
        assert_eq!(g.nearest_column(0.26), 1);
        assert_eq!(g.nearest_column(0.29), 2);
        assert_eq!(g.nearest_column(-1.0), 0);
        assert_eq!(g.nearest_column(9.0), 3);
        assert_eq!(g.segment_of(0.27), 1);
        assert_eq!(g.segment_of(0.25), 1);
        assert_eq!(g.segment_of(-1.0), 0);
        assert_eq!(g.segment_of(2.0), 2);
        assert_eq!(g.column_at(0.3, 1e-12), Some(2));
        assert_eq!(g.column_at(0.31, 1e-12), None);
    }

    #[test]
    fn segment_of_uniform_interior() {
        let g = GridSpec::new(0.0, 1.0, 4).unwrap();
        assert_eq!(g.segment_of(0.1), 0);
        assert_eq!(g.segment_of(0.6), 2);
        assert_eq!(g.segment_of(1.0), 3);
    }
}
