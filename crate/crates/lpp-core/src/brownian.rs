use alloc::vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::ensemble::LineEnsemble;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::rng::RngStream;

/// Samples `n` independent Brownian lines on `grid`, line `i` starting at
/// `initial[i]` (all zero when `initial` is `None`).
///
/// Increments are Gaussian with mean 0 and variance `dt`, drawn line-major:
/// all increments of line 1 first, then line 2, and so on. This order is part
/// of the reproducibility contract.
pub fn sample_brownian_ensemble(
    n: usize,
    grid: GridSpec,
    stream: RngStream,
    initial: Option<&[f64]>,
) -> Result<LineEnsemble> {
    if n == 0 {
        return Err(Error::Config("need at least one line"));
    }
    if let Some(init) = initial {
        if init.len() != n {
            return Err(Error::Config("initial values must match line count"));
        }
    }
    if !grid.is_uniform() {
        return Err(Error::Config("sampling requires a uniform grid"));
    }
    let cols = grid.points();
    let sd = libm::sqrt(grid.dt());
    let mut rng = stream.rng();
    let mut values = vec![0.0; n * cols];
    for line in 0..n {
        let row = &mut values[line * cols..(line + 1) * cols];
        row[0] = initial.map_or(0.0, |init| init[line]);
        for j in 1..cols {
            let z: f64 = rng.sample(StandardNormal);
            row[j] = row[j - 1] + sd * z;
        }
    }
    LineEnsemble::new(0, n, grid, values, stream.mixed_seed())
}

/// Samples the two-sided Brownian window used by landscape coordinates.
///
/// Lines carry the global labels `-floor(t_max*n) ..= -floor(t_min*n)` (top
/// to bottom), one independent two-sided Brownian motion each, on a time grid
/// covering `[t_min - x_pad, t_max + x_pad]` with `steps` cells. That window
/// suffices to evaluate passage values between scaled points `(x,t)`, `(y,s)`
/// with `t,s` in `[t_min, t_max]` and `|x|, |y| <= x_pad * n^{1/3} / 2`.
///
/// Each line is anchored to 0 at the grid column nearest time 0 (clamped into
/// the window); passage values only read increments, so the anchor is pure
/// presentation.
pub fn sample_landscape_window(
    n: usize,
    t_min: f64,
    t_max: f64,
    x_pad: f64,
    steps: usize,
    stream: RngStream,
) -> Result<LineEnsemble> {
    if n == 0 {
        return Err(Error::Config("need n >= 1"));
    }
    if !(t_min < t_max) {
        return Err(Error::Config("window requires t_min < t_max"));
    }
    if x_pad < 0.0 {
        return Err(Error::Config("x_pad must be nonnegative"));
    }
    let top = -libm::floor(t_max * n as f64) as i64;
    let bottom = -libm::floor(t_min * n as f64) as i64;
    let n_lines = (bottom - top + 1) as usize;
    let grid = GridSpec::new(t_min - x_pad, t_max + x_pad, steps)?;
    let anchor = grid.nearest_column(0.0);
    let cols = grid.points();
    let sd = libm::sqrt(grid.dt());
    let mut rng = stream.rng();
    let mut values = vec![0.0; n_lines * cols];
    for line in 0..n_lines {
        let row = &mut values[line * cols..(line + 1) * cols];
        for j in 1..cols {
            let z: f64 = rng.sample(StandardNormal);
            row[j] = row[j - 1] + sd * z;
        }
        let base = row[anchor];
        for v in row.iter_mut() {
            *v -= base;
        }
    }
    LineEnsemble::new(top, n_lines, grid, values, stream.mixed_seed())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_given_stream() {
        let grid = GridSpec::new(0.0, 1.0, 16).unwrap();
        let a = sample_brownian_ensemble(3, grid.clone(), RngStream::new(9, 1), None).unwrap();
        let b = sample_brownian_ensemble(3, grid.clone(), RngStream::new(9, 1), None).unwrap();
        assert_eq!(a, b);
        let c = sample_brownian_ensemble(3, grid, RngStream::new(9, 2), None).unwrap();
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn initial_values_respected() {
        let grid = GridSpec::new(0.0, 1.0, 4).unwrap();
        let e = sample_brownian_ensemble(2, grid, RngStream::new(1, 0), Some(&[5.0, -1.0])).unwrap();
        assert_eq!(e.value(1, 0), 5.0);
        assert_eq!(e.value(2, 0), -1.0);
    }

    #[test]
    fn window_line_labels() {
        let e = sample_landscape_window(8, 0.0, 1.0, 0.25, 32, RngStream::new(3, 0)).unwrap();
        assert_eq!(e.top_index, -8);
        assert_eq!(e.n_lines, 9);
        assert_eq!(e.line_of_global(0).unwrap(), 9);
        // anchored at the column nearest t = 0
        let anchor = e.grid.nearest_column(0.0);
        for line in 1..=e.n_lines {
            assert_eq!(e.value(line, anchor), 0.0);
        }
    }

    #[test]
    fn degenerate_windows_rejected() {
        assert!(sample_landscape_window(8, 1.0, 1.0, 0.1, 8, RngStream::new(0, 0)).is_err());
        let grid = GridSpec::new(0.0, 0.0, 1);
        assert!(grid.is_err());
    }
}
