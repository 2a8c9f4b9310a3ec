use alloc::vec::Vec;

use crate::brownian::sample_brownian_ensemble;
use crate::ensemble::LineEnsemble;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::lpp::{forward_profile, last_passage, Point};
use crate::melon::MelonEnsemble;
use crate::rng::RngStream;

/// Edge-rescaled top melon lines on a spatial grid.
///
/// Entry `(i, j)` holds
/// `n^{1/6} * (m_i(1 + 2 y_j n^{-1/3}) - 2 sqrt(n) - 2 y_j n^{1/6})`
/// where `m_i` is melon line `i` read by linear interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledLines {
    pub n: usize,
    pub y_grid: Vec<f64>,
    /// Row-major `k_top x y_grid.len()`.
    pub lines: Vec<f64>,
}

impl ScaledLines {
    pub fn k_top(&self) -> usize {
        self.lines.len() / self.y_grid.len()
    }

    pub fn value(&self, line: usize, j: usize) -> f64 {
        self.lines[(line - 1) * self.y_grid.len() + j]
    }
}

/// Centered two-parameter passage values on a rectangular grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledSheet {
    pub n: usize,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Row-major `xs.len() x ys.len()`.
    pub values: Vec<f64>,
}

impl ScaledSheet {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ys.len() + j]
    }
}

/// A point of scaled space-time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandscapePoint {
    pub x: f64,
    pub t: f64,
}

pub fn n_pow(n: usize, e: f64) -> f64 {
    libm::pow(n as f64, e)
}

/// Rescales the top `k_top` melon lines onto `y_grid`.
///
/// The melon grid must cover every requested time `1 + 2 y n^{-1/3}`.
pub fn airy_rescale(melon: &MelonEnsemble, k_top: usize, y_grid: &[f64]) -> Result<ScaledLines> {
    let n = melon.n_lines();
    if k_top == 0 || k_top > n {
        return Err(Error::Domain("k_top must lie in 1..=n"));
    }
    if y_grid.is_empty() {
        return Err(Error::Domain("empty y grid"));
    }
    let n16 = n_pow(n, 1.0 / 6.0);
    let n13 = n_pow(n, -1.0 / 3.0);
    let sqrt_n = libm::sqrt(n as f64);
    let grid = &melon.ens.grid;
    let mut lines = Vec::with_capacity(k_top * y_grid.len());
    for line in 1..=k_top {
        for &y in y_grid {
            let t = 1.0 + 2.0 * y * n13;
            if !grid.covers(t) {
                return Err(Error::Domain("melon grid does not cover the requested y range"));
            }
            let raw = melon.ens.interpolate(line, t);
            lines.push(n16 * (raw - 2.0 * sqrt_n - 2.0 * y * n16));
        }
    }
    Ok(ScaledLines { n, y_grid: y_grid.to_vec(), lines })
}

/// The line environment a sheet sample is computed in: `n` Brownian lines on
/// a grid that covers every scaled start `2 x n^{-1/3}` and end
/// `1 + 2 y n^{-1/3}`, with time 0 landing exactly on a grid column.
///
/// Exposed so couplings with other constructions (melons of the same noise)
/// can rebuild the identical environment.
pub fn sheet_environment(
    n: usize,
    xs: &[f64],
    ys: &[f64],
    steps: usize,
    stream: RngStream,
) -> Result<LineEnsemble> {
    if n == 0 || xs.is_empty() || ys.is_empty() || steps == 0 {
        return Err(Error::Config("sheet needs n, steps and nonempty coordinate grids"));
    }
    let n13 = n_pow(n, -1.0 / 3.0);
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let t_lo = (2.0 * lo * n13).min(0.0);
    let t_hi = 1.0 + 2.0 * hi * n13;
    if !(t_lo < t_hi) {
        return Err(Error::Domain("scaled window is empty"));
    }
    // anchor the grid so that t = 0 is an exact column
    let dt = (t_hi - t_lo) / steps as f64;
    let neg = libm::ceil(-t_lo / dt - 1e-9).max(0.0) as usize;
    let pos = libm::ceil(t_hi / dt - 1e-9).max(1.0) as usize;
    let grid = GridSpec::new(-(neg as f64) * dt, pos as f64 * dt, neg + pos)?;
    sample_brownian_ensemble(n, grid, stream, None)
}

/// Checks the snapping precondition: the grid cell must be at most a quarter
/// of the smallest scaled coordinate spacing, so snapped endpoints stay well
/// separated.
fn check_resolution(grid: &GridSpec, n: usize, xs: &[f64], ys: &[f64]) -> Result<()> {
    let mut min_gap = f64::INFINITY;
    for w in [xs, ys] {
        for pair in w.windows(2) {
            let d = pair[1] - pair[0];
            if d <= 0.0 {
                return Err(Error::Domain("coordinate grids must be strictly increasing"));
            }
            min_gap = min_gap.min(d);
        }
    }
    if min_gap.is_finite() && grid.dt() > n_pow(n, -1.0 / 3.0) * min_gap / 4.0 {
        return Err(Error::Domain("grid too coarse for the requested coordinate spacing"));
    }
    Ok(())
}

/// Samples a centered passage-value sheet on `xs x ys`:
///
/// `S(x, y) = n^{1/6} * (B[(2x n^{-1/3}, line n) -> (1 + 2y n^{-1/3}, line 1)]
///            - 2 sqrt(n) - 2 (y-x) n^{1/6})`,
///
/// all entries from one shared environment so joint laws are preserved.
pub fn sheet_sample(
    n: usize,
    xs: &[f64],
    ys: &[f64],
    steps: usize,
    stream: RngStream,
) -> Result<ScaledSheet> {
    let env = sheet_environment(n, xs, ys, steps, stream)?;
    sheet_from_environment(&env, n, xs, ys)
}

/// The sheet values of an already-sampled environment (`sheet_sample` =
/// `sheet_environment` + this).
pub fn sheet_from_environment(
    env: &LineEnsemble,
    n: usize,
    xs: &[f64],
    ys: &[f64],
) -> Result<ScaledSheet> {
    if env.n_lines != n {
        return Err(Error::Domain("environment must carry exactly n lines"));
    }
    check_resolution(&env.grid, n, xs, ys)?;
    let n16 = n_pow(n, 1.0 / 6.0);
    let n13 = n_pow(n, -1.0 / 3.0);
    let sqrt_n = libm::sqrt(n as f64);
    let max_y_col = env.grid.nearest_column(1.0 + 2.0 * ys[ys.len() - 1] * n13);
    let mut values = Vec::with_capacity(xs.len() * ys.len());
    for &x in xs {
        let tx = 2.0 * x * n13;
        if !env.grid.covers(tx) {
            return Err(Error::Domain("environment does not cover a requested start"));
        }
        let cx = env.grid.nearest_column(tx);
        let profile = forward_profile(env, Point::new(cx, n), 1, max_y_col)?;
        for &y in ys {
            let ty = 1.0 + 2.0 * y * n13;
            if !env.grid.covers(ty) {
                return Err(Error::Domain("environment does not cover a requested end"));
            }
            let cy = env.grid.nearest_column(ty);
            if cy <= cx {
                return Err(Error::Domain("sheet requires scaled start < scaled end"));
            }
            let passage = profile[cy - cx];
            values.push(n16 * (passage - 2.0 * sqrt_n - 2.0 * (y - x) * n16));
        }
    }
    Ok(ScaledSheet { n, xs: xs.to_vec(), ys: ys.to_vec(), values })
}

/// Scaled-coordinate passage value between two space-time points:
///
/// `L(x, t; y, s) = n^{1/6} * (B[(x,t) -> (y,s)] - 2 (s-t) sqrt(n)
///                  - 2 (y-x) n^{1/6})`
///
/// where `(x, t)` maps to grid time `t + 2 x n^{-1/3}` on the line labeled
/// `-floor(t n)`. Returns negative infinity when both points land on the same
/// line with reversed grid times (the degenerate collision).
pub fn landscape_value(
    env: &LineEnsemble,
    n: usize,
    x: f64,
    t: f64,
    y: f64,
    s: f64,
) -> Result<f64> {
    if !(t < s) {
        return Err(Error::Domain("needs t < s"));
    }
    let n13 = n_pow(n, -1.0 / 3.0);
    let n16 = n_pow(n, 1.0 / 6.0);
    let line_start = env.line_of_global(-libm::floor(t * n as f64) as i64)?;
    let line_end = env.line_of_global(-libm::floor(s * n as f64) as i64)?;
    let tt = t + 2.0 * x * n13;
    let ts = s + 2.0 * y * n13;
    if !env.grid.covers(tt) || !env.grid.covers(ts) {
        return Err(Error::Domain("window does not cover the requested points"));
    }
    let ct = env.grid.nearest_column(tt);
    let cs = env.grid.nearest_column(ts);
    let centered = |b: f64| n16 * (b - 2.0 * (s - t) * libm::sqrt(n as f64) - 2.0 * (y - x) * n16);
    if line_start == line_end {
        if cs < ct {
            return Ok(f64::NEG_INFINITY);
        }
        let b = env.value(line_start, cs) - env.value(line_start, ct);
        return Ok(centered(b));
    }
    if cs < ct {
        return Err(Error::Domain("scaled start time exceeds scaled end time"));
    }
    let b = last_passage(env, Point::new(ct, line_start), Point::new(cs, line_end))?;
    Ok(centered(b))
}

/// Adds the parabolic drift `(x - y)^2 / (s - t)`, turning a landscape value
/// into its stationary version.
pub fn stationary_version(value: f64, x: f64, t: f64, y: f64, s: f64) -> f64 {
    value + (x - y) * (x - y) / (s - t)
}

/// Scale map on sheets: values by `s`, coordinates by `s^2`.
pub fn sheet_rescale(sheet: &ScaledSheet, s: f64) -> Result<ScaledSheet> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Domain("scale must be positive"));
    }
    let s2 = s * s;
    Ok(ScaledSheet {
        n: sheet.n,
        xs: sheet.xs.iter().map(|&x| x * s2).collect(),
        ys: sheet.ys.iter().map(|&y| y * s2).collect(),
        values: sheet.values.iter().map(|&v| v * s).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::melon::melon;

    #[test]
    fn rescale_group_law() {
        let sheet = ScaledSheet {
            n: 10,
            xs: alloc::vec![-1.0, 0.0, 1.0],
            ys: alloc::vec![0.0, 2.0],
            values: alloc::vec![0.5, -0.25, 1.5, 2.0, -1.0, 0.75],
        };
        let s = 1.7;
        let back = sheet_rescale(&sheet_rescale(&sheet, s).unwrap(), 1.0 / s).unwrap();
        for (a, b) in back.values.iter().zip(&sheet.values) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in back.xs.iter().zip(&sheet.xs) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(sheet_rescale(&sheet, 0.0).is_err());
    }

    #[test]
    fn stationary_version_arithmetic() {
        assert_eq!(stationary_version(2.0, 1.0, 0.0, 1.0, 1.0), 2.0);
        assert_eq!(stationary_version(2.0, 1.0, 0.0, 0.0, 1.0), 3.0);
    }

    #[test]
    fn top_scaled_line_at_origin_matches_centered_top_value() {
        let n = 3;
        let grid = GridSpec::new(0.0, 1.2, 48).unwrap();
        let env = sample_brownian_ensemble(n, grid, RngStream::new(5, 1), None).unwrap();
        let m = melon(&env).unwrap();
        let scaled = airy_rescale(&m, 1, &[0.0]).unwrap();
        let n16 = n_pow(n, 1.0 / 6.0);
        let expect = n16 * (m.ens.interpolate(1, 1.0) - 2.0 * libm::sqrt(n as f64));
        assert!((scaled.value(1, 0) - expect).abs() < 1e-12);
    }

    #[test]
    fn scaled_lines_stay_ordered() {
        let n = 4;
        let grid = GridSpec::new(0.0, 2.4, 96).unwrap();
        let env = sample_brownian_ensemble(n, grid, RngStream::new(11, 3), None).unwrap();
        let m = melon(&env).unwrap();
        let ys = [-0.5, 0.0, 0.5, 1.0];
        let scaled = airy_rescale(&m, n, &ys).unwrap();
        for i in 1..n {
            for j in 0..ys.len() {
                assert!(scaled.value(i, j) >= scaled.value(i + 1, j) - 1e-9);
            }
        }
    }

    #[test]
    fn sheet_coverage_errors() {
        assert!(sheet_sample(5, &[], &[0.0], 10, RngStream::new(0, 0)).is_err());
        // coarse grid violates the snapping precondition for tight spacings
        let r = sheet_sample(64, &[0.0, 0.001], &[1.0], 8, RngStream::new(0, 0));
        assert!(r.is_err());
    }
}
