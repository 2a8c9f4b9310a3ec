use alloc::vec;
use alloc::vec::Vec;

use crate::ensemble::LineEnsemble;
use crate::error::{Error, Result};
use crate::brownian::sample_landscape_window;
use crate::lpp::{
    backward_profile, forward_profile, last_passage, last_passage_path, Point, Side,
};
use crate::melon::MelonEnsemble;
use crate::rng::RngStream;
use crate::scaling::{n_pow, ScaledLines, ScaledSheet};

/// Pointwise maximum of a two-piece sum over a shared middle grid, with the
/// maximizing middle locations recorded on both sides of every tie.
#[derive(Debug, Clone, PartialEq)]
pub struct ComposedSheet {
    pub xs: Vec<f64>,
    pub zs: Vec<f64>,
    pub y_grid: Vec<f64>,
    /// Row-major `xs.len() x zs.len()`.
    pub values: Vec<f64>,
    /// Smallest maximizing y per entry.
    pub argmax_left: Vec<f64>,
    /// Largest maximizing y per entry.
    pub argmax_right: Vec<f64>,
}

impl ComposedSheet {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.zs.len() + j]
    }

    /// Drops the argmax bookkeeping, leaving a plain sheet.
    pub fn into_sheet(self) -> ScaledSheet {
        ScaledSheet { n: 0, xs: self.xs, ys: self.zs, values: self.values }
    }
}

/// `Q(x, z) = max_y a(x, y) + b(y, z)` over the shared grid `y_grid`
/// (= `a.ys` = `b.xs`). Tie-breaking is deterministic: the extreme grid index
/// on each side.
pub fn metric_compose(a: &ScaledSheet, b: &ScaledSheet) -> Result<ComposedSheet> {
    if a.ys != b.xs {
        return Err(Error::Domain("middle grids must match exactly"));
    }
    let y_grid = a.ys.clone();
    let nx = a.xs.len();
    let nz = b.ys.len();
    let ny = y_grid.len();
    let mut values = Vec::with_capacity(nx * nz);
    let mut argmax_left = Vec::with_capacity(nx * nz);
    let mut argmax_right = Vec::with_capacity(nx * nz);
    for i in 0..nx {
        for j in 0..nz {
            let mut best = f64::NEG_INFINITY;
            let (mut left, mut right) = (0usize, 0usize);
            for m in 0..ny {
                let v = a.value(i, m) + b.value(m, j);
                if v > best {
                    best = v;
                    left = m;
                    right = m;
                } else if v == best {
                    right = m;
                }
            }
            values.push(best);
            argmax_left.push(y_grid[left]);
            argmax_right.push(y_grid[right]);
        }
    }
    Ok(ComposedSheet { xs: a.xs.clone(), zs: b.ys.clone(), y_grid, values, argmax_left, argmax_right })
}

/// Documented depth limit for dyadic constructions.
const MAX_DEPTH: usize = 8;

/// Independent slab sheets over a dyadic partition of `[t0, t1]`, in
/// landscape normalization, each on the spatial grid `xs`.
#[derive(Debug, Clone)]
pub struct DyadicLandscape {
    pub depth: usize,
    /// Slab boundaries: `2^depth + 1` dyadic times.
    pub times: Vec<f64>,
    /// Slab `i` holds values between times `i` and `i+1` on `xs x xs`.
    pub slabs: Vec<ScaledSheet>,
}

impl DyadicLandscape {
    /// Values over the whole span, by iterated composition of the slabs
    /// (left to right). Depth 0 is the single slab itself.
    pub fn full(&self) -> Result<ScaledSheet> {
        let mut acc = self.slabs[0].clone();
        for slab in &self.slabs[1..] {
            acc = metric_compose(&acc, slab)?.into_sheet();
        }
        Ok(acc)
    }
}

/// Passage values between two time slices of a window environment, for all
/// starts and ends on the scaled spatial grid `xs`, centered the landscape
/// way. One forward sweep per start.
pub fn slab_sheet(
    env: &LineEnsemble,
    n: usize,
    ta: f64,
    tb: f64,
    xs: &[f64],
) -> Result<ScaledSheet> {
    if !(ta < tb) {
        return Err(Error::Domain("slab needs ta < tb"));
    }
    let n13 = n_pow(n, -1.0 / 3.0);
    let n16 = n_pow(n, 1.0 / 6.0);
    let sqrt_n = libm::sqrt(n as f64);
    let line_a = env.line_of_global(-libm::floor(ta * n as f64) as i64)?;
    let line_b = env.line_of_global(-libm::floor(tb * n as f64) as i64)?;
    if line_b >= line_a {
        return Err(Error::Domain("slab too thin: boundary slices share a line"));
    }
    let col_of = |t: f64, x: f64| -> Result<usize> {
        let tt = t + 2.0 * x * n13;
        if !env.grid.covers(tt) {
            return Err(Error::Domain("window does not cover a slab coordinate"));
        }
        Ok(env.grid.nearest_column(tt))
    };
    let last_col = col_of(tb, xs[xs.len() - 1])?;
    let mut values = Vec::with_capacity(xs.len() * xs.len());
    for &x in xs {
        let cx = col_of(ta, x)?;
        if cx > last_col {
            return Err(Error::Domain("slab start column beyond end column"));
        }
        let profile = forward_profile(env, Point::new(cx, line_a), line_b, last_col)?;
        for &z in xs {
            let cz = col_of(tb, z)?;
            if cz < cx {
                return Err(Error::Domain("slab start column beyond end column"));
            }
            let b = profile[cz - cx];
            values.push(n16 * (b - 2.0 * (tb - ta) * sqrt_n - 2.0 * (z - x) * n16));
        }
    }
    Ok(ScaledSheet { n, xs: xs.to_vec(), ys: xs.to_vec(), values })
}

/// Samples `2^depth` independent slab sheets over the dyadic partition of
/// `[t0, t1]`: slab `i` draws its own window environment from
/// `stream.substream(i)`.
pub fn dyadic_landscape(
    depth: usize,
    t0: f64,
    t1: f64,
    xs: &[f64],
    n: usize,
    steps_per_slab: usize,
    stream: RngStream,
) -> Result<DyadicLandscape> {
    if depth > MAX_DEPTH {
        return Err(Error::Capacity("dyadic depth limited to 8"));
    }
    if !(t0 < t1) || xs.is_empty() {
        return Err(Error::Domain("needs t0 < t1 and a nonempty spatial grid"));
    }
    let slabs_count = 1usize << depth;
    let max_abs = xs.iter().fold(0.0f64, |m, &x| m.max(libm::fabs(x)));
    let x_pad = 2.0 * max_abs * n_pow(n, -1.0 / 3.0) + 4.0 * (t1 - t0) / steps_per_slab as f64;
    let mut times = Vec::with_capacity(slabs_count + 1);
    for i in 0..=slabs_count {
        times.push(t0 + (t1 - t0) * (i as f64 / slabs_count as f64));
    }
    let mut slabs = Vec::with_capacity(slabs_count);
    for i in 0..slabs_count {
        let (ta, tb) = (times[i], times[i + 1]);
        let env = sample_landscape_window(n, ta, tb, x_pad, steps_per_slab, stream.substream(i as u64))?;
        slabs.push(slab_sheet(&env, n, ta, tb, xs)?);
    }
    Ok(DyadicLandscape { depth, times, slabs })
}

/// A geodesic reported as a polyline in scaled coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicPolyline {
    pub times: Vec<f64>,
    pub locations: Vec<f64>,
}

impl GeodesicPolyline {
    /// Location at time `t` by linear interpolation (clamped).
    pub fn location(&self, t: f64) -> f64 {
        let ts = &self.times;
        if t <= ts[0] {
            return self.locations[0];
        }
        if t >= ts[ts.len() - 1] {
            return self.locations[ts.len() - 1];
        }
        let mut lo = 0;
        let mut hi = ts.len() - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if ts[mid] <= t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let w = (t - ts[lo]) / (ts[hi] - ts[lo]);
        self.locations[lo] * (1.0 - w) + self.locations[hi] * w
    }
}

/// Extracts a maximizing path between scaled points and rescales it:
/// at window time `T` on global line `g`, the scaled location is
/// `(g + n T) / (2 n^{2/3})`, reported against the scaled clock running
/// affinely from `t` to `s`.
pub fn extract_geodesic(
    env: &LineEnsemble,
    n: usize,
    x: f64,
    t: f64,
    y: f64,
    s: f64,
    side: Side,
) -> Result<GeodesicPolyline> {
    if !(t < s) {
        return Err(Error::Domain("needs t < s"));
    }
    let n13 = n_pow(n, -1.0 / 3.0);
    let line_start = env.line_of_global(-libm::floor(t * n as f64) as i64)?;
    let line_end = env.line_of_global(-libm::floor(s * n as f64) as i64)?;
    let t_start = t + 2.0 * x * n13;
    let t_end = s + 2.0 * y * n13;
    if !env.grid.covers(t_start) || !env.grid.covers(t_end) {
        return Err(Error::Domain("window does not cover the requested endpoints"));
    }
    let c0 = env.grid.nearest_column(t_start);
    let c1 = env.grid.nearest_column(t_end);
    if c1 <= c0 || line_end >= line_start {
        return Err(Error::Domain("degenerate geodesic endpoints"));
    }
    let path = last_passage_path(env, Point::new(c0, line_start), Point::new(c1, line_end), side)?;

    let norm = 2.0 * n_pow(n, 2.0 / 3.0);
    // scaled clock: affine map of window time back onto [t, s]
    let clock_a = (s - t) / (env.grid.time(c1) - env.grid.time(c0));
    let clock_b = t - clock_a * env.grid.time(c0);
    let mut times = Vec::with_capacity(c1 - c0 + 1);
    let mut locations = Vec::with_capacity(c1 - c0 + 1);
    let mut line = path.start.line;
    let mut next_jump = 0usize;
    for c in c0..=c1 {
        while next_jump < path.jump_indices.len() && path.jump_indices[next_jump] <= c {
            line -= 1;
            next_jump += 1;
        }
        let global = env.global_of_line(line) as f64;
        let tc = env.grid.time(c);
        times.push(clock_a * tc + clock_b);
        locations.push((global + n as f64 * tc) / norm);
    }
    Ok(GeodesicPolyline { times, locations })
}

/// Builds a geodesic by dyadic midpoint refinement: each level inserts, for
/// every adjacent pair of chosen points, the spatial grid point maximizing
/// the two-piece passage value at the midpoint time (rightmost on ties).
/// Points once chosen are never moved.
pub fn dyadic_geodesic(
    env: &LineEnsemble,
    n: usize,
    x: f64,
    t: f64,
    y: f64,
    s: f64,
    depth: usize,
    z_grid: &[f64],
) -> Result<GeodesicPolyline> {
    if depth > MAX_DEPTH {
        return Err(Error::Capacity("dyadic depth limited to 8"));
    }
    if z_grid.is_empty() {
        return Err(Error::Domain("needs a nonempty spatial grid"));
    }
    if !(t < s) {
        return Err(Error::Domain("needs t < s"));
    }
    let n13 = n_pow(n, -1.0 / 3.0);
    let mut times = vec![t, s];
    let mut locs = vec![x, y];
    for level in 1..=depth {
        let pieces = 1usize << (level - 1);
        let mut new_times = Vec::with_capacity(2 * pieces + 1);
        let mut new_locs = Vec::with_capacity(2 * pieces + 1);
        for i in 0..pieces {
            let (tl, tr) = (times[i], times[i + 1]);
            let (zl, zr) = (locs[i], locs[i + 1]);
            let tm = 0.5 * (tl + tr);
            let line_l = env.line_of_global(-libm::floor(tl * n as f64) as i64)?;
            let line_m = env.line_of_global(-libm::floor(tm * n as f64) as i64)?;
            let line_r = env.line_of_global(-libm::floor(tr * n as f64) as i64)?;
            if line_m >= line_l || line_r >= line_m {
                return Err(Error::Domain("refinement too deep for this n: slices collide"));
            }
            let cl = env.grid.nearest_column(tl + 2.0 * zl * n13);
            let cr = env.grid.nearest_column(tr + 2.0 * zr * n13);
            let cm_first = env.grid.nearest_column(tm + 2.0 * z_grid[0] * n13);
            let cm_last = env.grid.nearest_column(tm + 2.0 * z_grid[z_grid.len() - 1] * n13);
            if cm_first < cl || cm_last > cr {
                return Err(Error::Domain("spatial grid exceeds the segment's window"));
            }
            let fwd = forward_profile(env, Point::new(cl, line_l), line_m, cm_last)?;
            let bwd = backward_profile(env, Point::new(cr, line_r), line_m, cm_first)?;
            // centering terms are constant in z, so the grid argmax is the
            // argmax of the raw two-piece sum
            let mut best = f64::NEG_INFINITY;
            let mut best_z = z_grid[0];
            for &z in z_grid {
                let c = env.grid.nearest_column(tm + 2.0 * z * n13);
                let v = fwd[c - cl] + bwd[c - cm_first];
                if v >= best {
                    best = v;
                    best_z = z;
                }
            }
            new_times.push(tl);
            new_locs.push(zl);
            new_times.push(tm);
            new_locs.push(best_z);
        }
        new_times.push(times[pieces]);
        new_locs.push(locs[pieces]);
        times = new_times;
        locs = new_locs;
    }
    Ok(GeodesicPolyline { times, locations: locs })
}

/// Last occupation times of each line along the rightmost melon geodesic,
/// rescaled: `z_k = (t_k - 1) n^{1/3} / 2` where `t_k` is the time of the
/// jump off line `k`. By convention the top line reports the target `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZkProfile {
    pub ks: Vec<usize>,
    pub z: Vec<f64>,
}

pub fn zk_profile(melon: &MelonEnsemble, x: f64, y: f64, k_max: usize) -> Result<ZkProfile> {
    let n = melon.n_lines();
    if !(x > 0.0) {
        return Err(Error::Domain("needs x > 0"));
    }
    if k_max < 1 || k_max > n {
        return Err(Error::Domain("k_max must lie in 1..=n"));
    }
    let n13 = n_pow(n, 1.0 / 3.0);
    let grid = &melon.ens.grid;
    let t_start = 2.0 * x / n13;
    let t_end = 1.0 + 2.0 * y / n13;
    if !grid.covers(t_start) || !grid.covers(t_end) {
        return Err(Error::Domain("melon grid does not cover the requested endpoints"));
    }
    let c0 = grid.nearest_column(t_start);
    let c1 = grid.nearest_column(t_end);
    if c1 <= c0 {
        return Err(Error::Domain("degenerate endpoints"));
    }
    let path = last_passage_path(&melon.ens, Point::new(c0, n), Point::new(c1, 1), Side::Rightmost)?;
    let mut ks = Vec::with_capacity(k_max);
    let mut z = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        ks.push(k);
        if k == 1 {
            z.push(y);
        } else {
            // transition off line k is the (n - k)-th of the n - 1 jumps
            let col = path.jump_indices[n - k];
            z.push((grid.time(col) - 1.0) * n13 / 2.0);
        }
    }
    Ok(ZkProfile { ks, z })
}

/// Differences of melon passage values to two targets from parabola-placed
/// starts: for each `k`, the start sits at scaled position `-sqrt(k/(2x))` on
/// line `k`, and the reported value is the scaled difference of passage
/// values to `z` and to `y`.
pub fn busemann_differences(
    melon: &MelonEnsemble,
    x: f64,
    y: f64,
    z: f64,
    k_max: usize,
) -> Result<Vec<f64>> {
    let n = melon.n_lines();
    if !(x > 0.0) {
        return Err(Error::Domain("needs x > 0"));
    }
    if k_max < 1 || k_max > n {
        return Err(Error::Domain("k_max must lie in 1..=n"));
    }
    let n13 = n_pow(n, -1.0 / 3.0);
    let n16 = n_pow(n, 1.0 / 6.0);
    let grid = &melon.ens.grid;
    let cy = grid.nearest_column(1.0 + 2.0 * y * n13);
    let cz = grid.nearest_column(1.0 + 2.0 * z * n13);
    let mut out = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let start_pos = -libm::sqrt(k as f64 / (2.0 * x));
        let ts = 1.0 + 2.0 * start_pos * n13;
        if ts < grid.t_start - 0.5 * grid.dt() {
            return Err(Error::Domain("melon grid does not reach the parabola start"));
        }
        let cs = grid.nearest_column(ts);
        if cs >= cy.min(cz) {
            return Err(Error::Domain("parabola start overruns a target"));
        }
        let ly = last_passage(&melon.ens, Point::new(cs, k), Point::new(cy, 1))?;
        let lz = last_passage(&melon.ens, Point::new(cs, k), Point::new(cz, 1))?;
        out.push(n16 * (lz - ly) - 2.0 * (z - y) * n_pow(n, 1.0 / 3.0));
    }
    Ok(out)
}

/// Number of increment anchors per lag in `holder_estimate`. Fixed so the
/// max-increment statistic scales cleanly in the lag (a lag-dependent anchor
/// count would contaminate the log-log slope with a log-count term).
pub const HOLDER_ANCHORS: usize = 16;

/// Log-log least-squares fit of max path increment versus lag: returns
/// `(slope, intercept)`. Requires at least 8 distinct lags spanning a decade.
pub fn holder_estimate(path: &GeodesicPolyline, lags: &[f64]) -> Result<(f64, f64)> {
    let mut distinct: Vec<f64> = lags.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    if distinct.len() < 8 {
        return Err(Error::Domain("need at least 8 distinct lags"));
    }
    let (lo, hi) = (distinct[0], distinct[distinct.len() - 1]);
    if !(lo > 0.0) || hi < 10.0 * lo * (1.0 - 1e-9) {
        return Err(Error::Domain("lags must be positive and span a decade"));
    }
    let t0 = path.times[0];
    let t1 = path.times[path.times.len() - 1];
    if hi >= t1 - t0 {
        return Err(Error::Domain("largest lag exceeds the path span"));
    }
    let mut xs = Vec::with_capacity(distinct.len());
    let mut ys = Vec::with_capacity(distinct.len());
    for &lag in &distinct {
        let mut m = 0.0f64;
        for a in 0..HOLDER_ANCHORS {
            let frac = a as f64 / (HOLDER_ANCHORS - 1) as f64;
            let start = t0 + (t1 - t0 - lag) * frac;
            let inc = libm::fabs(path.location(start + lag) - path.location(start));
            if inc > m {
                m = inc;
            }
        }
        if m <= 0.0 {
            return Err(Error::Domain("path is flat at some lag; no log-log fit"));
        }
        xs.push(libm::log(lag));
        ys.push(libm::log(m));
    }
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (xv, yv) in xs.iter().zip(&ys) {
        sxx += (xv - mx) * (xv - mx);
        sxy += (xv - mx) * (yv - my);
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Passage values across the top rescaled lines: for each `k` in `k_list`,
/// the best nonincreasing path from `(0, line k)` to `(x, line 1)` through
/// the `ScaledLines` matrix, reported with the `2 sqrt(2 k x)` law-of-large-
/// numbers term removed.
pub fn airy_lp_experiment(scaled: &ScaledLines, k_list: &[usize], x: f64) -> Result<Vec<f64>> {
    if !(x > 0.0) {
        return Err(Error::Domain("needs x > 0"));
    }
    let c0 = nearest_index(&scaled.y_grid, 0.0);
    let c1 = nearest_index(&scaled.y_grid, x);
    if c1 <= c0 {
        return Err(Error::Domain("y grid must separate 0 and x"));
    }
    let mut out = Vec::with_capacity(k_list.len());
    for &k in k_list {
        if k < 1 || k > scaled.k_top() {
            return Err(Error::Domain("k outside the rescaled line range"));
        }
        let mut v = vec![0.0f64; k];
        for c in c0 + 1..=c1 {
            for (i, val) in v.iter_mut().enumerate() {
                let line = i + 1;
                *val += scaled.value(line, c) - scaled.value(line, c - 1);
            }
            for i in (0..k - 1).rev() {
                if v[i + 1] > v[i] {
                    v[i] = v[i + 1];
                }
            }
        }
        out.push(v[0] - 2.0 * libm::sqrt(2.0 * k as f64 * x));
    }
    Ok(out)
}

fn nearest_index(grid: &[f64], t: f64) -> usize {
    let mut best = 0;
    let mut dist = f64::INFINITY;
    for (i, &g) in grid.iter().enumerate() {
        let d = libm::fabs(g - t);
        if d < dist {
            dist = d;
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_degenerate_middle() {
        let a = ScaledSheet { n: 0, xs: vec![0.0, 1.0], ys: vec![0.5], values: vec![2.0, 3.0] };
        let b = ScaledSheet { n: 0, xs: vec![0.5], ys: vec![0.0, 1.0], values: vec![-1.0, 4.0] };
        let q = metric_compose(&a, &b).unwrap();
        assert_eq!(q.value(0, 0), 1.0);
        assert_eq!(q.value(1, 1), 7.0);
        assert_eq!(q.argmax_left, vec![0.5; 4]);
    }

    #[test]
    fn compose_tie_breaking_sides() {
        // both middle points give the same sum: left picks the first,
        // right picks the last
        let a = ScaledSheet { n: 0, xs: vec![0.0], ys: vec![-1.0, 1.0], values: vec![1.0, 1.0] };
        let b = ScaledSheet { n: 0, xs: vec![-1.0, 1.0], ys: vec![0.0], values: vec![2.0, 2.0] };
        let q = metric_compose(&a, &b).unwrap();
        assert_eq!(q.value(0, 0), 3.0);
        assert_eq!(q.argmax_left[0], -1.0);
        assert_eq!(q.argmax_right[0], 1.0);
    }

    #[test]
    fn straight_path_has_slope_one() {
        let times: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        let locations: Vec<f64> = times.iter().map(|&t| 3.0 * t - 1.0).collect();
        let path = GeodesicPolyline { times, locations };
        let lags: Vec<f64> = (0..9).map(|i| 0.02 * libm::pow(10.0f64, i as f64 / 8.0)).collect();
        let (slope, _) = holder_estimate(&path, &lags).unwrap();
        assert!((slope - 1.0).abs() < 1e-6);
    }

    #[test]
    fn holder_estimate_rejects_thin_ladders() {
        let path = GeodesicPolyline { times: vec![0.0, 1.0], locations: vec![0.0, 1.0] };
        assert!(holder_estimate(&path, &[0.1, 0.2]).is_err());
        let narrow: Vec<f64> = (0..10).map(|i| 0.1 + 0.01 * i as f64).collect();
        assert!(holder_estimate(&path, &narrow).is_err());
    }

    #[test]
    fn polyline_interpolation() {
        let p = GeodesicPolyline { times: vec![0.0, 1.0, 2.0], locations: vec![0.0, 2.0, 0.0] };
        assert_eq!(p.location(0.5), 1.0);
        assert_eq!(p.location(1.5), 1.0);
        assert_eq!(p.location(-3.0), 0.0);
        assert_eq!(p.location(9.0), 0.0);
    }
}
