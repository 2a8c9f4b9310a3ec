use alloc::vec;
use alloc::vec::Vec;

use crate::ensemble::LineEnsemble;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::lpp::Point;
use crate::multipath::{multi_path_last_passage, EndpointPair};

/// How a melon was produced; carried for provenance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MelonRoute {
    /// Sorting network of adjacent pairwise sorts with exact kink tracking.
    Network,
    /// Prefix sums of multi-path passage values (test oracle).
    LppDefinition,
    /// Sorting network evaluated on the fixed sample grid only.
    SampledNetwork,
}

/// The sorted image of a line ensemble: lines all start at 0 at the grid
/// origin and are pointwise ordered top to bottom (nonnegative gaps).
///
/// Sorting a pair of piecewise-linear lines kinks the outputs wherever the
/// running maximum of their difference sets a new record inside a cell, so a
/// melon generally lives on a *refined* grid: the original sample times plus
/// every such crossing time, shared by all lines. Keeping those knots is what
/// makes passage values across the melon agree exactly with passage values in
/// the source ensemble; snapping the output back to the original grid loses
/// that equality by O(cell width) amounts.
#[derive(Debug, Clone, PartialEq)]
pub struct MelonEnsemble {
    pub ens: LineEnsemble,
    pub route: MelonRoute,
    pub source_seed: u64,
}

impl MelonEnsemble {
    pub fn n_lines(&self) -> usize {
        self.ens.n_lines
    }
}

/// Sorts a pair of lines by the running maximum of their gap:
///
/// `g1 = f1 - f2(0) + G`, `g2 = f2 - f1(0) - G` with
/// `G(t) = max_{s in [0,t]} (f2 - f1)(s)`.
///
/// This slice form takes and returns values at shared grid points; the
/// outputs are exact *at those points* (the difference is linear between
/// points, so its prefix max over points is its prefix sup there), but the
/// sorted pair generally has extra kinks between points. The melon
/// constructions below track those kinks; this helper is for callers who
/// only need point values.
///
/// Output starts at (0, 0), preserves the pair sum up to rebasing, and is
/// ordered: `g1 >= g2` pointwise.
pub fn pairwise_sort(f1: &[f64], f2: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if f1.len() != f2.len() || f1.is_empty() {
        return Err(Error::Domain("pairwise sort needs equal nonempty grids"));
    }
    let mut g1 = Vec::with_capacity(f1.len());
    let mut g2 = Vec::with_capacity(f1.len());
    let mut running = f64::NEG_INFINITY;
    for i in 0..f1.len() {
        let diff = f2[i] - f1[i];
        if diff > running {
            running = diff;
        }
        g1.push(f1[i] - f2[0] + running);
        g2.push(f2[i] - f1[0] - running);
    }
    Ok((g1, g2))
}

/// A piecewise-linear line on its own knot set. Working representation inside
/// the sorting network; knots strictly increase and all lines of one network
/// share first and last knot.
#[derive(Clone)]
struct PlLine {
    ts: Vec<f64>,
    vs: Vec<f64>,
}

/// Merges two knot sets and evaluates both lines on the union (linear
/// interpolation at foreign knots is exact).
fn merge_pair(a: &PlLine, b: &PlLine) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let cap = a.ts.len() + b.ts.len();
    let mut ts = Vec::with_capacity(cap);
    let mut va = Vec::with_capacity(cap);
    let mut vb = Vec::with_capacity(cap);
    let (mut i, mut j) = (0usize, 0usize);
    while i < a.ts.len() || j < b.ts.len() {
        let ta = a.ts.get(i).copied().unwrap_or(f64::INFINITY);
        let tb = b.ts.get(j).copied().unwrap_or(f64::INFINITY);
        if ta == tb {
            ts.push(ta);
            va.push(a.vs[i]);
            vb.push(b.vs[j]);
            i += 1;
            j += 1;
        } else if ta < tb {
            // interpolate b on [ts[j-1], ts[j]]; shared outer knots keep j >= 1
            let frac = (ta - b.ts[j - 1]) / (b.ts[j] - b.ts[j - 1]);
            ts.push(ta);
            va.push(a.vs[i]);
            vb.push(b.vs[j - 1] + (b.vs[j] - b.vs[j - 1]) * frac);
            i += 1;
        } else {
            let frac = (tb - a.ts[i - 1]) / (a.ts[i] - a.ts[i - 1]);
            ts.push(tb);
            va.push(a.vs[i - 1] + (a.vs[i] - a.vs[i - 1]) * frac);
            vb.push(b.vs[j]);
            j += 1;
        }
    }
    (ts, va, vb)
}

/// Exact pairwise sort: tracks where the running maximum of `f2 - f1` sets a
/// new record strictly inside a cell and inserts that crossing time as a new
/// knot, so both outputs are exactly piecewise linear on the returned knots.
fn sorted_pair_exact(f1: &PlLine, f2: &PlLine) -> (PlLine, PlLine) {
    let (ts, v1, v2) = merge_pair(f1, f2);
    let f1_0 = v1[0];
    let f2_0 = v2[0];
    let m = ts.len();
    let mut out_t = Vec::with_capacity(m + 8);
    let mut g1 = Vec::with_capacity(m + 8);
    let mut g2 = Vec::with_capacity(m + 8);
    let mut running = f64::NEG_INFINITY;
    for idx in 0..m {
        let d = v2[idx] - v1[idx];
        if idx > 0 && d > running {
            let d_prev = v2[idx - 1] - v1[idx - 1];
            if d_prev < running {
                // the difference recrosses its old maximum inside this cell
                let (ta, tb) = (ts[idx - 1], ts[idx]);
                let frac = (running - d_prev) / (d - d_prev);
                let tau = ta + frac * (tb - ta);
                if tau > ta && tau < tb {
                    let w1 = v1[idx - 1] + (v1[idx] - v1[idx - 1]) * frac;
                    let w2 = v2[idx - 1] + (v2[idx] - v2[idx - 1]) * frac;
                    out_t.push(tau);
                    g1.push(w1 - f2_0 + running);
                    g2.push(w2 - f1_0 - running);
                }
            }
        }
        if d > running {
            running = d;
        }
        out_t.push(ts[idx]);
        g1.push(v1[idx] - f2_0 + running);
        g2.push(v2[idx] - f1_0 - running);
    }
    (PlLine { ts: out_t.clone(), vs: g1 }, PlLine { ts: out_t, vs: g2 })
}

fn check_one_sided(env: &LineEnsemble) -> Result<()> {
    if env.grid.t_start != 0.0 {
        return Err(Error::Domain("melons are defined for one-sided ensembles with origin 0"));
    }
    Ok(())
}

/// The canonical sorting word: (s_1)(s_2 s_1)(s_3 s_2 s_1)... — pass `p`
/// bubbles line `p+1` into place. Any reduced word yields the same melon;
/// this one is the fixed implementation choice.
fn canonical_word(n: usize) -> Vec<usize> {
    let mut word = Vec::with_capacity(n * (n.saturating_sub(1)) / 2);
    for p in 1..n {
        for i in (1..=p).rev() {
            word.push(i);
        }
    }
    word
}

/// The mirrored word (s_{n-1})(s_{n-2} s_{n-1})...
fn mirrored_word(n: usize) -> Vec<usize> {
    let mut word = Vec::with_capacity(n * (n.saturating_sub(1)) / 2);
    for p in (1..n).rev() {
        for i in p..n {
            word.push(i);
        }
    }
    word
}

/// Knot cap for the exact network. Crossing knots multiply quickly once gap
/// processes start touching (empirically the refinement factor reaches the
/// hundreds near n = 100), so large ensembles must use `melon_sampled`.
const KNOT_BUDGET: usize = 1 << 22;

/// Applies a sequence of adjacent pairwise sorts (`word[j] = i` sorts lines
/// `i` and `i+1`) to a one-sided ensemble, tracking kinks exactly, and
/// resamples every line onto the union of all final knots.
fn melon_with_word(env: &LineEnsemble, word: &[usize]) -> Result<MelonEnsemble> {
    check_one_sided(env)?;
    let n = env.n_lines;
    let cols = env.cols();
    let base_ts: Vec<f64> = (0..cols).map(|j| env.grid.time(j)).collect();
    let mut lines: Vec<PlLine> = (1..=n)
        .map(|l| PlLine { ts: base_ts.clone(), vs: env.row(l).to_vec() })
        .collect();
    let mut total_knots = n * cols;
    for &i in word {
        if i < 1 || i >= n {
            return Err(Error::Domain("sort index outside adjacent-pair range"));
        }
        let (top, bot) = sorted_pair_exact(&lines[i - 1], &lines[i]);
        total_knots += top.ts.len() + bot.ts.len();
        total_knots -= lines[i - 1].ts.len() + lines[i].ts.len();
        if total_knots > KNOT_BUDGET {
            return Err(Error::Capacity(
                "exact melon refinement outgrew its knot budget; use melon_sampled",
            ));
        }
        lines[i - 1] = top;
        lines[i] = bot;
    }
    // lines untouched by any sort (n = 1) still rebase to start at 0
    for pl in lines.iter_mut() {
        let base = pl.vs[0];
        if base != 0.0 {
            for v in pl.vs.iter_mut() {
                *v -= base;
            }
        }
    }

    // union of all knots; resample each line (exact: every line is linear
    // between its own knots, and its own knots are all present)
    let mut union: Vec<f64> = Vec::new();
    for pl in &lines {
        union.extend_from_slice(&pl.ts);
    }
    union.sort_unstable_by(f64::total_cmp);
    union.dedup();
    let out_cols = union.len();
    let mut values = vec![0.0f64; n * out_cols];
    for (line, pl) in lines.iter().enumerate() {
        let row = &mut values[line * out_cols..(line + 1) * out_cols];
        let mut k = 0usize;
        for (c, &t) in union.iter().enumerate() {
            while pl.ts[k] < t {
                k += 1;
            }
            row[c] = if pl.ts[k] == t {
                pl.vs[k]
            } else {
                let frac = (t - pl.ts[k - 1]) / (pl.ts[k] - pl.ts[k - 1]);
                pl.vs[k - 1] + (pl.vs[k] - pl.vs[k - 1]) * frac
            };
        }
    }
    let grid = if out_cols == cols && env.grid.is_uniform() {
        env.grid.clone()
    } else {
        GridSpec::new_explicit(union)?
    };
    let ens = LineEnsemble::new(env.top_index, n, grid, values, env.seed)?;
    Ok(MelonEnsemble { ens, route: MelonRoute::Network, source_seed: env.seed })
}

/// The melon of a one-sided ensemble, via the canonical sorting network with
/// exact kink tracking. Cost O(n^2 * knots) plus knot growth from crossings.
pub fn melon(env: &LineEnsemble) -> Result<MelonEnsemble> {
    melon_with_word(env, &canonical_word(env.n_lines))
}

/// The melon built with the mirrored sorting word instead of the canonical
/// one. Exists so tests can confirm the output is word-independent.
pub fn melon_mirrored(env: &LineEnsemble) -> Result<MelonEnsemble> {
    melon_with_word(env, &mirrored_word(env.n_lines))
}

/// The sorting network evaluated on the fixed sample grid, without kink
/// tracking: each pairwise sort takes the running maximum over grid points
/// only and the output stays on the input grid.
///
/// This is an approximation: record crossings between grid points are
/// dropped, which perturbs lines below the top and makes the output mildly
/// word-dependent. The mirrored word is used because it builds the top line
/// as a chain of accumulated maxima whose inner suprema are convex within
/// each cell, so the top line is exact at grid points; deeper lines carry an
/// error that shrinks with the cell width. Cost and memory stay at
/// O(n^2 * steps) / O(n * steps), which is what makes large-ensemble
/// sampling studies feasible; exact identities should use `melon`.
pub fn melon_sampled(env: &LineEnsemble) -> Result<MelonEnsemble> {
    check_one_sided(env)?;
    let n = env.n_lines;
    let cols = env.cols();
    let mut values = env.values.clone();
    for &i in &mirrored_word(n) {
        let (a0, b0) = ((i - 1) * cols, i * cols);
        let f1_0 = values[a0];
        let f2_0 = values[b0];
        let mut running = f64::NEG_INFINITY;
        for c in 0..cols {
            let f1 = values[a0 + c];
            let f2 = values[b0 + c];
            let diff = f2 - f1;
            if diff > running {
                running = diff;
            }
            values[a0 + c] = f1 - f2_0 + running;
            values[b0 + c] = f2 - f1_0 - running;
        }
    }
    for line in 0..n {
        let base = values[line * cols];
        if base != 0.0 {
            for v in values[line * cols..(line + 1) * cols].iter_mut() {
                *v -= base;
            }
        }
    }
    let ens = LineEnsemble::new(env.top_index, n, env.grid.clone(), values, env.seed)?;
    Ok(MelonEnsemble { ens, route: MelonRoute::SampledNetwork, source_seed: env.seed })
}

/// Oracle limits for the passage-value construction.
const ORACLE_MAX_LINES: usize = 4;
const ORACLE_MAX_STEPS: usize = 12;

/// Builds the melon directly from its defining passage values: the sum of the
/// top `k` output lines at time `t` equals the `k`-path passage value from
/// `k` copies of `(0, n)` to `k` copies of `(t, 1)`.
///
/// Exhaustive-enumeration oracle; capacity-limited to tiny instances and used
/// only to cross-check `melon`. Output values sit on the original grid, so
/// comparisons against the kink-tracked melon read matching columns there.
pub fn melon_via_lpp(env: &LineEnsemble) -> Result<MelonEnsemble> {
    check_one_sided(env)?;
    let n = env.n_lines;
    if n > ORACLE_MAX_LINES || env.grid.steps > ORACLE_MAX_STEPS {
        return Err(Error::Capacity("passage-value melon is limited to n <= 4, steps <= 12"));
    }
    let cols = env.cols();
    let mut prefix = vec![vec![0.0f64; cols]; n + 1]; // prefix[k][c], k = 0..=n
    for c in 1..cols {
        for k in 1..=n {
            prefix[k][c] = if k == n {
                // the full-width tuple is forced onto distinct lines
                (1..=n).map(|l| env.value(l, c) - env.value(l, 0)).sum()
            } else {
                let ep = EndpointPair::new(
                    vec![Point::new(0, n); k],
                    vec![Point::new(c, 1); k],
                )?;
                multi_path_last_passage(env, &ep)?
            };
        }
    }
    let mut values = vec![0.0f64; n * cols];
    for k in 1..=n {
        for c in 0..cols {
            values[(k - 1) * cols + c] = prefix[k][c] - prefix[k - 1][c];
        }
    }
    let ens = LineEnsemble::new(env.top_index, n, env.grid.clone(), values, env.seed)?;
    Ok(MelonEnsemble { ens, route: MelonRoute::LppDefinition, source_seed: env.seed })
}

/// The reverse melon opened up at column `z`: reverses time on `[0, t_z]`,
/// negates, and flips the line order, then melonizes. The output grid is
/// rebased so its origin is the opening time.
pub fn reverse_melon(env: &LineEnsemble, z: usize) -> Result<MelonEnsemble> {
    check_one_sided(env)?;
    if z == 0 || z > env.grid.steps {
        return Err(Error::Domain("opening column must satisfy 1 <= z <= steps"));
    }
    let n = env.n_lines;
    let cols = z + 1;
    let t_z = env.grid.time(z);
    let grid = if env.grid.is_uniform() && z == env.grid.steps {
        GridSpec::new(0.0, t_z, z)?
    } else {
        GridSpec::new_explicit((0..cols).map(|c| t_z - env.grid.time(z - c)).collect())?
    };
    let mut values = vec![0.0f64; n * cols];
    for line in 1..=n {
        let src = env.row(n + 1 - line);
        let row = &mut values[(line - 1) * cols..line * cols];
        for c in 0..cols {
            row[c] = -src[z - c];
        }
    }
    let reversed = LineEnsemble::new(env.top_index, n, grid, values, env.seed)?;
    melon(&reversed)
}

/// Consecutive line differences `g_i = row_i - row_{i+1}`, `i = 1..n-1`.
/// Nonnegative (up to roundoff) when the input is a melon.
pub fn gap_process(m: &MelonEnsemble) -> Result<Vec<Vec<f64>>> {
    let n = m.n_lines();
    if n < 2 {
        return Err(Error::Domain("gap process needs at least two lines"));
    }
    let mut gaps = Vec::with_capacity(n - 1);
    for i in 1..n {
        let upper = m.ens.row(i);
        let lower = m.ens.row(i + 1);
        gaps.push(upper.iter().zip(lower).map(|(a, b)| a - b).collect());
    }
    Ok(gaps)
}
