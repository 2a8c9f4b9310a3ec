//! Brute-force reference implementations used to cross-check the dynamic
//! programs. Everything here enumerates path families directly from the
//! ensemble values and never calls into the solvers under test.
#![allow(dead_code)] // each test binary uses its own subset

use lpp_core::{sample_brownian_ensemble, GridSpec, LineEnsemble, Point, RngStream};

/// Column of `m` holding the time of original column `c` of `env`. Melon
/// grids refine the source grid but keep every original knot bitwise.
pub fn melon_col(m: &lpp_core::MelonEnsemble, env: &LineEnsemble, c: usize) -> usize {
    m.ens
        .grid
        .column_at(env.grid.time(c), 1e-12)
        .expect("original column kept in melon grid")
}

/// Random one-sided Brownian ensemble on `[0, 1]`.
pub fn random_env(seed: u64, stream: u64, n: usize, steps: usize) -> LineEnsemble {
    let grid = GridSpec::new(0.0, 1.0, steps).unwrap();
    sample_brownian_ensemble(n, grid, RngStream::new(seed, stream), None).unwrap()
}

pub fn env_from_rows(rows: Vec<Vec<f64>>) -> LineEnsemble {
    let steps = rows[0].len() - 1;
    let grid = GridSpec::new(0.0, steps as f64, steps).unwrap();
    let n = rows.len();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    LineEnsemble::new(0, n, grid, flat, 0).unwrap()
}

/// Value of one path determined by its nondecreasing jump columns: the path
/// starts at `(c0, l0)`, drops one line at each jump column, and ends at
/// `(c1, l0 - jumps.len())`.
pub fn path_value(env: &LineEnsemble, c0: usize, l0: usize, c1: usize, jumps: &[usize]) -> f64 {
    let mut total = 0.0;
    let mut col = c0;
    let mut line = l0;
    for &j in jumps {
        total += env.value(line, j) - env.value(line, col);
        col = j;
        line -= 1;
    }
    total + env.value(line, c1) - env.value(line, col)
}

fn for_each_jump_tuple(c0: usize, c1: usize, d: usize, f: &mut impl FnMut(&[usize])) {
    let mut jumps = vec![c0; d];
    if d == 0 {
        f(&jumps);
        return;
    }
    loop {
        f(&jumps);
        // odometer increment over nondecreasing tuples in [c0, c1]
        let mut i = d;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if jumps[i] < c1 {
                jumps[i] += 1;
                for k in i + 1..d {
                    jumps[k] = jumps[i];
                }
                break;
            }
        }
    }
}

/// Exhaustive maximum over downward paths `(c0, l0) -> (c1, l1)`.
pub fn enum_last_passage(env: &LineEnsemble, start: Point, end: Point) -> f64 {
    assert!(start.line >= end.line && start.grid_index <= end.grid_index);
    let d = start.line - end.line;
    let mut best = f64::NEG_INFINITY;
    for_each_jump_tuple(start.grid_index, end.grid_index, d, &mut |jumps| {
        let v = path_value(env, start.grid_index, start.line, end.grid_index, jumps);
        if v > best {
            best = v;
        }
    });
    best
}

/// Value of an upward path from `(c0, l0)` to `(c1, l0 + jumps.len())`
/// where each jump column moves the path one line down the index order.
pub fn upward_path_value(env: &LineEnsemble, c0: usize, l0: usize, c1: usize, jumps: &[usize]) -> f64 {
    let mut total = 0.0;
    let mut col = c0;
    let mut line = l0;
    for &j in jumps {
        total += env.value(line, j) - env.value(line, col);
        col = j;
        line += 1;
    }
    total + env.value(line, c1) - env.value(line, col)
}

/// Exhaustive minimum over upward paths `(c0, l0) -> (c1, l1)`, `l0 <= l1`.
pub fn enum_first_passage_min(env: &LineEnsemble, start: Point, end: Point) -> f64 {
    assert!(start.line <= end.line && start.grid_index <= end.grid_index);
    let d = end.line - start.line;
    let mut best = f64::INFINITY;
    for_each_jump_tuple(start.grid_index, end.grid_index, d, &mut |jumps| {
        let v = upward_path_value(env, start.grid_index, start.line, end.grid_index, jumps);
        if v < best {
            best = v;
        }
    });
    best
}

/// Post-jump line of a jump-tuple path at column `c` (cadlag in the column).
fn line_after(l0: usize, jumps: &[usize], c: usize) -> usize {
    l0 - jumps.iter().filter(|&&j| j <= c).count()
}

/// Exhaustive maximum over essentially disjoint path pairs: the first path
/// must sit strictly above the second on every column interior to both
/// spans. Iterates pair-by-pair, which is a different search order from any
/// recursive solver.
pub fn enum_two_path(
    env: &LineEnsemble,
    starts: (Point, Point),
    ends: (Point, Point),
) -> Option<f64> {
    let (s1, s2) = starts;
    let (e1, e2) = ends;
    let mut tuples1 = Vec::new();
    for_each_jump_tuple(s1.grid_index, e1.grid_index, s1.line - e1.line, &mut |j| {
        tuples1.push(j.to_vec());
    });
    let mut tuples2 = Vec::new();
    for_each_jump_tuple(s2.grid_index, e2.grid_index, s2.line - e2.line, &mut |j| {
        tuples2.push(j.to_vec());
    });
    let lo = s1.grid_index.max(s2.grid_index);
    let hi = e1.grid_index.min(e2.grid_index);
    let mut best: Option<f64> = None;
    for j1 in &tuples1 {
        for j2 in &tuples2 {
            let mut ok = true;
            let mut c = lo;
            while c < hi {
                if line_after(s1.line, j1, c) >= line_after(s2.line, j2, c) {
                    ok = false;
                    break;
                }
                c += 1;
            }
            if !ok {
                continue;
            }
            let v = path_value(env, s1.grid_index, s1.line, e1.grid_index, j1)
                + path_value(env, s2.grid_index, s2.line, e2.grid_index, j2);
            if best.map_or(true, |b| v > b) {
                best = Some(v);
            }
        }
    }
    best
}
