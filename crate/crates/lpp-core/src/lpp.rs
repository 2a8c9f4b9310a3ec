use alloc::vec;
use alloc::vec::Vec;

use crate::ensemble::LineEnsemble;
use crate::error::{Error, Result};

/// A space-line point: grid column index plus 1-based line number (1 = top).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Point {
    pub grid_index: usize,
    pub line: usize,
}

impl Point {
    pub fn new(grid_index: usize, line: usize) -> Self {
        Point { grid_index, line }
    }
}

/// A nonincreasing path from `start` down-count to `end`: it occupies
/// `start.line` first, crosses one line per entry of `jump_indices`, and
/// finishes on `end.line`.
///
/// `jump_indices[i]` is the column where the path moves from line
/// `start.line - i` to line `start.line - i - 1`; entries are nondecreasing
/// and lie in `[start.grid_index, end.grid_index]`. Several equal entries
/// encode a multi-line jump at one column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticePath {
    pub start: Point,
    pub end: Point,
    pub jump_indices: Vec<usize>,
}

/// Tie-breaking side for maximizing paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Jumps as late as possible; dominates every maximizer pointwise.
    Rightmost,
    /// Jumps as early as possible.
    Leftmost,
}

fn check_endpoints(env: &LineEnsemble, start: Point, end: Point) -> Result<()> {
    if start.line < 1 || start.line > env.n_lines || end.line < 1 || end.line > env.n_lines {
        return Err(Error::Domain("line out of range"));
    }
    if start.grid_index >= env.cols() || end.grid_index >= env.cols() {
        return Err(Error::Domain("grid index out of range"));
    }
    if start.grid_index > end.grid_index || start.line < end.line {
        return Err(Error::Domain("path endpoints must be time-ordered and line-ordered"));
    }
    Ok(())
}

/// Maximal sum of line increments over nonincreasing grid-jump paths from
/// `start` to `end`.
///
/// Column sweep: entering column `j`, every reachable line first gains its
/// increment over `[t_{j-1}, t_j]`; then upward jumps at column `j` are
/// resolved bottom-up so that multi-line jumps cascade. All lines start at
/// value 0 at the start column (jumps there are free).
pub fn last_passage(env: &LineEnsemble, start: Point, end: Point) -> Result<f64> {
    check_endpoints(env, start, end)?;
    let lo = end.line;
    let hi = start.line;
    let mut v = vec![0.0f64; hi - lo + 1];
    for j in start.grid_index + 1..=end.grid_index {
        for (i, val) in v.iter_mut().enumerate() {
            let line = lo + i;
            *val += env.value(line, j) - env.value(line, j - 1);
        }
        for i in (0..v.len() - 1).rev() {
            if v[i + 1] > v[i] {
                v[i] = v[i + 1];
            }
        }
    }
    Ok(v[0])
}

/// Best path values from `start` to `(j, line)` for every column `j` in
/// `start.grid_index ..= last_col`, read on a fixed target line.
///
/// One forward sweep of the `last_passage` recursion; entry `j` of the result
/// equals `last_passage(env, start, (j, line))`.
pub fn forward_profile(env: &LineEnsemble, start: Point, line: usize, last_col: usize) -> Result<Vec<f64>> {
    check_endpoints(env, start, Point::new(last_col.max(start.grid_index), line))?;
    if last_col < start.grid_index || last_col >= env.cols() {
        return Err(Error::Domain("profile range out of grid"));
    }
    let lo = line;
    let hi = start.line;
    let mut v = vec![0.0f64; hi - lo + 1];
    let mut out = Vec::with_capacity(last_col - start.grid_index + 1);
    out.push(v[0]);
    for j in start.grid_index + 1..=last_col {
        for (i, val) in v.iter_mut().enumerate() {
            let l = lo + i;
            *val += env.value(l, j) - env.value(l, j - 1);
        }
        for i in (0..v.len() - 1).rev() {
            if v[i + 1] > v[i] {
                v[i] = v[i + 1];
            }
        }
        out.push(v[0]);
    }
    Ok(out)
}

/// Best path values from `(j, line)` to `end` for every column `j` in
/// `first_col ..= end.grid_index`, read on a fixed source line.
///
/// Mirror of `forward_profile`, swept backwards from the end point.
pub fn backward_profile(env: &LineEnsemble, end: Point, line: usize, first_col: usize) -> Result<Vec<f64>> {
    check_endpoints(env, Point::new(first_col.min(end.grid_index), line), end)?;
    if first_col > end.grid_index {
        return Err(Error::Domain("profile range out of grid"));
    }
    let lo = end.line;
    let hi = line;
    // v[i] = best value from (j, lo + i) to end, for the current column j.
    let mut v = vec![0.0f64; hi - lo + 1];
    let mut out = vec![0.0f64; end.grid_index - first_col + 1];
    out[end.grid_index - first_col] = v[hi - lo];
    for j in (first_col..end.grid_index).rev() {
        for (i, val) in v.iter_mut().enumerate() {
            let l = lo + i;
            *val += env.value(l, j + 1) - env.value(l, j);
        }
        for i in 1..v.len() {
            if v[i - 1] > v[i] {
                v[i] = v[i - 1];
            }
        }
        out[j - first_col] = v[hi - lo];
    }
    Ok(out)
}

/// A maximizing path with deterministic tie-breaking.
///
/// Ties are compared as exact equalities of the accumulated floating-point
/// sums: the backtrack re-derives each candidate with the same expressions the
/// forward sweep used, so preferences are bit-reproducible.
pub fn last_passage_path(env: &LineEnsemble, start: Point, end: Point, side: Side) -> Result<LatticePath> {
    check_endpoints(env, start, end)?;
    let lo = end.line;
    let hi = start.line;
    let width = hi - lo + 1;
    let ncols = end.grid_index - start.grid_index + 1;
    // Post-jump value table, column-major over the path window.
    let mut table = vec![0.0f64; ncols * width];
    let mut v = vec![0.0f64; width];
    for j in start.grid_index + 1..=end.grid_index {
        for (i, val) in v.iter_mut().enumerate() {
            let line = lo + i;
            *val += env.value(line, j) - env.value(line, j - 1);
        }
        for i in (0..width - 1).rev() {
            if v[i + 1] > v[i] {
                v[i] = v[i + 1];
            }
        }
        table[(j - start.grid_index) * width..(j - start.grid_index + 1) * width].copy_from_slice(&v);
    }

    let at = |j: usize, line: usize| table[(j - start.grid_index) * width + (line - lo)];
    let mut jumps_rev = Vec::with_capacity(hi - lo);
    let (mut j, mut line) = (end.grid_index, end.line);
    while j > start.grid_index || line < hi {
        let vertical_ok = line < hi && at(j, line) == at(j, line + 1);
        let horizontal_ok = j > start.grid_index && {
            let inc = env.value(line, j) - env.value(line, j - 1);
            at(j, line) == at(j - 1, line) + inc
        };
        let take_vertical = match side {
            Side::Rightmost => vertical_ok,
            Side::Leftmost => vertical_ok && !horizontal_ok,
        };
        if take_vertical {
            jumps_rev.push(j);
            line += 1;
        } else {
            debug_assert!(horizontal_ok, "backtrack lost the optimum");
            j -= 1;
        }
    }
    jumps_rev.reverse();
    Ok(LatticePath { start, end, jump_indices: jumps_rev })
}

fn check_path(env: &LineEnsemble, path: &LatticePath) -> Result<()> {
    check_endpoints(env, path.start, path.end)?;
    if path.jump_indices.len() != path.start.line - path.end.line {
        return Err(Error::Domain("jump count must equal line span"));
    }
    let mut prev = path.start.grid_index;
    for &j in &path.jump_indices {
        if j < prev || j > path.end.grid_index {
            return Err(Error::Domain("jump columns must be nondecreasing and inside the time window"));
        }
        prev = j;
    }
    Ok(())
}

/// Sum of line increments along `path`: the visited segment of each line
/// contributes its endpoint difference.
pub fn path_length(env: &LineEnsemble, path: &LatticePath) -> Result<f64> {
    check_path(env, path)?;
    let mut total = 0.0;
    let mut enter = path.start.grid_index;
    let mut line = path.start.line;
    for &j in &path.jump_indices {
        total += env.value(line, j) - env.value(line, enter);
        enter = j;
        line -= 1;
    }
    total += env.value(line, path.end.grid_index) - env.value(line, enter);
    Ok(total)
}

/// The same quantity written through the gap processes: endpoint difference
/// minus the consecutive-line gaps at the jump times. Agrees with
/// `path_length` exactly, up to floating-point reassociation.
pub fn gap_length(env: &LineEnsemble, path: &LatticePath) -> Result<f64> {
    check_path(env, path)?;
    let mut total = env.value(path.end.line, path.end.grid_index)
        - env.value(path.start.line, path.start.grid_index);
    let mut upper = path.start.line - 1; // line entered by the i-th transition
    for &j in &path.jump_indices {
        // gap below the entered line, evaluated at the jump time
        total -= env.value(upper, j) - env.value(upper + 1, j);
        upper -= 1;
    }
    Ok(total)
}

/// Minimal sum of line increments over nondecreasing grid-jump paths from
/// `start` down to `end` (first-passage counterpart of `last_passage`;
/// requires `start.line <= end.line`).
pub fn backwards_first_passage(env: &LineEnsemble, start: Point, end: Point) -> Result<f64> {
    if start.line < 1 || end.line > env.n_lines || start.line > end.line {
        return Err(Error::Domain("first passage runs downwards in lines"));
    }
    if start.grid_index > end.grid_index || end.grid_index >= env.cols() {
        return Err(Error::Domain("first passage endpoints must be time-ordered"));
    }
    let lo = start.line;
    let hi = end.line;
    let mut v = vec![0.0f64; hi - lo + 1];
    for j in start.grid_index + 1..=end.grid_index {
        for (i, val) in v.iter_mut().enumerate() {
            let line = lo + i;
            *val += env.value(line, j) - env.value(line, j - 1);
        }
        for i in 1..v.len() {
            if v[i - 1] < v[i] {
                v[i] = v[i - 1];
            }
        }
    }
    Ok(v[hi - lo])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use alloc::vec;

    /// Two linear lines on [0,1]: slope a on top, slope b below.
    fn linear_pair(a: f64, b: f64, steps: usize) -> LineEnsemble {
        let grid = GridSpec::new(0.0, 1.0, steps).unwrap();
        let mut values = Vec::new();
        for slope in [a, b] {
            for j in 0..=steps {
                values.push(slope * grid.time(j));
            }
        }
        LineEnsemble::new(0, 2, grid, values, 0).unwrap()
    }

    #[test]
    fn constant_lines_give_zero() {
        let grid = GridSpec::new(0.0, 1.0, 5).unwrap();
        let env = LineEnsemble::new(0, 2, grid, vec![1.0; 12], 0).unwrap();
        let v = last_passage(&env, Point::new(0, 2), Point::new(5, 1)).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn linear_lines_pick_best_slope() {
        // value = max(a, b): the single jump sits at whichever end favors the
        // steeper line.
        for (a, b) in [(2.0, -1.0), (-1.0, 2.0), (0.5, 0.5)] {
            let env = linear_pair(a, b, 8);
            let v = last_passage(&env, Point::new(0, 2), Point::new(8, 1)).unwrap();
            assert!((v - a.max(b)).abs() < 1e-12);
        }
    }

    #[test]
    fn tie_break_contract_on_constant_lines() {
        let grid = GridSpec::new(0.0, 1.0, 6).unwrap();
        let env = LineEnsemble::new(0, 2, grid, vec![0.0; 14], 0).unwrap();
        let right = last_passage_path(&env, Point::new(0, 2), Point::new(6, 1), Side::Rightmost).unwrap();
        let left = last_passage_path(&env, Point::new(0, 2), Point::new(6, 1), Side::Leftmost).unwrap();
        assert_eq!(right.jump_indices, vec![6]);
        assert_eq!(left.jump_indices, vec![0]);
    }

    #[test]
    fn path_value_matches_optimum() {
        let env = linear_pair(1.5, -0.5, 10);
        let start = Point::new(0, 2);
        let end = Point::new(10, 1);
        let best = last_passage(&env, start, end).unwrap();
        for side in [Side::Rightmost, Side::Leftmost] {
            let p = last_passage_path(&env, start, end, side).unwrap();
            assert_eq!(path_length(&env, &p).unwrap(), best);
        }
    }

    #[test]
    fn single_line_length_is_increment() {
        let env = linear_pair(2.0, 0.0, 4);
        let p = LatticePath {
            start: Point::new(1, 1),
            end: Point::new(3, 1),
            jump_indices: vec![],
        };
        let v = path_length(&env, &p).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        assert_eq!(gap_length(&env, &p).unwrap(), v);
    }

    #[test]
    fn first_passage_on_single_line() {
        let env = linear_pair(2.0, 0.0, 4);
        let v = backwards_first_passage(&env, Point::new(0, 1), Point::new(4, 1)).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ordering_violations_rejected() {
        let env = linear_pair(1.0, 0.0, 4);
        assert!(last_passage(&env, Point::new(3, 2), Point::new(1, 1)).is_err());
        assert!(last_passage(&env, Point::new(0, 1), Point::new(4, 2)).is_err());
        assert!(backwards_first_passage(&env, Point::new(0, 2), Point::new(4, 1)).is_err());
    }

    #[test]
    fn profiles_match_pointwise_values() {
        let env = linear_pair(1.0, -2.0, 8);
        let start = Point::new(0, 2);
        let fwd = forward_profile(&env, start, 1, 8).unwrap();
        for j in 0..=8 {
            let direct = last_passage(&env, start, Point::new(j, 1)).unwrap();
            assert_eq!(fwd[j], direct);
        }
        let end = Point::new(8, 1);
        let bwd = backward_profile(&env, end, 2, 0).unwrap();
        for j in 0..=8 {
            let direct = last_passage(&env, Point::new(j, 2), end).unwrap();
            assert_eq!(bwd[j], direct);
        }
    }
}
