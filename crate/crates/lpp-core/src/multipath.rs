use alloc::vec;
use alloc::vec::Vec;

use crate::ensemble::LineEnsemble;
use crate::error::{Error, Result};
use crate::lpp::{LatticePath, Point};

/// Ordered start/end tuples admitting disjoint nonincreasing paths: per slot
/// `i`, `U[i]` precedes `V[i]` strictly in time and strictly in line, and both
/// coordinate sequences are nondecreasing in `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndpointPair {
    pub starts: Vec<Point>,
    pub ends: Vec<Point>,
}

impl EndpointPair {
    pub fn new(starts: Vec<Point>, ends: Vec<Point>) -> Result<Self> {
        if starts.is_empty() || starts.len() != ends.len() {
            return Err(Error::Domain("endpoint tuples must be nonempty and equal length"));
        }
        for (u, v) in starts.iter().zip(&ends) {
            if u.grid_index >= v.grid_index {
                return Err(Error::Domain("each start must precede its end in time"));
            }
            if u.line <= v.line {
                return Err(Error::Domain("each start must sit strictly below its end line"));
            }
        }
        for w in [&starts, &ends] {
            for pair in w.windows(2) {
                if pair[1].grid_index < pair[0].grid_index || pair[1].line > pair[0].line {
                    return Err(Error::Domain("endpoint tuples must be coordinate-ordered"));
                }
            }
        }
        Ok(EndpointPair { starts, ends })
    }

    pub fn k(&self) -> usize {
        self.starts.len()
    }
}

/// A tuple of paths whose interiors are strictly ordered: wherever the
/// domains of consecutive paths overlap away from their endpoints,
/// path `i` runs strictly above path `i+1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiPath {
    pub paths: Vec<LatticePath>,
}

/// Enumeration limits for the brute-force engine.
const MAX_TUPLE: usize = 3;
const MAX_STEPS: usize = 16;

/// One candidate path, precomputed for fast ordering checks and evaluation.
struct Candidate {
    jumps: Vec<usize>,
    /// Line occupied on the open segment just after each column of the whole
    /// grid (the cadlag value), clamped to the path's own domain.
    line_after: Vec<u8>,
    value: f64,
}

fn enumerate_candidates(env: &LineEnsemble, start: Point, end: Point) -> Vec<Candidate> {
    let transitions = start.line - end.line;
    let cols = env.cols();
    let mut out = Vec::new();
    let mut jumps = vec![start.grid_index; transitions];
    loop {
        // evaluate this jump tuple
        let mut value = 0.0;
        let mut enter = start.grid_index;
        let mut line = start.line;
        for &j in &jumps {
            value += env.value(line, j) - env.value(line, enter);
            enter = j;
            line -= 1;
        }
        value += env.value(line, end.grid_index) - env.value(line, enter);

        let mut line_after = vec![0u8; cols];
        for c in 0..cols {
            let crossed = jumps.iter().take_while(|&&j| j <= c).count();
            line_after[c] = (start.line - crossed) as u8;
        }
        out.push(Candidate { jumps: jumps.clone(), line_after, value });

        // next nondecreasing tuple in [start, end]
        let mut i = transitions;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if jumps[i] < end.grid_index {
                jumps[i] += 1;
                let bump = jumps[i];
                for v in jumps.iter_mut().skip(i + 1) {
                    *v = bump;
                }
                break;
            }
        }
        if transitions == 0 {
            return out;
        }
    }
}

/// Strict interior ordering of consecutive paths: `upper` must run strictly
/// above `lower` on the open overlap of their domains.
fn interiors_ordered(
    upper: &Candidate,
    upper_span: (usize, usize),
    lower: &Candidate,
    lower_span: (usize, usize),
) -> bool {
    let a = upper_span.0.max(lower_span.0);
    let b = upper_span.1.min(lower_span.1);
    // compare cadlag values on every open segment and interior column of (a, b)
    for c in a..b {
        if upper.line_after[c] >= lower.line_after[c] {
            return false;
        }
    }
    true
}

/// Maximal total length over tuples of interior-disjoint nonincreasing paths
/// between the endpoint slots, by exhaustive enumeration.
///
/// Brute force with documented limits: at most 3 paths and at most 16 grid
/// steps. This engine is the oracle the fast constructions are tested
/// against, so it stays deliberately simple.
pub fn multi_path_last_passage(env: &LineEnsemble, ep: &EndpointPair) -> Result<f64> {
    Ok(multi_path_best(env, ep)?.0)
}

/// Like `multi_path_last_passage` but also returns one maximizing tuple.
pub fn multi_path_best(env: &LineEnsemble, ep: &EndpointPair) -> Result<(f64, MultiPath)> {
    if ep.k() > MAX_TUPLE {
        return Err(Error::Capacity("brute-force engine handles at most 3 paths"));
    }
    if env.grid.steps > MAX_STEPS {
        return Err(Error::Capacity("brute-force engine handles at most 16 grid steps"));
    }
    for p in ep.starts.iter().chain(&ep.ends) {
        if p.line < 1 || p.line > env.n_lines || p.grid_index >= env.cols() {
            return Err(Error::Domain("endpoint outside ensemble"));
        }
    }
    let candidates: Vec<Vec<Candidate>> = (0..ep.k())
        .map(|i| enumerate_candidates(env, ep.starts[i], ep.ends[i]))
        .collect();
    let spans: Vec<(usize, usize)> = (0..ep.k())
        .map(|i| (ep.starts[i].grid_index, ep.ends[i].grid_index))
        .collect();

    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut choice = vec![0usize; ep.k()];
    search(&candidates, &spans, 0, 0.0, &mut choice, &mut best);
    match best {
        None => Err(Error::Domain("no admissible path tuple for these endpoints")),
        Some((value, picks)) => {
            let paths = picks
                .iter()
                .enumerate()
                .map(|(i, &c)| LatticePath {
                    start: ep.starts[i],
                    end: ep.ends[i],
                    jump_indices: candidates[i][c].jumps.clone(),
                })
                .collect();
            Ok((value, MultiPath { paths }))
        }
    }
}

/// Transfer-matrix engine: same optimum as the brute force, but by dynamic
/// programming over the tuple of lines the paths occupy after each column.
///
/// States are per-path line choices within `[end.line, start.line]`; columns
/// advance left to right, each path may drop any number of lines per column,
/// lines are pinned before a path starts and after it ends, and consecutive
/// paths must be strictly ordered on the open overlap of their spans. Handles
/// any number of grid steps; the state budget bounds the tuple width instead
/// of a hard path-count cap.
pub fn multi_path_last_passage_transfer(env: &LineEnsemble, ep: &EndpointPair) -> Result<f64> {
    const STATE_BUDGET: usize = 4096;
    for p in ep.starts.iter().chain(&ep.ends) {
        if p.line < 1 || p.line > env.n_lines || p.grid_index >= env.cols() {
            return Err(Error::Domain("endpoint outside ensemble"));
        }
    }
    let k = ep.k();
    let ranges: Vec<(usize, usize)> = (0..k)
        .map(|i| (ep.ends[i].line, ep.starts[i].line))
        .collect();
    let n_states: usize = ranges
        .iter()
        .try_fold(1usize, |acc, &(lo, hi)| {
            acc.checked_mul(hi - lo + 1).filter(|&s| s <= STATE_BUDGET)
        })
        .ok_or(Error::Capacity("transfer engine state budget exceeded"))?;

    let decode = |mut s: usize| -> Vec<usize> {
        let mut lines = Vec::with_capacity(k);
        for &(lo, hi) in &ranges {
            let w = hi - lo + 1;
            lines.push(lo + s % w);
            s /= w;
        }
        lines
    };
    let encode = |lines: &[usize]| -> usize {
        let mut s = 0usize;
        for i in (0..k).rev() {
            let (lo, hi) = ranges[i];
            s = s * (hi - lo + 1) + (lines[i] - lo);
        }
        s
    };

    // admissible states after column c: pinned outside each span, strictly
    // ordered pairs on the open overlap [max starts, min ends)
    let admissible = |lines: &[usize], c: usize| -> bool {
        for i in 0..k {
            if c < ep.starts[i].grid_index && lines[i] != ep.starts[i].line {
                return false;
            }
            if c >= ep.ends[i].grid_index && lines[i] != ep.ends[i].line {
                return false;
            }
        }
        for i in 1..k {
            let a = ep.starts[i - 1].grid_index.max(ep.starts[i].grid_index);
            let b = ep.ends[i - 1].grid_index.min(ep.ends[i].grid_index);
            if c >= a && c < b && lines[i - 1] >= lines[i] {
                return false;
            }
        }
        true
    };

    let cols = env.cols();
    let mut dp = vec![f64::NEG_INFINITY; n_states];
    for s in 0..n_states {
        if admissible(&decode(s), 0) {
            dp[s] = 0.0;
        }
    }
    let mut next = vec![f64::NEG_INFINITY; n_states];
    let lines_buf: Vec<Vec<usize>> = (0..n_states).map(|s| decode(s)).collect();
    for c in 1..cols {
        for v in next.iter_mut() {
            *v = f64::NEG_INFINITY;
        }
        for s in 0..n_states {
            let from = dp[s];
            if from == f64::NEG_INFINITY {
                continue;
            }
            let prev = &lines_buf[s];
            // riding increment on cell (c-1, c] for every active path
            let mut gain = 0.0;
            for i in 0..k {
                if c > ep.starts[i].grid_index && c <= ep.ends[i].grid_index {
                    gain += env.value(prev[i], c) - env.value(prev[i], c - 1);
                }
            }
            // enumerate componentwise drops prev -> cur
            let mut cur = prev.clone();
            loop {
                if admissible(&cur, c) {
                    let t = encode(&cur);
                    let cand = from + gain;
                    if cand > next[t] {
                        next[t] = cand;
                    }
                }
                // odometer over cur[i] in [ranges[i].0 ..= prev[i]]
                let mut i = 0;
                loop {
                    if i == k {
                        break;
                    }
                    if cur[i] > ranges[i].0 {
                        cur[i] -= 1;
                        break;
                    }
                    cur[i] = prev[i];
                    i += 1;
                }
                if i == k {
                    break;
                }
            }
        }
        core::mem::swap(&mut dp, &mut next);
    }
    let final_state = encode(&ep.ends.iter().map(|p| p.line).collect::<Vec<_>>());
    let out = dp[final_state];
    if out == f64::NEG_INFINITY {
        return Err(Error::Domain("no admissible path tuple for these endpoints"));
    }
    Ok(out)
}

fn search(
    candidates: &[Vec<Candidate>],
    spans: &[(usize, usize)],
    depth: usize,
    acc: f64,
    choice: &mut Vec<usize>,
    best: &mut Option<(f64, Vec<usize>)>,
) {
    if depth == candidates.len() {
        if best.as_ref().map_or(true, |(v, _)| acc > *v) {
            *best = Some((acc, choice.clone()));
        }
        return;
    }
    for (ci, cand) in candidates[depth].iter().enumerate() {
        if depth > 0 {
            let prev = &candidates[depth - 1][choice[depth - 1]];
            if !interiors_ordered(prev, spans[depth - 1], cand, spans[depth]) {
                continue;
            }
        }
        choice[depth] = ci;
        search(candidates, spans, depth + 1, acc + cand.value, choice, best);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::lpp::last_passage;

    fn env3(values: Vec<f64>, steps: usize) -> LineEnsemble {
        let grid = GridSpec::new(0.0, 1.0, steps).unwrap();
        let n = values.len() / (steps + 1);
        LineEnsemble::new(0, n, grid, values, 0).unwrap()
    }

    #[test]
    fn single_path_reduces_to_last_passage() {
        let env = env3(
            vec![
                0.0, 0.4, 0.1, 0.9, //
                0.0, -0.2, 0.5, 0.3, //
                0.0, 0.7, 0.2, 0.8,
            ],
            3,
        );
        let ep = EndpointPair::new(vec![Point::new(0, 3)], vec![Point::new(3, 1)]).unwrap();
        let multi = multi_path_last_passage(&env, &ep).unwrap();
        let single = last_passage(&env, Point::new(0, 3), Point::new(3, 1)).unwrap();
        assert_eq!(multi, single);
    }

    #[test]
    fn full_width_tuple_is_forced() {
        // k = n from a shared origin to a shared end pins interior path i to
        // line i, so the value is the sum of whole-line increments.
        let env = env3(
            vec![
                0.0, 1.0, 0.5, 2.0, //
                0.0, -1.0, 1.5, 0.5, //
                0.0, 0.3, -0.7, 1.0,
            ],
            3,
        );
        let ep = EndpointPair::new(
            vec![Point::new(0, 3), Point::new(0, 3), Point::new(0, 3)],
            vec![Point::new(3, 1), Point::new(3, 1), Point::new(3, 1)],
        )
        .unwrap();
        let v = multi_path_last_passage(&env, &ep).unwrap();
        let forced: f64 = (1..=3).map(|l| env.value(l, 3) - env.value(l, 0)).sum();
        assert!((v - forced).abs() < 1e-12);
    }

    #[test]
    fn interior_touching_is_rejected_but_endpoint_sharing_is_not() {
        // two paths on two lines from a shared start to a shared end: the
        // upper one must leave at the start column and the lower one must
        // hold until the end column.
        let env = env3(vec![0.0, 1.0, 2.0, 0.0, 0.5, 1.0], 2);
        let ep = EndpointPair::new(
            vec![Point::new(0, 2), Point::new(0, 2)],
            vec![Point::new(2, 1), Point::new(2, 1)],
        )
        .unwrap();
        let (v, mp) = multi_path_best(&env, &ep).unwrap();
        assert_eq!(mp.paths[0].jump_indices, vec![0]);
        assert_eq!(mp.paths[1].jump_indices, vec![2]);
        assert!((v - 3.0).abs() < 1e-12);
    }

    #[test]
    fn capacity_limits_enforced() {
        let grid = GridSpec::new(0.0, 1.0, 20).unwrap();
        let env = LineEnsemble::new(0, 2, grid, vec![0.0; 42], 0).unwrap();
        let ep = EndpointPair::new(vec![Point::new(0, 2)], vec![Point::new(20, 1)]).unwrap();
        assert!(matches!(multi_path_last_passage(&env, &ep), Err(Error::Capacity(_))));
    }
}
