//! Exact sampler for the law of the top point of a Brownian n-melon.
//!
//! The top line value at time 1 over n lines has the law of the largest
//! eigenvalue of an n x n GUE matrix (off-diagonal variance 1, edge at
//! 2*sqrt(n)). We sample it through the tridiagonal reduction — diagonal
//! N(0,1), off-diagonals chi_{2k}/sqrt(2) for k = n-1..1 — whose spectrum
//! has the same law, and read the top eigenvalue with a Sturm-count
//! bisection. Cost is O(n) per bisection step, so large n stays cheap and
//! there is no discretization anywhere.

use lpp_core::RngStream;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

/// Largest eigenvalue of the sampled tridiagonal matrix.
pub fn sample_top_eigenvalue(n: usize, stream: RngStream) -> f64 {
    assert!(n >= 1);
    let mut rng = stream.rng();
    let mut diag = Vec::with_capacity(n);
    let mut off = Vec::with_capacity(n.saturating_sub(1));
    for _ in 0..n {
        diag.push(rng.sample::<f64, _>(StandardNormal));
    }
    for k in (1..n).rev() {
        // chi_{2k}/sqrt(2) == sqrt(Gamma(k, 1))
        let g = Gamma::new(k as f64, 1.0).unwrap().sample(&mut rng);
        off.push(g.sqrt());
    }
    top_eigenvalue_tridiag(&diag, &off)
}

/// The rescaled edge statistic n^{1/6}(lambda_max - 2 sqrt(n)).
pub fn sample_edge_statistic(n: usize, stream: RngStream) -> f64 {
    let lam = sample_top_eigenvalue(n, stream);
    (n as f64).powf(1.0 / 6.0) * (lam - 2.0 * (n as f64).sqrt())
}

/// Number of eigenvalues strictly below `x`, by the Sturm sequence of T - xI.
fn count_below(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0f64;
    for i in 0..diag.len() {
        let off2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        d = diag[i] - x - off2 / d;
        if d == 0.0 {
            d = 1e-300;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Top eigenvalue of a symmetric tridiagonal matrix by bisection on the
/// Sturm count, bracketed by the Gershgorin bound.
pub fn top_eigenvalue_tridiag(diag: &[f64], off: &[f64]) -> f64 {
    let n = diag.len();
    assert_eq!(off.len(), n.saturating_sub(1));
    let mut hi = f64::NEG_INFINITY;
    let mut lo = f64::INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i < n - 1 { off[i].abs() } else { 0.0 };
        hi = hi.max(diag[i] + r);
        lo = lo.min(diag[i] - r);
    }
    // invariant: count_below(lo) < n (some eigenvalue >= lo), count_below(hi) = n
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo < 1e-12 * hi.abs().max(1.0) {
            break;
        }
        if count_below(diag, off, mid) == n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::RunningMoments;

    #[test]
    fn bisection_matches_closed_forms() {
        // 1x1
        assert!((top_eigenvalue_tridiag(&[3.5], &[]) - 3.5).abs() < 1e-9);
        // 2x2 [[a, b], [b, c]]: top = (a+c)/2 + sqrt(((a-c)/2)^2 + b^2)
        let (a, b, c) = (1.0f64, 2.0f64, -0.5f64);
        let expect = 0.5 * (a + c) + (0.25 * (a - c) * (a - c) + b * b).sqrt();
        assert!((top_eigenvalue_tridiag(&[a, c], &[b]) - expect).abs() < 1e-9);
        // free Laplacian-like: eigenvalues a + 2b cos(k pi / (n+1))
        let n = 7;
        let expect = 1.0 + 2.0 * 0.75 * (std::f64::consts::PI / (n as f64 + 1.0)).cos();
        let top = top_eigenvalue_tridiag(&vec![1.0; n], &vec![0.75; n - 1]);
        assert!((top - expect).abs() < 1e-9);
    }

    #[test]
    fn one_by_one_is_standard_normal() {
        let mut m = RunningMoments::new();
        for i in 0..20_000u64 {
            m.push(sample_top_eigenvalue(1, RngStream::new(42, i)));
        }
        assert!(m.mean.abs() < 0.03, "mean {}", m.mean);
        assert!((m.variance() - 1.0).abs() < 0.04, "var {}", m.variance());
    }

    #[test]
    fn two_by_two_top_value_mean_matches_exact_law() {
        // E[lambda_max] = 2/sqrt(pi) for the 2x2 ensemble in this normalization
        let mut m = RunningMoments::new();
        for i in 0..20_000u64 {
            m.push(sample_top_eigenvalue(2, RngStream::new(43, i)));
        }
        let expect = 2.0 / std::f64::consts::PI.sqrt();
        assert!((m.mean - expect).abs() < 3.0 * m.std_error() + 0.01, "mean {}", m.mean);
    }

    #[test]
    fn edge_statistic_approaches_its_limit_mean() {
        // limiting mean is about -1.77; finite-n means sit within ~0.05 by n=100
        let mut m = RunningMoments::new();
        for i in 0..2000u64 {
            m.push(sample_edge_statistic(100, RngStream::new(44, i)));
        }
        assert!((m.mean + 1.77).abs() < 0.1, "mean {}", m.mean);
        assert!((m.variance() - 0.81).abs() < 0.12, "var {}", m.variance());
    }
}
