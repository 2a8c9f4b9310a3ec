//! Streaming statistics for Monte Carlo aggregation.
//!
//! Accumulators are mergeable and commutative so that per-sample results can
//! be reduced in any grouping; the harness relies on this to keep reports
//! independent of scheduling.

use serde::Serialize;

/// Count / mean / central second moment, merged with Chan's update.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct RunningMoments {
    pub count: u64,
    pub mean: f64,
    m2: f64,
}

impl RunningMoments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &RunningMoments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let d = other.mean - self.mean;
        let n = na + nb;
        self.mean += d * nb / n;
        self.m2 += other.m2 + d * d * na * nb / n;
        self.count += other.count;
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

/// Interpolated quantile of an already-sorted slice, q in [0, 1].
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = pos - lo as f64;
        sorted[lo] * (1.0 - frac) + sorted[hi] * frac
    }
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    quantile_sorted(values, 0.5)
}

/// Two-sample Kolmogorov-Smirnov statistic and its asymptotic p-value
/// (Stephens' small-sample correction on the effective size).
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> (f64, f64) {
    assert!(!a.is_empty() && !b.is_empty(), "KS needs nonempty samples");
    a.sort_unstable_by(f64::total_cmp);
    b.sort_unstable_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let t = a[i].min(b[j]);
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = (na * nb / (na + nb)).sqrt();
    let lambda = (ne + 0.12 + 0.11 / ne) * d;
    (d, ks_tail(lambda))
}

/// P(K > lambda) for the Kolmogorov distribution.
fn ks_tail(lambda: f64) -> f64 {
    if lambda < 1e-8 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = sign * (-2.0 * (k as f64 * lambda).powi(2)).exp();
        sum += term;
        if term.abs() < 1e-12 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// The one-stop summary used by experiment reports.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
    /// (q, value) at q in {0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99}.
    pub quantiles: Vec<(f64, f64)>,
    /// Two-sample KS statistic and p-value against the reference, if given.
    pub ks: Option<(f64, f64)>,
}

pub fn summarize(values: &[f64], reference: Option<&[f64]>) -> Summary {
    assert!(!values.is_empty(), "summary of empty sample");
    let mut m = RunningMoments::new();
    for &v in values {
        m.push(v);
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let qs = [0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99];
    let quantiles = qs.iter().map(|&q| (q, quantile_sorted(&sorted, q))).collect();
    let ks = reference.map(|r| ks_two_sample(&mut sorted.clone(), &mut r.to_vec()));
    Summary { count: values.len(), mean: m.mean, variance: m.variance(), std_error: m.std_error(), quantiles, ks }
}
