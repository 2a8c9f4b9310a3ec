//! The experiment drivers behind every CLI subcommand. Each driver resolves
//! its defaults from a [`LabConfig`], runs its samples through the
//! deterministic parallel runner, and returns a report plus plot-ready CSVs.
//!
//! Stream-id space: every sampling role inside an experiment draws from its
//! own `STREAM_BLOCK` so roles never share randomness.

use std::collections::BTreeMap;

use lpp_core::{
    airy_rescale, backward_profile, extract_geodesic, forward_profile, gap_length, gap_process,
    holder_estimate, last_passage, melon, melon_mirrored, melon_sampled, melon_via_lpp,
    multi_path_last_passage, multi_path_last_passage_transfer, pairwise_sort, path_length,
    sample_brownian_ensemble, sheet_from_environment, sheet_environment, sheet_rescale,
    busemann_differences, zk_profile, EndpointPair, GridSpec, LatticePath, LineEnsemble,
    MelonEnsemble, Point, RngStream, ScaledSheet, Side,
};
use rand::Rng;
use serde::Deserialize;

use crate::calib::grid_bias;
use crate::config::{ConfigError, LabConfig};
use crate::io::{ensemble_to_csv, samples_to_csv};
use crate::oracle::sample_edge_statistic;
use crate::report::{ConfigMap, ExperimentReport, StatRecord};
use crate::runner::{run_samples, run_samples_vec, STREAM_BLOCK};
use crate::stats::{ks_two_sample, median, RunningMoments};

pub struct RunOutput {
    pub report: ExperimentReport,
    pub data: Vec<(String, String)>,
}

type RunResult = Result<RunOutput, ConfigError>;

fn moments(values: &[f64]) -> RunningMoments {
    let mut m = RunningMoments::new();
    for &v in values {
        m.push(v);
    }
    m
}

/// Standard error of a sample median (asymptotic normal-theory factor).
fn median_se(values: &[f64]) -> f64 {
    let m = moments(values);
    1.2533 * (m.variance() / values.len() as f64).sqrt()
}

fn err(msg: impl std::fmt::Display) -> ConfigError {
    ConfigError(msg.to_string())
}

// ---------------------------------------------------------------------------
// sample: emit one environment (or its melon) as CSV
// ---------------------------------------------------------------------------

pub fn run_sample(cfg: &LabConfig) -> RunResult {
    let n = cfg.n.unwrap_or(3) as usize;
    let steps = cfg.steps.unwrap_or(8) as usize;
    let seed = cfg.seed.unwrap_or(0);
    let want_melon = cfg.melon.unwrap_or(false);
    if n == 0 || steps == 0 {
        return Err(err("sample needs n >= 1 and steps >= 1"));
    }

    let grid = GridSpec::new(0.0, 1.0, steps).map_err(err)?;
    let env = sample_brownian_ensemble(n, grid, RngStream::new(seed, 0), None).map_err(err)?;
    let mut data = vec![("environment.csv".to_string(), ensemble_to_csv(&env))];
    let mut records = vec![StatRecord::diagnostic("n_lines", n as f64, 0.0)];

    if want_melon {
        let m = melon(&env).map_err(err)?;
        let gaps = gap_process(&m).map_err(err)?;
        let min_gap = gaps
            .iter()
            .flat_map(|row| row.iter().copied())
            .fold(f64::INFINITY, f64::min);
        records.push(StatRecord::bounded_below("melon_min_gap", min_gap, 0.0, -1e-12));
        records.push(StatRecord::diagnostic("melon_columns", m.ens.cols() as f64, 0.0));
        data.push(("melon.csv".to_string(), ensemble_to_csv(&m.ens)));
        let mut gaps_csv = String::from("line,values...\n");
        for (i, row) in gaps.iter().enumerate() {
            gaps_csv.push_str(&format!("{}", i + 1));
            for v in row {
                gaps_csv.push_str(&format!(",{v:?}"));
            }
            gaps_csv.push('\n');
        }
        data.push(("gaps.csv".to_string(), gaps_csv));
    }

    let mut config = ConfigMap::new();
    config.insert("n".into(), (n as u64).into());
    config.insert("steps".into(), (steps as u64).into());
    config.insert("seed".into(), seed.into());
    config.insert("melon".into(), want_melon.into());
    Ok(RunOutput {
        report: ExperimentReport {
            experiment: "sample".into(),
            config,
            sample_count: 1,
            records,
        },
        data,
    })
}

// ---------------------------------------------------------------------------
// identities: exact-identity suite over random small environments
// ---------------------------------------------------------------------------

/// Limits within which the exhaustive reference engines are cheap.
const ID_MAX_LINES: usize = 4;
const ID_MAX_STEPS: usize = 10;

struct Violations(BTreeMap<&'static str, f64>);

impl Violations {
    fn new() -> Self {
        Violations(BTreeMap::new())
    }
    fn see(&mut self, name: &'static str, v: f64) {
        let e = self.0.entry(name).or_insert(0.0);
        if v > *e {
            *e = v;
        }
    }
}

fn melon_col(m: &MelonEnsemble, env: &LineEnsemble, c: usize) -> usize {
    m.ens
        .grid
        .column_at(env.grid.time(c), 1e-9)
        .expect("melon grids keep original knots")
}

/// One random instance of every exact identity; returns max violations.
fn identity_instance(seed_stream: RngStream, out: &mut Violations) {
    let mut rng = seed_stream.rng();
    let n = rng.gen_range(2..=ID_MAX_LINES);
    let steps = rng.gen_range(2..=ID_MAX_STEPS);
    let grid = GridSpec::new(0.0, 1.0, steps).unwrap();
    let env = sample_brownian_ensemble(n, grid, seed_stream.substream(1), None).unwrap();

    let m = melon(&env).unwrap();

    // definition: network output equals the passage-value construction
    let via = melon_via_lpp(&env).unwrap();
    for line in 1..=n {
        for c in 0..env.cols() {
            let d = (m.ens.value(line, melon_col(&m, &env, c)) - via.ens.value(line, c)).abs();
            out.see("definition_prefix_sums", d);
        }
    }

    // word independence: canonical vs mirrored networks as functions
    let mm = melon_mirrored(&env).unwrap();
    for line in 1..=n {
        for j in 0..m.ens.cols() {
            let t = m.ens.grid.time(j);
            out.see("word_independence", (m.ens.interpolate(line, t) - mm.ens.interpolate(line, t)).abs());
        }
        for j in 0..mm.ens.cols() {
            let t = mm.ens.grid.time(j);
            out.see("word_independence", (m.ens.interpolate(line, t) - mm.ens.interpolate(line, t)).abs());
        }
    }

    // column sums are preserved
    for j in 0..m.ens.cols() {
        let t = m.ens.grid.time(j);
        let a: f64 = (1..=n).map(|l| m.ens.interpolate(l, t)).sum();
        let b: f64 = (1..=n).map(|l| env.interpolate(l, t)).sum();
        out.see("column_sums", (a - b).abs());
    }

    // passage invariance, single path (random interior endpoints)
    let c0 = rng.gen_range(0..steps);
    let c1 = rng.gen_range(c0 + 1..=steps);
    let env_l = last_passage(&env, Point::new(c0, n), Point::new(c1, 1)).unwrap();
    let mel_l = last_passage(
        &m.ens,
        Point::new(melon_col(&m, &env, c0), n),
        Point::new(melon_col(&m, &env, c1), 1),
    )
    .unwrap();
    out.see("invariance_single", (env_l - mel_l).abs());

    // passage invariance, disjoint pairs
    if n >= 2 && steps >= 2 {
        let c = rng.gen_range(0..steps - 1);
        let d = rng.gen_range(c.max(1)..steps);
        let ep_env = EndpointPair::new(
            vec![Point::new(0, n), Point::new(c, n)],
            vec![Point::new(d, 1), Point::new(steps, 1)],
        )
        .unwrap();
        let ep_mel = EndpointPair::new(
            vec![Point::new(0, n), Point::new(melon_col(&m, &env, c), n)],
            vec![Point::new(melon_col(&m, &env, d), 1), Point::new(melon_col(&m, &env, steps), 1)],
        )
        .unwrap();
        let a = multi_path_last_passage(&env, &ep_env);
        let b = multi_path_last_passage_transfer(&m.ens, &ep_mel);
        match (a, b) {
            (Ok(a), Ok(b)) => out.see("invariance_pair", (a - b).abs()),
            (Err(_), Err(_)) => {}
            _ => out.see("invariance_pair", f64::INFINITY),
        }
    }

    // corner identity: passage into the melon's interior equals the melon
    // line minus a backwards first passage through the reversed melon
    let z = rng.gen_range(1..=steps);
    let rm = lpp_core::reverse_melon(&env, z).unwrap();
    let t_z = env.grid.time(z);
    let zm = melon_col(&m, &env, z);
    let z_rm = rm.ens.grid.column_at(t_z, 1e-9).expect("full span kept");
    for x in 0..z {
        let xm = melon_col(&m, &env, x);
        let x_rm = rm
            .ens
            .grid
            .column_at(t_z - env.grid.time(x), 1e-9)
            .expect("reversed column kept");
        for k in 1..=n {
            let direct = last_passage(&m.ens, Point::new(xm, n), Point::new(zm, k)).unwrap();
            let back =
                lpp_core::backwards_first_passage(&rm.ens, Point::new(x_rm, 1), Point::new(z_rm, k))
                    .unwrap();
            out.see("corner_identity", (direct - (m.ens.value(k, zm) - back)).abs());
        }
    }

    // gap formula on random paths
    for _ in 0..5 {
        let mut jumps: Vec<usize> = (0..n - 1).map(|_| rng.gen_range(0..=steps)).collect();
        jumps.sort_unstable();
        let path = LatticePath { start: Point::new(0, n), end: Point::new(steps, 1), jump_indices: jumps };
        let a = path_length(&env, &path).unwrap();
        let b = gap_length(&env, &path).unwrap();
        out.see("gap_formula", (a - b).abs());
    }

    // sorting is idempotent
    let (g1, g2) = pairwise_sort(env.row(1), env.row(2)).unwrap();
    let (h1, h2) = pairwise_sort(&g1, &g2).unwrap();
    for j in 0..g1.len() {
        out.see("sort_idempotence", (h1[j] - g1[j]).abs().max((h2[j] - g2[j]).abs()));
    }

    // min-path duality against the negated, line-reversed ensemble
    let flipped_rows: Vec<Vec<f64>> =
        (1..=n).rev().map(|l| env.row(l).iter().map(|v| -v).collect()).collect();
    let flipped = LineEnsemble::new(0, n, env.grid.clone(), flipped_rows.concat(), 0).unwrap();
    let fwd = lpp_core::backwards_first_passage(&env, Point::new(0, 1), Point::new(steps, n)).unwrap();
    let dual = last_passage(&flipped, Point::new(0, n), Point::new(steps, 1)).unwrap();
    out.see("first_passage_duality", (fwd + dual).abs());
}

/// Near-tie stress: lines separated by ~1e-12, exercising tie handling in the
/// sorting network and the passage DP (looser documented bound).
fn near_tie_instance(seed_stream: RngStream, out: &mut Violations) {
    let mut rng = seed_stream.rng();
    let steps = rng.gen_range(2..=8usize);
    let grid = GridSpec::new(0.0, 1.0, steps).unwrap();
    let base = sample_brownian_ensemble(1, grid.clone(), seed_stream.substream(1), None).unwrap();
    let tiny = sample_brownian_ensemble(2, grid.clone(), seed_stream.substream(2), None).unwrap();
    let n = 3usize;
    let mut rows = Vec::new();
    for line in 1..=n {
        let row: Vec<f64> = base
            .row(1)
            .iter()
            .zip(tiny.row(1.min(line.saturating_sub(1)).max(1)))
            .enumerate()
            .map(|(j, (b, t))| {
                if line == 1 {
                    *b
                } else {
                    b + 1e-12 * t + 1e-12 * (line as f64) * (j as f64)
                }
            })
            .collect();
        rows.push(row);
    }
    let env = LineEnsemble::new(0, n, grid, rows.concat(), 0).unwrap();

    let m = melon(&env).unwrap();
    let via = melon_via_lpp(&env).unwrap();
    for line in 1..=n {
        for c in 0..env.cols() {
            let d = (m.ens.value(line, melon_col(&m, &env, c)) - via.ens.value(line, c)).abs();
            out.see("near_tie_stress", d);
        }
    }
    let env_l = last_passage(&env, Point::new(0, n), Point::new(steps, 1)).unwrap();
    let mel_l = last_passage(&m.ens, Point::new(0, n), Point::new(m.ens.cols() - 1, 1)).unwrap();
    out.see("near_tie_stress", (env_l - mel_l).abs());
}

pub fn run_identity_suite(cfg: &LabConfig) -> RunResult {
    let samples = cfg.samples.unwrap_or(200);
    let seed = cfg.seed.unwrap_or(0);
    if samples == 0 {
        return Err(err("identities needs samples >= 1"));
    }

    // per-instance violation maps, merged in index order
    let per_instance: Vec<Violations> = (0..samples)
        .map(|i| {
            let mut v = Violations::new();
            identity_instance(RngStream::new(seed, i), &mut v);
            v
        })
        .collect();
    let stress_count = (samples / 4).max(20);
    let stress: Vec<Violations> = (0..stress_count)
        .map(|i| {
            let mut v = Violations::new();
            near_tie_instance(RngStream::new(seed, STREAM_BLOCK + i), &mut v);
            v
        })
        .collect();

    let mut all = Violations::new();
    for v in per_instance.iter().chain(stress.iter()) {
        for (k, &x) in &v.0 {
            all.see(k, x);
        }
    }

    let mut records = Vec::new();
    for (name, &violation) in &all.0 {
        let tol = if *name == "near_tie_stress" { 1e-8 } else { 1e-9 };
        records.push(StatRecord::gated(name, violation, 0.0, 0.0, tol));
    }

    let mut config = ConfigMap::new();
    config.insert("samples".into(), samples.into());
    config.insert("seed".into(), seed.into());
    Ok(RunOutput {
        report: ExperimentReport {
            experiment: "identities".into(),
            config,
            sample_count: samples + stress_count,
            records,
        },
        data: Vec::new(),
    })
}

// ---------------------------------------------------------------------------
// tw: one-point edge statistic against the reference fixture
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
struct TwFixture {
    version: u32,
    #[allow(dead_code)]
    generator: serde_json::Value,
    mean: f64,
    variance: f64,
    tail_thresholds: Vec<f64>,
    tail_above: Vec<f64>,
    tail_below: Vec<f64>,
}

fn load_fixture() -> TwFixture {
    let fx: TwFixture = serde_json::from_str(include_str!("../fixtures/tw_reference.json"))
        .expect("embedded fixture parses");
    assert_eq!(fx.version, 1, "unknown fixture version");
    fx
}

/// Tolerance for the fixture comparison: the acceptance bracket (0.10) also
/// covers the documented policy of 3 standard errors plus a 0.05 finite-size
/// allowance at the default sample count.
const TW_TOL: f64 = 0.10;

pub fn run_tw_experiment(cfg: &LabConfig) -> RunResult {
    let n = cfg.n.unwrap_or(500) as usize;
    let samples = cfg.samples.unwrap_or(5000);
    let seed = cfg.seed.unwrap_or(0);
    if n == 0 || samples == 0 {
        return Err(err("tw needs n >= 1 and samples >= 1"));
    }
    let fx = load_fixture();

    // The statistic n^{1/6}(top melon point at time 1 - 2 sqrt n) is sampled
    // from its exact law (largest GUE eigenvalue): no grid, no bias. The
    // grid-path estimate of the very same quantity is reported below as a
    // diagnostic so the discretization deficit stays visible.
    let values = run_samples(samples, seed, 0, |_, s| sample_edge_statistic(n, s));
    let m = moments(&values);

    let tail_freq = |pred: &dyn Fn(f64) -> bool| {
        values.iter().filter(|&&v| pred(v)).count() as f64 / values.len() as f64
    };

    // the fixture targets describe the n=2000 law; gate only when the run is
    // large enough that finite-size drift fits inside the bracket
    let gate_vs_fixture = n >= 100;
    let mut records = Vec::new();
    if gate_vs_fixture {
        records.push(StatRecord::gated("mean", m.mean, m.std_error(), fx.mean, TW_TOL));
        let var_se = m.variance() * (2.0 / (samples.max(2) - 1) as f64).sqrt();
        records.push(StatRecord::gated("variance", m.variance(), var_se, fx.variance, TW_TOL));
    } else {
        records.push(StatRecord::diagnostic("mean", m.mean, m.std_error()));
        records.push(StatRecord::diagnostic("variance", m.variance(), 0.0));
    }
    for (i, &thr) in fx.tail_thresholds.iter().enumerate() {
        let above = tail_freq(&|v| v > thr);
        let below = tail_freq(&|v| v < -thr);
        let se = (above * (1.0 - above) / samples as f64).sqrt();
        if (thr - 4.0).abs() < 1e-9 {
            // qualitative super-exponential upper-tail bound
            records.push(StatRecord::bounded_above("tail_above_4", above, se, 0.01));
        } else {
            records.push(StatRecord {
                name: format!("tail_above_{thr}"),
                estimate: above,
                std_error: se,
                target: Some(fx.tail_above[i]),
                tolerance: None,
                pass: None,
            });
        }
        records.push(StatRecord {
            name: format!("tail_below_{thr}"),
            estimate: below,
            std_error: (below * (1.0 - below) / samples as f64).sqrt(),
            target: Some(fx.tail_below[i]),
            tolerance: None,
            pass: None,
        });
    }

    // grid-path diagnostic at a fixed small scale: the same statistic read
    // from the discretized passage value sits well below the exact law
    let (bias, bias_se) = grid_bias(100, 4000, 120, seed, 2 * STREAM_BLOCK);
    records.push(StatRecord::diagnostic("grid_discretization_bias_n100_m4000", bias, bias_se));

    let mut config = ConfigMap::new();
    config.insert("n".into(), (n as u64).into());
    config.insert("samples".into(), samples.into());
    config.insert("seed".into(), seed.into());
    Ok(RunOutput {
        report: ExperimentReport {
            experiment: "tw".into(),
            config,
            sample_count: samples,
            records,
        },
        data: vec![("samples.csv".into(), samples_to_csv("edge_statistic", &values))],
    })
}

// ---------------------------------------------------------------------------
// sheet: stationarity of the centered sheet in x, plus the centering
// discriminator
// ---------------------------------------------------------------------------

const SHEET_XS: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];

pub fn run_sheet_experiment(cfg: &LabConfig) -> RunResult {
    let n = cfg.n.unwrap_or(200) as usize;
    let samples = cfg.samples.unwrap_or(3000);
    let seed = cfg.seed.unwrap_or(0);
    let c = cfg.c.unwrap_or(0.5);
    let steps = cfg.steps.unwrap_or(12_000) as usize;
    if n < 8 || samples < 2 || !(c > 0.0) || steps < 100 {
        return Err(err("sheet needs n >= 8, samples >= 2, c > 0, steps >= 100"));
    }
    let n13 = (n as f64).powf(1.0 / 3.0);
    let xs: Vec<f64> = SHEET_XS.to_vec();
    let ys: Vec<f64> = SHEET_XS.iter().map(|x| x + c).collect();

    // per sample: shared environment, S(x, x+c) for every x on the grid
    let rows = run_samples_vec(samples, seed, 0, |_, s| {
        let env = sheet_environment(n, &xs, &ys, steps, s).expect("sheet window");
        let sheet = sheet_from_environment(&env, n, &xs, &ys).expect("sheet values");
        (0..xs.len()).map(|i| sheet.value(i, i)).collect()
    });

    // per-sample regression slope over the x grid (shared noise cancels)
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let mut slope_m = RunningMoments::new();
    let mut level_m = RunningMoments::new();
    for row in &rows {
        let my = row.iter().sum::<f64>() / row.len() as f64;
        let sxy: f64 = xs.iter().zip(row).map(|(x, v)| (x - mx) * (v - my)).sum();
        slope_m.push(sxy / sxx);
        level_m.push(my);
    }

    // exact finite-n anchor for the level of E[S(x, x+c)]: Brownian scaling
    // sends the span-T window to span 1, and the exact spectral law supplies
    // the n-line mean there
    let span = 1.0 + 2.0 * c / n13;
    let mu = moments(&run_samples(20_000, seed, STREAM_BLOCK, |_, s| sample_edge_statistic(n, s)));
    let n23 = (n as f64).powf(2.0 / 3.0);
    let target = 2.0 * n23 * (span.sqrt() - 1.0) - 2.0 * c * n13 + span.sqrt() * mu.mean;

    // measured grid deficit at this (n, dt), span-free per jump
    let dt = {
        // reconstruct the actual window cell width the way sheet_environment does
        let t_lo = (2.0 * xs[0] / n13).min(0.0);
        let t_hi = 1.0 + 2.0 * ys[ys.len() - 1] / n13;
        (t_hi - t_lo) / steps as f64
    };
    let cal_steps = (1.0 / dt).round() as usize;
    let cal_samples = (samples / 2).clamp(200, 1500);
    let (bias, bias_se) = grid_bias(n, cal_steps, cal_samples, seed, 2 * STREAM_BLOCK);

    let corrected2 = level_m.mean - bias;
    let corrected1 = corrected2 + c * n13; // factor-1 centering shifts by c n^{1/3}
    let level_se = (level_m.std_error().powi(2) + bias_se.powi(2) + mu.std_error().powi(2)).sqrt();

    // the pinned level window; the factor-1 variant must land outside it
    const LEVEL_TOL: f64 = 1.0;
    let miss1 = corrected1 - target;

    let mut records = vec![
        StatRecord::gated("stationarity_slope", slope_m.mean, slope_m.std_error(), 0.0, 3.0 * slope_m.std_error()),
        // the factor-1 centering shifts every x equally, so its slope is
        // identical by construction; reported to document that the slope
        // statistic cannot discriminate the centerings
        StatRecord::diagnostic("stationarity_slope_factor1", slope_m.mean, slope_m.std_error()),
        StatRecord::gated("level_factor2", corrected2, level_se, target, LEVEL_TOL),
        StatRecord {
            name: "level_factor1_discriminated".into(),
            estimate: miss1,
            std_error: level_se,
            target: Some(0.0),
            tolerance: Some(LEVEL_TOL),
            // pass when the factor-1 centering misses the level window
            pass: Some(miss1.abs() > LEVEL_TOL),
        },
        StatRecord::diagnostic("grid_discretization_bias", bias, bias_se),
        StatRecord::diagnostic("spectral_anchor_mean", mu.mean, mu.std_error()),
    ];

    // per-x means, both for the CSV and as diagnostics
    let mut csv = String::from("x,mean,std_error\n");
    for (i, &x) in xs.iter().enumerate() {
        let m = moments(&rows.iter().map(|r| r[i]).collect::<Vec<f64>>());
        csv.push_str(&format!("{x},{:?},{:?}\n", m.mean, m.std_error()));
        records.push(StatRecord::diagnostic(&format!("mean_at_x_{i}"), m.mean, m.std_error()));
    }

    let mut config = ConfigMap::new();
    config.insert("n".into(), (n as u64).into());
    config.insert("samples".into(), samples.into());
    config.insert("seed".into(), seed.into());
    config.insert("c".into(), c.into());
    config.insert("steps".into(), (steps as u64).into());
    Ok(RunOutput {
        report: ExperimentReport {
            experiment: "sheet".into(),
            config,
            sample_count: samples,
            records,
        },
        data: vec![("levels.csv".into(), csv)],
    })
}

// ---------------------------------------------------------------------------
// compose (scaling suite): line-split composition, rescale checks, and a
// light stationarity cross-check
// ---------------------------------------------------------------------------

/// One composed sample for a split at line `k`: the seam decomposition of an
/// `n`-line passage value through its jump from line `k` to `k-1` reads
/// disjoint line sets on either side, so drawing the two sides from
/// independent environments leaves the law of
/// `max_c fwd[c] + bwd[c]` exactly that of the direct passage value -- at
/// every `n` and every grid. Split `k = n/2` realizes the equal-scale
/// composition (cube of each side's scale = its line fraction = 1/2).
fn composed_split_sample(n: usize, split: usize, steps: usize, s: RngStream) -> f64 {
    let n_left = n - split + 1; // lines n..split
    let n_right = split - 1; // lines split-1..1
    let grid = GridSpec::new(0.0, 1.0, steps).unwrap();
    let env1 = sample_brownian_ensemble(n_left, grid.clone(), s.substream(1), None).unwrap();
    let fwd = forward_profile(&env1, Point::new(0, n_left), 1, steps).unwrap();
    let env2 = sample_brownian_ensemble(n_right, grid, s.substream(2), None).unwrap();
    let bwd = backward_profile(&env2, Point::new(steps, 1), n_right, 0).unwrap();
    let mut best = f64::NEG_INFINITY;
    for c in 0..=steps {
        let v = fwd[c] + bwd[c];
        if v > best {
            best = v;
        }
    }
    best
}

pub fn run_scaling_suite(cfg: &LabConfig) -> RunResult {
    let n = cfg.n.unwrap_or(100) as usize;
    let samples = cfg.samples.unwrap_or(5000);
    let seed = cfg.seed.unwrap_or(0);
    let steps = cfg.steps.unwrap_or(10_000) as usize;
    if n < 8 || n % 2 != 0 || samples < 2 || steps < 100 {
        return Err(err("compose needs even n >= 8, samples >= 2, steps >= 100"));
    }
    let rescale = cfg.scale.unwrap_or_else(|| 0.5f64.powf(1.0 / 3.0));
    if !rescale.is_finite() || !(0.01..=100.0).contains(&rescale) {
        return Err(err("scale must lie in [0.01, 100]"));
    }
    let nf = n as f64;
    let n16 = nf.powf(1.0 / 6.0);
    let sqrt_n = nf.sqrt();

    // equal-scale split: both sides at scale (1/2)^{1/3}
    let pairs = run_samples_vec(samples, seed, 0, |_, s| {
        let gd = GridSpec::new(0.0, 1.0, steps).unwrap();
        let envd = sample_brownian_ensemble(n, gd, s.substream(0), None).unwrap();
        let ld = last_passage(&envd, Point::new(0, n), Point::new(steps, 1)).unwrap();
        let lc = composed_split_sample(n, n / 2, steps, s);
        vec![n16 * (ld - 2.0 * sqrt_n), n16 * (lc - 2.0 * sqrt_n)]
    });
    let direct: Vec<f64> = pairs.iter().map(|p| p[0]).collect();
    let composed: Vec<f64> = pairs.iter().map(|p| p[1]).collect();
    let md = moments(&direct);
    let mc = moments(&composed);
    let ratio = mc.variance() / md.variance();
    let ratio_se = ratio * (2.0 / (samples.max(2) - 1) as f64).sqrt() * 2.0f64.sqrt();
    let (ks_stat, ks_p) = ks_two_sample(&mut composed.clone(), &mut direct.clone());

    // degenerate split: one side carries a single line, the other nearly the
    // full scale; the law identity is the same, checked at reduced samples
    let deg_samples = (samples / 4).max(50);
    let degenerate = run_samples(deg_samples, seed, STREAM_BLOCK, |_, s| {
        n16 * (composed_split_sample(n, 2, steps, s) - 2.0 * sqrt_n)
    });
    let mdeg = moments(&degenerate);
    let deg_ratio = mdeg.variance() / md.variance();
    let deg_se = deg_ratio * (2.0 / (deg_samples.max(2) - 1) as f64).sqrt() * 2.0f64.sqrt();

    // rescale checks on the sampled values: the scale map multiplies values
    // by s and coordinates by s^2, so the group law is exact and the sample
    // variance scales by s^2 exactly
    let probe = ScaledSheet { n, xs: vec![0.0], ys: vec![0.0], values: direct.clone() };
    let twice = sheet_rescale(&sheet_rescale(&probe, rescale).unwrap(), 1.0 / rescale).unwrap();
    let group_err = twice
        .values
        .iter()
        .zip(&direct)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max)
        .max((twice.xs[0] - probe.xs[0]).abs());
    let rescaled = sheet_rescale(&probe, rescale).unwrap();
    let mr = moments(&rescaled.values);
    let var_scale_err =
        (mr.variance() - rescale * rescale * md.variance()).abs() / md.variance();

    // stationarity cross-check at this n, slope only (the sheet experiment
    // carries the full leveled version)
    let st_samples = (samples / 12).clamp(50, 500);
    let st_steps = (steps / 2).max(3000);
    let xs: Vec<f64> = SHEET_XS.to_vec();
    let ys: Vec<f64> = SHEET_XS.iter().map(|x| x + 0.5).collect();
    let st_rows = run_samples_vec(st_samples, seed, 2 * STREAM_BLOCK, |_, s| {
        let env = sheet_environment(n, &xs, &ys, st_steps, s).expect("sheet window");
        let sheet = sheet_from_environment(&env, n, &xs, &ys).expect("sheet values");
        (0..xs.len()).map(|i| sheet.value(i, i)).collect()
    });
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let mut slope_m = RunningMoments::new();
    for row in &st_rows {
        let my = row.iter().sum::<f64>() / row.len() as f64;
        let sxy: f64 = xs.iter().zip(row).map(|(x, v)| (x - mx) * (v - my)).sum();
        slope_m.push(sxy / sxx);
    }

    let records = vec![
        StatRecord::gated("variance_ratio", ratio, ratio_se, 1.0, 0.10),
        StatRecord::bounded_below("ks_p_value", ks_p, 0.0, 0.01),
        StatRecord::diagnostic("ks_statistic", ks_stat, 0.0),
        StatRecord::diagnostic("mean_direct", md.mean, md.std_error()),
        StatRecord::diagnostic("mean_composed", mc.mean, mc.std_error()),
        StatRecord::diagnostic("mean_gap", mc.mean - md.mean, (mc.std_error().powi(2) + md.std_error().powi(2)).sqrt()),
        StatRecord::diagnostic("degenerate_split_variance_ratio", deg_ratio, deg_se),
        StatRecord::gated("rescale_group_law", group_err, 0.0, 0.0, 1e-9),
        StatRecord::gated("rescale_variance_scaling", var_scale_err, 0.0, 0.0, 1e-9),
        StatRecord::gated("stationarity_slope", slope_m.mean, slope_m.std_error(), 0.0, 3.0 * slope_m.std_error()),
    ];

    let mut config = ConfigMap::new();
    config.insert("n".into(), (n as u64).into());
    config.insert("samples".into(), samples.into());
    config.insert("scale".into(), rescale.into());
    config.insert("seed".into(), seed.into());
    config.insert("steps".into(), (steps as u64).into());
    Ok(RunOutput {
        report: ExperimentReport {
            experiment: "compose".into(),
            config,
            sample_count: samples,
            records,
        },
        data: vec![
            ("direct.csv".into(), samples_to_csv("direct", &direct)),
            ("composed.csv".into(), samples_to_csv("composed", &composed)),
        ],
    })
}

// ---------------------------------------------------------------------------
// geodesic: transversal fluctuation exponent with a Brownian control
// ---------------------------------------------------------------------------

fn geodesic_lags() -> Vec<f64> {
    // a clean decade, 12 points, resolvable on the default grids
    (0..12).map(|i| 0.005 * 10.0f64.powf(i as f64 / 11.0 * 1.08)).collect()
}

pub fn run_geodesic_experiment(cfg: &LabConfig) -> RunResult {
    let n = cfg.n.unwrap_or(500) as usize;
    let samples = cfg.samples.unwrap_or(200);
    let seed = cfg.seed.unwrap_or(0);
    let steps = cfg.steps.unwrap_or(2000) as usize;
    if n < 32 || samples < 2 || steps < 200 {
        return Err(err("geodesic needs n >= 32, samples >= 2, steps >= 200"));
    }
    let lags = geodesic_lags();

    let slopes = run_samples(samples, seed, 0, |_, s| {
        let env = lpp_core::sample_landscape_window(n, 0.0, 1.0, 0.02, steps, s).expect("window");
        let path = extract_geodesic(&env, n, 0.0, 0.0, 0.0, 1.0, Side::Rightmost).expect("geodesic");
        holder_estimate(&path, &lags).expect("log-log fit").0
    });
    let m = moments(&slopes);

    // control: the same statistic on plain Brownian polylines recovers 1/2
    let controls = run_samples(samples, seed, STREAM_BLOCK, |_, s| {
        let grid = GridSpec::new(0.0, 1.0, steps).unwrap();
        let bm = sample_brownian_ensemble(1, grid.clone(), s, None).unwrap();
        let path = lpp_core::GeodesicPolyline {
            times: (0..=steps).map(|j| grid.time(j)).collect(),
            locations: bm.row(1).to_vec(),
        };
        holder_estimate(&path, &lags).expect("log-log fit").0
    });
    let mb = moments(&controls);

    let records = vec![
        StatRecord::gated("holder_slope", m.mean, m.std_error(), 0.675, 0.125),
        StatRecord::gated("brownian_control_slope", mb.mean, mb.std_error(), 0.5, 0.1),
    ];

    let mut csv = String::from("index,lpp_slope,brownian_slope\n");
    for (i, (a, b)) in slopes.iter().zip(&controls).enumerate() {
        csv.push_str(&format!("{i},{a:?},{b:?}\n"));
    }

    let mut config = ConfigMap::new();
    config.insert("n".into(), (n as u64).into());
    config.insert("samples".into(), samples.into());
    config.insert("seed".into(), seed.into());
    config.insert("steps".into(), (steps as u64).into());
    Ok(RunOutput {
        report: ExperimentReport {
            experiment: "geodesic".into(),
            config,
            sample_count: samples,
            records,
        },
        data: vec![("slopes.csv".into(), csv)],
    })
}

// ---------------------------------------------------------------------------
// zk: last line-occupation times of the rightmost melon geodesic
// ---------------------------------------------------------------------------

pub fn run_zk_experiment(cfg: &LabConfig) -> RunResult {
    let n = cfg.n.unwrap_or(400) as usize;
    let samples = cfg.samples.unwrap_or(500);
    let seed = cfg.seed.unwrap_or(0);
    let x = cfg.x.unwrap_or(1.0);
    let y = cfg.y.unwrap_or(0.0);
    let k_min = cfg.k_min.unwrap_or(8) as usize;
    let k_max = cfg.k_max.unwrap_or(16) as usize;
    let steps = cfg.steps.unwrap_or(2000) as usize;
    if n < 4 || samples < 2 || !(x > 0.0) || k_min < 2 || k_min > k_max || k_max > n {
        return Err(err("zk needs n >= 4, samples >= 2, x > 0, 2 <= k_min <= k_max <= n"));
    }
    let t_hi = (1.0 + 2.0 * y / (n as f64).powf(1.0 / 3.0)).max(1.0) + 0.05;

    // large n runs on the in-place sampled network: its top line is
    // grid-exact and the k-range medians are the gated statistic
    let rows = run_samples_vec(samples, seed, 0, |_, s| {
        let grid = GridSpec::new(0.0, t_hi, steps).unwrap();
        let env = sample_brownian_ensemble(n, grid, s, None).unwrap();
        let mel = melon_sampled(&env).expect("sampled melon");
        let prof = zk_profile(&mel, x, y, k_max).expect("profile");
        prof.z
    });

    let mut records = Vec::new();
    let mut csv = String::from("k,median_z_over_sqrt_k,se\n");
    for k in k_min..=k_max {
        let mut vals: Vec<f64> =
            rows.iter().map(|r| r[k - 1] / (k as f64).sqrt()).collect();
        let se = median_se(&vals);
        let med = median(&mut vals);
        // +-40% of the asymptotic -1/sqrt(2)
        let target = -std::f64::consts::FRAC_1_SQRT_2;
        records.push(StatRecord::gated(&format!("zk_median_k{k}"), med, se, target, 0.4 * target.abs()));
        csv.push_str(&format!("{k},{med:?},{se:?}\n"));
    }

    // small-scale cross-check: the exact sorting network against the
    // in-place one. The sampled network pushes deep-line occupation times
    // toward the start column (its deep lines carry O(cell) errors), so its
    // medians sit near the window floor; the exact network spreads them.
    if n > 64 {
        let (ns, ss, xs, reps) = (50usize, 500usize, 0.3f64, 40u64);
        let small = run_samples_vec(reps, seed, 2 * STREAM_BLOCK, |_, s| {
            let grid = GridSpec::new(0.0, 1.02, ss).unwrap();
            let env = sample_brownian_ensemble(ns, grid, s, None).unwrap();
            let exact = zk_profile(&melon(&env).expect("exact melon"), xs, 0.0, 4).expect("profile");
            let fast = zk_profile(&melon_sampled(&env).expect("sampled"), xs, 0.0, 4).expect("profile");
            vec![exact.z[3], fast.z[3]]
        });
        let mut e: Vec<f64> = small.iter().map(|p| p[0]).collect();
        let mut f: Vec<f64> = small.iter().map(|p| p[1]).collect();
        records.push(StatRecord::diagnostic("z4_median_exact_n50", median(&mut e), 0.0));
        records.push(StatRecord::diagnostic("z4_median_sampled_n50", median(&mut f), 0.0));
    }

    let mut config = ConfigMap::new();
    config.insert("n".into(), (n as u64).into());
    config.insert("samples".into(), samples.into());
    config.insert("seed".into(), seed.into());
    config.insert("x".into(), x.into());
    config.insert("y".into(), y.into());
    config.insert("k_min".into(), (k_min as u64).into());
    config.insert("k_max".into(), (k_max as u64).into());
    config.insert("steps".into(), (steps as u64).into());
    Ok(RunOutput {
        report: ExperimentReport {
            experiment: "zk".into(),
            config,
            sample_count: samples,
            records,
        },
        data: vec![("zk_medians.csv".into(), csv)],
    })
}

// ---------------------------------------------------------------------------
// busemann: stabilization of parabola-anchored differences, plus the
// rescaled-top-lines passage trend (both diagnostic-only)
// ---------------------------------------------------------------------------

pub fn run_busemann_experiment(cfg: &LabConfig) -> RunResult {
    let n = cfg.n.unwrap_or(200) as usize;
    let samples = cfg.samples.unwrap_or(120);
    let seed = cfg.seed.unwrap_or(0);
    let x = cfg.x.unwrap_or(1.0);
    let k_max = cfg.k_max.unwrap_or(16) as usize;
    let depth = cfg.depth.unwrap_or(8) as usize;
    let steps = cfg.steps.unwrap_or(1800) as usize;
    if n < 16 || samples < 2 || !(x > 0.0) || k_max < 4 || k_max > n {
        return Err(err("busemann needs n >= 16, samples >= 2, x > 0, 4 <= k_max <= n"));
    }
    if depth < 2 || depth > n {
        return Err(err("depth must lie in [2, n]"));
    }
    let (y, z) = (0.0, 0.5);
    let airy_ks: Vec<usize> = [2usize, 4, 8].into_iter().filter(|&k| k <= depth).collect();

    let rows = run_samples_vec(samples, seed, 0, |_, s| {
        let grid = GridSpec::new(0.0, 1.45, steps).unwrap();
        let env = sample_brownian_ensemble(n, grid, s, None).unwrap();
        let mel = melon_sampled(&env).expect("sampled melon");
        let mut row = busemann_differences(&mel, x, y, z, k_max).expect("differences");
        let y_grid: Vec<f64> = (0..=40).map(|i| i as f64 / 40.0).collect();
        let scaled = airy_rescale(&mel, depth, &y_grid).expect("rescale");
        row.extend(lpp_core::airy_lp_experiment(&scaled, &airy_ks, x).expect("top-lines passage"));
        row
    });

    let mut records = Vec::new();
    let mut csv = String::from("k,mean_abs_gap_to_kmax,se\n");
    // stabilization: |D_k - D_{k_max}| should shrink as k grows
    for k in [k_max / 4, k_max / 2, 3 * k_max / 4] {
        let gaps: Vec<f64> =
            rows.iter().map(|r| (r[k - 1] - r[k_max - 1]).abs()).collect();
        let m = moments(&gaps);
        records.push(StatRecord::diagnostic(&format!("busemann_gap_k{k}"), m.mean, m.std_error()));
        csv.push_str(&format!("{k},{:?},{:?}\n", m.mean, m.std_error()));
    }
    for (i, &k) in airy_ks.iter().enumerate() {
        let vals: Vec<f64> = rows.iter().map(|r| r[k_max + i]).collect();
        let m = moments(&vals);
        records.push(StatRecord::diagnostic(&format!("toplines_passage_k{k}"), m.mean, m.std_error()));
    }

    let mut config = ConfigMap::new();
    config.insert("depth".into(), (depth as u64).into());
    config.insert("n".into(), (n as u64).into());
    config.insert("samples".into(), samples.into());
    config.insert("seed".into(), seed.into());
    config.insert("x".into(), x.into());
    config.insert("k_max".into(), (k_max as u64).into());
    config.insert("steps".into(), (steps as u64).into());
    Ok(RunOutput {
        report: ExperimentReport {
            experiment: "busemann".into(),
            config,
            sample_count: samples,
            records,
        },
        data: vec![("busemann.csv".into(), csv)],
    })
}

// ---------------------------------------------------------------------------

pub fn run_experiment(name: &str, cfg: &LabConfig) -> RunResult {
    match name {
        "sample" => run_sample(cfg),
        "identities" => run_identity_suite(cfg),
        "tw" => run_tw_experiment(cfg),
        "sheet" => run_sheet_experiment(cfg),
        "compose" => run_scaling_suite(cfg),
        "geodesic" => run_geodesic_experiment(cfg),
        "zk" => run_zk_experiment(cfg),
        "busemann" => run_busemann_experiment(cfg),
        other => Err(err(format!("unknown experiment {other}"))),
    }
}
