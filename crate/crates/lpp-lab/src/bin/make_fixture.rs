//! Regenerates fixtures/tw_reference.json: the edge-statistic reference law
//! sampled from the tridiagonal spectral model at a scale large enough that
//! finite-size drift is below the acceptance tolerances.

use std::path::PathBuf;

use clap::Parser;
use serde_json::json;

use lpp_lab::oracle::sample_edge_statistic;
use lpp_lab::runner::run_samples;
use lpp_lab::stats::RunningMoments;

#[derive(Parser)]
#[command(name = "make-fixture", about = "Regenerate the edge-statistic reference fixture")]
struct Cli {
    #[arg(long, default_value_t = 2000)]
    n: usize,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 20_260_501)]
    seed: u64,
    /// Destination; defaults to the embedded fixture location
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    let values = run_samples(cli.samples, cli.seed, 0, |_, s| sample_edge_statistic(cli.n, s));

    let mut m = RunningMoments::new();
    for &v in &values {
        m.push(v);
    }
    let thresholds = [2.0, 3.0, 4.0];
    let frac = |pred: &dyn Fn(f64) -> bool| {
        values.iter().filter(|&&v| pred(v)).count() as f64 / values.len() as f64
    };
    let above: Vec<f64> = thresholds.iter().map(|&t| frac(&|v| v > t)).collect();
    let below: Vec<f64> = thresholds.iter().map(|&t| frac(&|v| v < -t)).collect();

    let doc = json!({
        "version": 1,
        "generator": {
            "method": "tridiagonal-spectral",
            "n": cli.n,
            "samples": cli.samples,
            "seed": cli.seed,
        },
        "mean": m.mean,
        "variance": m.variance(),
        "tail_thresholds": thresholds,
        "tail_above": above,
        "tail_below": below,
    });

    let out = cli.out.unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/tw_reference.json")
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("fixture serialization");
    text.push('\n');
    std::fs::write(&out, text).expect("write fixture");
    println!(
        "wrote {} (mean {:.4}, variance {:.4}, se {:.4})",
        out.display(),
        m.mean,
        m.variance(),
        m.std_error()
    );
}
