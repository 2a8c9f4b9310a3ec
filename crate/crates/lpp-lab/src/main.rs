use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use lpp_lab::config::LabConfig;
use lpp_lab::experiments::run_experiment;
use lpp_lab::report::{default_stamp, write_outputs, Manifest};

#[derive(Parser)]
#[command(
    name = "lpp-lab",
    version,
    about = "Sampling experiments for Brownian last passage percolation",
    after_help = "Exit status: 0 all gates passed, 1 a gate failed, 2 bad configuration."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one environment (optionally its melon) and write it as CSV
    Sample(CommonArgs),
    /// Exact-identity suite over random small environments
    Identities(CommonArgs),
    /// One-point edge statistic against the embedded reference fixture
    Tw(CommonArgs),
    /// Stationarity and centering of the two-parameter sheet
    Sheet(CommonArgs),
    /// Half-duration slab composition against a direct full-duration run
    Compose(CommonArgs),
    /// Transversal fluctuation exponent of extracted geodesics
    Geodesic(CommonArgs),
    /// Line-occupation times of the rightmost melon geodesic
    Zk(CommonArgs),
    /// Stabilization of parabola-anchored differences (diagnostic only)
    Busemann(CommonArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Sample(_) => "sample",
            Command::Identities(_) => "identities",
            Command::Tw(_) => "tw",
            Command::Sheet(_) => "sheet",
            Command::Compose(_) => "compose",
            Command::Geodesic(_) => "geodesic",
            Command::Zk(_) => "zk",
            Command::Busemann(_) => "busemann",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::Sample(a)
            | Command::Identities(a)
            | Command::Tw(a)
            | Command::Sheet(a)
            | Command::Compose(a)
            | Command::Geodesic(a)
            | Command::Zk(a)
            | Command::Busemann(a) => a,
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// TOML config file; explicit flags override file values
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Number of lines in the environment
    #[arg(long)]
    n: Option<u64>,
    /// Monte Carlo sample count
    #[arg(long)]
    samples: Option<u64>,
    /// Time-grid resolution (meaning documented per experiment)
    #[arg(long)]
    steps: Option<u64>,
    /// Master seed; fixed seed plus fixed config reproduces every byte
    #[arg(long)]
    seed: Option<u64>,
    /// Scaled start location
    #[arg(long)]
    x: Option<f64>,
    /// Scaled end location
    #[arg(long)]
    y: Option<f64>,
    /// Scaled horizon offset for the sheet experiment
    #[arg(long)]
    c: Option<f64>,
    /// Smallest line index under study
    #[arg(long)]
    k_min: Option<u64>,
    /// Largest line index under study
    #[arg(long)]
    k_max: Option<u64>,
    /// Recursion depth for composition-style experiments
    #[arg(long)]
    depth: Option<u64>,
    /// Scale factor passed to rescaling checks
    #[arg(long)]
    scale: Option<f64>,
    /// Also compute the melon in the sample subcommand
    #[arg(long)]
    melon: bool,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<u64>,
    /// Output root; runs land in <outdir>/<experiment>/<stamp>/
    #[arg(long, value_name = "DIR")]
    outdir: Option<PathBuf>,
    /// Run directory name (default: run-<unix seconds>)
    #[arg(long)]
    stamp: Option<String>,
}

impl CommonArgs {
    fn as_flags(&self) -> LabConfig {
        LabConfig {
            n: self.n,
            samples: self.samples,
            steps: self.steps,
            seed: self.seed,
            x: self.x,
            y: self.y,
            c: self.c,
            k_min: self.k_min,
            k_max: self.k_max,
            depth: self.depth,
            scale: self.scale,
            melon: if self.melon { Some(true) } else { None },
            threads: self.threads,
            outdir: self.outdir.as_ref().map(|p| p.display().to_string()),
            stamp: self.stamp.clone(),
        }
    }
}

fn run(cli: Cli) -> Result<bool, String> {
    let args = cli.command.args();
    let file_cfg = match &args.config {
        Some(path) => LabConfig::from_file(path).map_err(|e| e.to_string())?,
        None => LabConfig::default(),
    };
    let cfg = file_cfg.overlay(args.as_flags());

    if let Some(t) = cfg.threads {
        if t == 0 {
            return Err("threads must be at least 1".into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t as usize)
            .build_global()
            .map_err(|e| format!("thread pool: {e}"))?;
    }

    let name = cli.command.name();
    let started = Instant::now();
    let out = run_experiment(name, &cfg).map_err(|e| e.to_string())?;
    let runtime = started.elapsed();

    out.report.print();

    let outdir = PathBuf::from(cfg.outdir.clone().unwrap_or_else(|| "runs".into()));
    let stamp = cfg.stamp.clone().unwrap_or_else(default_stamp);
    let manifest = Manifest::new(name, cfg.to_map(), runtime);
    let dir = write_outputs(&outdir, &stamp, &out.report, &manifest, &out.data)
        .map_err(|e| format!("writing outputs: {e}"))?;
    println!("wrote {}", dir.display());

    Ok(out.report.all_passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
