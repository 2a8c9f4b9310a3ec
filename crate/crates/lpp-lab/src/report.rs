//! Experiment reports and their on-disk layout.
//!
//! Every run writes `<outdir>/<experiment>/<stamp>/` containing
//! `report.json` (deterministic: a function of the effective config only),
//! `manifest.json` (adds wall-clock and provenance; not byte-stable), and
//! any flat data CSVs the experiment emits.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;

pub type ConfigMap = BTreeMap<String, serde_json::Value>;

/// One reported statistic. `pass` is `None` for diagnostic-only records.
#[derive(Debug, Clone, Serialize)]
pub struct StatRecord {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub target: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: Option<bool>,
}

impl StatRecord {
    /// A hard check: pass iff |estimate - target| <= tolerance.
    pub fn gated(name: &str, estimate: f64, std_error: f64, target: f64, tolerance: f64) -> Self {
        StatRecord {
            name: name.to_string(),
            estimate,
            std_error,
            target: Some(target),
            tolerance: Some(tolerance),
            pass: Some((estimate - target).abs() <= tolerance),
        }
    }

    /// A one-sided hard check: pass iff estimate <= bound.
    pub fn bounded_above(name: &str, estimate: f64, std_error: f64, bound: f64) -> Self {
        StatRecord {
            name: name.to_string(),
            estimate,
            std_error,
            target: Some(bound),
            tolerance: None,
            pass: Some(estimate <= bound),
        }
    }

    /// A one-sided hard check: pass iff estimate >= bound.
    pub fn bounded_below(name: &str, estimate: f64, std_error: f64, bound: f64) -> Self {
        StatRecord {
            name: name.to_string(),
            estimate,
            std_error,
            target: Some(bound),
            tolerance: None,
            pass: Some(estimate >= bound),
        }
    }

    /// Reported without a pass gate.
    pub fn diagnostic(name: &str, estimate: f64, std_error: f64) -> Self {
        StatRecord {
            name: name.to_string(),
            estimate,
            std_error,
            target: None,
            tolerance: None,
            pass: None,
        }
    }
}

/// The deterministic payload of a run.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    /// Semantic configuration only (no outdir/threads/stamp): two runs with
    /// equal maps must produce byte-identical report.json files.
    pub config: ConfigMap,
    pub sample_count: u64,
    pub records: Vec<StatRecord>,
}

impl ExperimentReport {
    pub fn all_passed(&self) -> bool {
        self.records.iter().all(|r| r.pass != Some(false))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }

    /// One console line per record.
    pub fn print(&self) {
        for r in &self.records {
            let verdict = match r.pass {
                Some(true) => "PASS",
                Some(false) => "FAIL",
                None => "info",
            };
            let mut line = format!("[{verdict}] {}: {:.6} (se {:.2e}", r.name, r.estimate, r.std_error);
            if let Some(t) = r.target {
                line.push_str(&format!(", target {t:.6}"));
            }
            if let Some(tol) = r.tolerance {
                line.push_str(&format!(" +- {tol}"));
            }
            line.push(')');
            println!("{line}");
        }
    }
}

/// Wall-clock and provenance wrapper; never byte-compared.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub experiment: String,
    pub package_version: String,
    /// Full effective config, including plumbing keys (outdir, threads, stamp).
    pub effective_config: ConfigMap,
    pub wall_clock_seconds: f64,
}

impl Manifest {
    pub fn new(experiment: &str, effective_config: ConfigMap, runtime: Duration) -> Self {
        Manifest {
            experiment: experiment.to_string(),
            package_version: env!("CARGO_PKG_VERSION").to_string(),
            effective_config,
            wall_clock_seconds: runtime.as_secs_f64(),
        }
    }
}

/// Creates the run directory and writes report, manifest, and data files.
/// Returns the directory written into.
pub fn write_outputs(
    outdir: &Path,
    stamp: &str,
    report: &ExperimentReport,
    manifest: &Manifest,
    data_files: &[(String, String)],
) -> io::Result<PathBuf> {
    let dir = outdir.join(&report.experiment).join(stamp);
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("report.json"), report.to_json())?;
    let mut mj = serde_json::to_string_pretty(manifest).expect("manifest serialization");
    mj.push('\n');
    fs::write(dir.join("manifest.json"), mj)?;
    for (name, content) in data_files {
        fs::write(dir.join(name), content)?;
    }
    Ok(dir)
}

/// Default stamp: seconds since the epoch (override with --stamp for stable
/// output paths).
pub fn default_stamp() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("run-{secs}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo_report() -> ExperimentReport {
        let mut config = ConfigMap::new();
        config.insert("n".into(), 7.into());
        config.insert("seed".into(), 11.into());
        ExperimentReport {
            experiment: "demo".into(),
            config,
            sample_count: 3,
            records: vec![
                StatRecord::gated("mean", 0.51, 0.02, 0.5, 0.1),
                StatRecord::diagnostic("extra", 1.0, 0.0),
            ],
        }
    }

    #[test]
    fn identical_reports_serialize_identically() {
        assert_eq!(demo_report().to_json(), demo_report().to_json());
    }

    #[test]
    fn pass_logic_ignores_diagnostics() {
        let mut r = demo_report();
        assert!(r.all_passed());
        r.records.push(StatRecord::gated("bad", 1.0, 0.0, 0.0, 0.5));
        assert!(!r.all_passed());
    }

    #[test]
    fn outputs_land_in_the_run_directory() {
        let tmp = tempfile::tempdir().unwrap();
        let report = demo_report();
        let manifest = Manifest::new("demo", report.config.clone(), Duration::from_millis(5));
        let dir = write_outputs(
            tmp.path(),
            "fixed",
            &report,
            &manifest,
            &[("data.csv".into(), "index,x\n0,1\n".into())],
        )
        .unwrap();
        assert_eq!(dir, tmp.path().join("demo").join("fixed"));
        for f in ["report.json", "manifest.json", "data.csv"] {
            assert!(dir.join(f).is_file(), "{f} missing");
        }
        let text = fs::read_to_string(dir.join("report.json")).unwrap();
        assert_eq!(text, report.to_json());
    }
}
