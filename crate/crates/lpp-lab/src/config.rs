//! Run configuration: a flat key-value TOML file (top-level scalars only,
//! documented in the README) merged with command-line flags. Flags win.
//! The merged result is echoed into every manifest, and its semantic subset
//! (everything except output plumbing) into every report.

use std::fmt;
use std::path::Path;

use crate::report::ConfigMap;

/// All recognized keys. Every field is optional here; experiments fill in
/// their own defaults when a key is absent.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabConfig {
    pub n: Option<u64>,
    pub samples: Option<u64>,
    pub steps: Option<u64>,
    pub seed: Option<u64>,
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub c: Option<f64>,
    pub k_min: Option<u64>,
    pub k_max: Option<u64>,
    pub depth: Option<u64>,
    pub scale: Option<f64>,
    pub melon: Option<bool>,
    // output plumbing (manifest-only)
    pub threads: Option<u64>,
    pub outdir: Option<String>,
    pub stamp: Option<String>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn want_u64(v: &toml::Value, key: &str) -> Result<u64, ConfigError> {
    v.as_integer()
        .filter(|&i| i >= 0)
        .map(|i| i as u64)
        .ok_or_else(|| ConfigError(format!("{key} must be a nonnegative integer, got {v}")))
}

fn want_f64(v: &toml::Value, key: &str) -> Result<f64, ConfigError> {
    match v {
        toml::Value::Float(f) => Ok(*f),
        toml::Value::Integer(i) => Ok(*i as f64),
        _ => Err(ConfigError(format!("{key} must be a number, got {v}"))),
    }
}

impl LabConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table =
            text.parse().map_err(|e| ConfigError(format!("unparseable TOML: {e}")))?;
        let mut cfg = LabConfig::default();
        for (key, value) in &table {
            match key.as_str() {
                "n" => cfg.n = Some(want_u64(value, key)?),
                "samples" => cfg.samples = Some(want_u64(value, key)?),
                "steps" => cfg.steps = Some(want_u64(value, key)?),
                "seed" => cfg.seed = Some(want_u64(value, key)?),
                "x" => cfg.x = Some(want_f64(value, key)?),
                "y" => cfg.y = Some(want_f64(value, key)?),
                "c" => cfg.c = Some(want_f64(value, key)?),
                "k_min" => cfg.k_min = Some(want_u64(value, key)?),
                "k_max" => cfg.k_max = Some(want_u64(value, key)?),
                "depth" => cfg.depth = Some(want_u64(value, key)?),
                "scale" => cfg.scale = Some(want_f64(value, key)?),
                "melon" => {
                    cfg.melon = Some(value.as_bool().ok_or_else(|| {
                        ConfigError(format!("melon must be a boolean, got {value}"))
                    })?)
                }
                "threads" => cfg.threads = Some(want_u64(value, key)?),
                "outdir" => {
                    cfg.outdir = Some(
                        value
                            .as_str()
                            .ok_or_else(|| ConfigError(format!("outdir must be a string, got {value}")))?
                            .to_string(),
                    )
                }
                "stamp" => {
                    cfg.stamp = Some(
                        value
                            .as_str()
                            .ok_or_else(|| ConfigError(format!("stamp must be a string, got {value}")))?
                            .to_string(),
                    )
                }
                other => return Err(ConfigError(format!("unknown key `{other}`"))),
            }
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// File values overlaid with flag values; any flag that is set wins.
    pub fn overlay(mut self, flags: LabConfig) -> LabConfig {
        macro_rules! take {
            ($($f:ident),*) => { $( if flags.$f.is_some() { self.$f = flags.$f; } )* };
        }
        take!(n, samples, steps, seed, x, y, c, k_min, k_max, depth, scale, melon, threads, outdir, stamp);
        self
    }

    /// Every set key, for the manifest echo.
    pub fn to_map(&self) -> ConfigMap {
        let mut m = ConfigMap::new();
        macro_rules! put {
            ($($f:ident),*) => { $( if let Some(v) = &self.$f { m.insert(stringify!($f).into(), (*v).into()); } )* };
        }
        put!(n, samples, steps, seed, k_min, k_max, depth, threads);
        macro_rules! putf {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { m.insert(stringify!($f).into(), v.into()); } )* };
        }
        putf!(x, y, c, scale);
        if let Some(v) = self.melon {
            m.insert("melon".into(), v.into());
        }
        if let Some(v) = &self.outdir {
            m.insert("outdir".into(), v.clone().into());
        }
        if let Some(v) = &self.stamp {
            m.insert("stamp".into(), v.clone().into());
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_scalars_and_rejects_nesting() {
        let cfg = LabConfig::from_toml_str("n = 40\nx = 1.5\nmelon = true\noutdir = \"out\"\n").unwrap();
        assert_eq!(cfg.n, Some(40));
        assert_eq!(cfg.x, Some(1.5));
        assert_eq!(cfg.melon, Some(true));
        assert_eq!(cfg.outdir.as_deref(), Some("out"));
        assert!(LabConfig::from_toml_str("[section]\nn = 2\n").is_err());
        assert!(LabConfig::from_toml_str("bogus = 1\n").is_err());
        assert!(LabConfig::from_toml_str("n = -3\n").is_err());
    }

    #[test]
    fn flags_override_file_values() {
        let file = LabConfig::from_toml_str("n = 10\nseed = 1\n").unwrap();
        let flags = LabConfig { seed: Some(9), ..Default::default() };
        let merged = file.overlay(flags);
        assert_eq!(merged.n, Some(10));
        assert_eq!(merged.seed, Some(9));
    }

    #[test]
    fn map_echo_is_sorted_and_complete() {
        let cfg = LabConfig::from_toml_str("seed = 3\nn = 2\nc = 0.5\n").unwrap();
        let m = cfg.to_map();
        let keys: Vec<&str> = m.keys().map(|s| s.as_str()).collect();
        assert_eq!(keys, vec!["c", "n", "seed"]);
    }
}
