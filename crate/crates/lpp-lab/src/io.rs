//! Flat-file formats: ensemble CSV (round-trips bitwise via shortest-float
//! formatting) and simple statistic/sample tables.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use lpp_core::{GridSpec, LineEnsemble};

/// Serializes an ensemble as CSV with a `#`-prefixed header. Non-uniform
/// grids carry their knot vector in a dedicated header line; uniform grids
/// encode (t_start, t_end, steps) only.
pub fn ensemble_to_csv(env: &LineEnsemble) -> String {
    let mut out = String::new();
    out.push_str("# lpp-ensemble v1\n");
    let g = &env.grid;
    let _ = writeln!(
        out,
        "# top_index={} n_lines={} t_start={:?} t_end={:?} steps={} seed={}",
        env.top_index, env.n_lines, g.t_start, g.t_end, g.steps, env.seed
    );
    if let Some(ts) = g.knots() {
        out.push_str("# knots=");
        for (i, t) in ts.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{t:?}");
        }
        out.push('\n');
    }
    out.push_str("line,values...\n");
    for line in 1..=env.n_lines {
        let _ = write!(out, "{}", env.global_of_line(line));
        for v in env.row(line) {
            let _ = write!(out, ",{v:?}");
        }
        out.push('\n');
    }
    out
}

pub fn write_ensemble_csv(path: &Path, env: &LineEnsemble) -> io::Result<()> {
    fs::write(path, ensemble_to_csv(env))
}

fn header_field<'a>(line: &'a str, key: &str) -> io::Result<&'a str> {
    line.split_whitespace()
        .find_map(|tok| tok.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidData, format!("missing header field {key}")))
}

fn parse<T: std::str::FromStr>(s: &str, what: &str) -> io::Result<T> {
    s.parse().map_err(|_| io::Error::new(io::ErrorKind::InvalidData, format!("bad {what}: {s}")))
}

pub fn ensemble_from_csv(text: &str) -> io::Result<LineEnsemble> {
    let bad = |m: &str| io::Error::new(io::ErrorKind::InvalidData, m.to_string());
    let mut lines = text.lines();
    match lines.next() {
        Some(l) if l.trim() == "# lpp-ensemble v1" => {}
        _ => return Err(bad("not an lpp-ensemble v1 file")),
    }
    let header = lines.next().ok_or_else(|| bad("truncated header"))?;
    let top_index: i64 = parse(header_field(header, "top_index")?, "top_index")?;
    let n_lines: usize = parse(header_field(header, "n_lines")?, "n_lines")?;
    let t_start: f64 = parse(header_field(header, "t_start")?, "t_start")?;
    let t_end: f64 = parse(header_field(header, "t_end")?, "t_end")?;
    let steps: usize = parse(header_field(header, "steps")?, "steps")?;
    let seed: u64 = parse(header_field(header, "seed")?, "seed")?;

    let mut peek = lines.next().ok_or_else(|| bad("truncated file"))?;
    let grid = if let Some(list) = peek.strip_prefix("# knots=") {
        let knots: Vec<f64> =
            list.split(',').map(|s| parse(s.trim(), "knot")).collect::<io::Result<_>>()?;
        peek = lines.next().ok_or_else(|| bad("truncated file"))?;
        GridSpec::new_explicit(knots).map_err(|e| bad(&format!("bad knot grid: {e}")))?
    } else {
        GridSpec::new(t_start, t_end, steps).map_err(|e| bad(&format!("bad grid: {e}")))?
    };
    if peek.trim() != "line,values..." {
        return Err(bad("missing column header"));
    }

    let mut values = Vec::with_capacity(n_lines * grid.points());
    let mut expected = top_index;
    for row in lines {
        if row.trim().is_empty() {
            continue;
        }
        let mut fields = row.split(',');
        let label: i64 = parse(fields.next().ok_or_else(|| bad("empty row"))?, "line label")?;
        if label != expected {
            return Err(bad("line labels out of order"));
        }
        expected += 1;
        let before = values.len();
        for f in fields {
            values.push(parse::<f64>(f, "value")?);
        }
        if values.len() - before != grid.points() {
            return Err(bad("row width does not match the grid"));
        }
    }
    LineEnsemble::new(top_index, n_lines, grid, values, seed)
        .map_err(|e| bad(&format!("inconsistent ensemble: {e}")))
}

pub fn read_ensemble_csv(path: &Path) -> io::Result<LineEnsemble> {
    ensemble_from_csv(&fs::read_to_string(path)?)
}

/// Flat table of per-sample values: `index,value`.
pub fn samples_to_csv(name: &str, values: &[f64]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "index,{name}");
    for (i, v) in values.iter().enumerate() {
        let _ = writeln!(out, "{i},{v:?}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use lpp_core::{sample_brownian_ensemble, melon, RngStream};

    #[test]
    fn ensemble_csv_round_trips_bitwise() {
        let grid = GridSpec::new(0.0, 1.0, 7).unwrap();
        let env = sample_brownian_ensemble(3, grid, RngStream::new(5, 0), None).unwrap();
        let text = ensemble_to_csv(&env);
        let back = ensemble_from_csv(&text).unwrap();
        assert_eq!(env, back);
    }

    #[test]
    fn melon_csv_round_trips_with_knots() {
        let grid = GridSpec::new(0.0, 1.0, 6).unwrap();
        let env = sample_brownian_ensemble(3, grid, RngStream::new(6, 0), None).unwrap();
        let m = melon(&env).unwrap();
        assert!(!m.ens.grid.is_uniform(), "expected a refined grid in this instance");
        let text = ensemble_to_csv(&m.ens);
        let back = ensemble_from_csv(&text).unwrap();
        assert_eq!(m.ens, back);
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        assert!(ensemble_from_csv("").is_err());
        assert!(ensemble_from_csv("# lpp-ensemble v1\n").is_err());
        let text = "# lpp-ensemble v1\n# top_index=0 n_lines=1 t_start=0 t_end=1 steps=2 seed=0\nline,values...\n0,0.0,0.5\n";
        assert!(ensemble_from_csv(text).is_err(), "row width mismatch must fail");
    }
}
