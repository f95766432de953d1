//! Stable text output: fixed float formatting and atomic file writes.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::orthopoly::GaussData;
use crate::quad1d::QuadRule1D;

/// Version tag carried by every JSON document.
pub const SCHEMA_VERSION: u32 = 1;

/// 17 significant digits in scientific notation; round-trips every `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// `k,node,cotes` rows for a Gauss rule, `k` running from `-⌊m/2⌋`.
pub fn gauss_csv(g: &GaussData) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# spec {}", g.spec().to_json());
    let _ = writeln!(out, "# m {}", g.m());
    out.push_str("k,node,cotes\n");
    let half = (g.m() / 2) as i64;
    let odd = g.m() % 2 == 1;
    for (i, (x, c)) in g.nodes().iter().zip(g.cotes()).enumerate() {
        let mut k = i as i64 - half;
        if !odd && k >= 0 {
            k += 1;
        }
        let _ = writeln!(out, "{k},{},{}", fmt_f64(*x), fmt_f64(*c));
    }
    out
}

/// `node,weight,scaled_weight` rows for a univariate rule.
pub fn rule_csv(rule: &QuadRule1D, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    out.push_str("node,weight,scaled_weight\n");
    for ((x, w), s) in rule
        .nodes()
        .iter()
        .zip(rule.weights())
        .zip(rule.scaled_weights())
    {
        let _ = writeln!(out, "{},{},{}", fmt_f64(*x), fmt_f64(*w), fmt_f64(*s));
    }
    out
}

/// Reads node coordinates from CSV text: `#` lines and a non-numeric
/// header are skipped, and only the first `d` columns are used.
pub fn parse_nodes_csv(text: &str, d: usize) -> Result<Vec<Vec<f64>>> {
    let mut nodes = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<f64>, _> =
            fields.iter().take(d).map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(v) if v.len() == d => nodes.push(v),
            _ if nodes.is_empty() && fields.iter().any(|f| f.parse::<f64>().is_err()) => continue,
            _ => {
                return Err(crate::error::Error::Parse(format!(
                    "line {}: expected {d} numeric columns",
                    lineno + 1
                )))
            }
        }
    }
    Ok(nodes)
}
