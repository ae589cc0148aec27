//! CSV and JSON emission. Rows are written in deterministic order and floats
//! use Rust's shortest round-trip formatting, so identical configs and seeds
//! produce byte-identical files.

use super::phase::{extract_half_curve, PhaseGrid};
use super::sweeps::{ConcentrationRow, SweepRow};
use crate::error::Result;
use serde::Serialize;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

/// FNV-1a of a string, hex-encoded; stable across platforms and versions.
pub fn fnv1a_hex(data: &str) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in data.as_bytes() {
        hash ^= *byte as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    Ok(())
}

pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    ensure_parent(path)?;
    fs::write(path, contents)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    ensure_parent(path)?;
    fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

/// `<stem>.csv`, `<stem>_plot.csv`, `<stem>_meta.json` for an output stem.
pub struct OutputPaths {
    pub raw: PathBuf,
    pub plot: PathBuf,
    pub meta: PathBuf,
}

pub fn output_paths(stem: &Path) -> OutputPaths {
    let base = stem.to_string_lossy();
    OutputPaths {
        raw: PathBuf::from(format!("{base}.csv")),
        plot: PathBuf::from(format!("{base}_plot.csv")),
        meta: PathBuf::from(format!("{base}_meta.json")),
    }
}

/// Long-format raw grid: one row per cell.
pub fn phase_csv(grids: &[PhaseGrid]) -> String {
    let mut out = String::from("scenario,c,n,m,m_over_n,s,s_over_m,successes,trials,success_rate\n");
    for grid in grids {
        let scenario = format!("{:?}", grid.scenario).to_lowercase();
        for (mi, &m) in grid.m_values.iter().enumerate() {
            for (sj, &s) in grid.s_values[mi].iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{}",
                    scenario,
                    grid.c,
                    grid.n,
                    m,
                    m as f64 / grid.n as f64,
                    s,
                    s as f64 / m as f64,
                    grid.successes[mi][sj],
                    grid.trials,
                    grid.success_rate(mi, sj),
                );
            }
        }
    }
    out
}

/// Plot-ready long format `(x, y, series)`: the 50% contours.
pub fn phase_plot_csv(grids: &[PhaseGrid]) -> String {
    let mut out = String::from("x,y,series\n");
    for grid in grids {
        let scenario = format!("{:?}", grid.scenario).to_lowercase();
        let series = format!("{} C={}", scenario, grid.c);
        for point in extract_half_curve(grid) {
            let _ = writeln!(out, "{},{},{}", point.m_over_n, point.crossing.value(), series);
        }
    }
    out
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("c,d,quantity,value\n");
    for row in rows {
        let _ = writeln!(out, "{},{},{},{}", row.c, row.d, row.quantity, row.value);
    }
    out
}

pub fn sweep_plot_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("x,y,series\n");
    for row in rows {
        let _ = writeln!(out, "{},{},{}", row.c, row.value, row.quantity);
    }
    out
}

pub fn concentration_csv(rows: &[ConcentrationRow]) -> String {
    let mut out = String::from("t,m,empirical_tail,bound\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            row.t, row.m, row.empirical_tail, row.bound
        );
    }
    out
}

pub fn concentration_plot_csv(rows: &[ConcentrationRow]) -> String {
    let mut out = String::from("x,y,series\n");
    for row in rows {
        let _ = writeln!(out, "{},{},m={} empirical", row.t, row.empirical_tail, row.m);
        let _ = writeln!(out, "{},{},m={} bound", row.t, row.bound, row.m);
    }
    out
}

/// Metadata sidecar fields shared by all experiments.
#[derive(Serialize)]
pub struct Metadata<'a, C: Serialize> {
    pub experiment: &'a str,
    pub config: &'a C,
    pub config_hash: String,
    pub notes: Vec<&'a str>,
}

pub fn metadata<'a, C: Serialize>(
    experiment: &'a str,
    config: &'a C,
    notes: Vec<&'a str>,
) -> Result<Metadata<'a, C>> {
    let hash = fnv1a_hex(&serde_json::to_string(config)?);
    Ok(Metadata {
        experiment,
        config,
        config_hash: hash,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_is_stable() {
        assert_eq!(fnv1a_hex(""), "cbf29ce484222325");
        assert_eq!(fnv1a_hex("a"), "af63dc4c8601ec8c");
        assert_ne!(fnv1a_hex("abc"), fnv1a_hex("abd"));
    }

    #[test]
    fn csv_headers() {
        assert!(phase_csv(&[]).starts_with("scenario,c,n,m,"));
        assert!(sweep_csv(&[]).starts_with("c,d,quantity,value"));
        assert!(concentration_csv(&[]).starts_with("t,m,empirical_tail,bound"));
    }
}
