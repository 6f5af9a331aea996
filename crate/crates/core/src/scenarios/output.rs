//! CSV, PGM and manifest writers.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use super::config::Format;
use super::run::RunResults;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::measure::{Density, JointDensity};
use crate::sampling::CoincidenceCounts;

const PGM_MAX: f64 = 65535.0;

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// `x,p` rows, one per lattice point.
pub fn density_csv(d: &Density) -> String {
    let mut out = String::from("x,p\n");
    for (x, p) in d.grid().points().iter().zip(d.values()) {
        let _ = writeln!(out, "{},{}", num(*x), num(*p));
    }
    out
}

fn matrix_csv<T: Copy>(g1: &Grid, g2: &Grid, m: &DMatrix<T>, column: &str, fmt: impl Fn(T) -> String) -> String {
    let mut out = format!("x1,x2,{column}\n");
    let x1 = g1.points();
    let x2 = g2.points();
    for (i, a) in x1.iter().enumerate() {
        for (j, b) in x2.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", num(*a), num(*b), fmt(m[(i, j)]));
        }
    }
    out
}

/// `x1,x2,p` rows with `x1` varying slowest.
pub fn joint_csv(p: &JointDensity) -> String {
    matrix_csv(p.grid1(), p.grid2(), p.values(), "p", num)
}

/// `x1,x2,count` rows with `x1` varying slowest.
pub fn counts_csv(c: &CoincidenceCounts) -> String {
    matrix_csv(c.grid1(), c.grid2(), c.counts(), "count", |v| v.to_string())
}

/// Plain-text greymap: one image row per arm 1 point, one column per arm 2
/// point, scaled so the maximum maps to 65535.
pub fn matrix_pgm(m: &DMatrix<f64>) -> String {
    let peak = m.iter().copied().fold(0.0, f64::max);
    let scale = if peak > 0.0 { PGM_MAX / peak } else { 0.0 };
    let mut out = format!("P2\n{} {}\n65535\n", m.ncols(), m.nrows());
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|c| ((m[(r, c)] * scale).round().clamp(0.0, PGM_MAX) as u32).to_string())
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn joint_pgm(p: &JointDensity) -> String {
    matrix_pgm(p.values())
}

fn write(dir: &Path, name: &str, text: &str) -> Result<String> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(name.to_string())
}

/// Write every computed item into `dir` and return the file manifest.
pub fn write_outputs(r: &RunResults, dir: &Path, formats: &[Format]) -> Result<BTreeMap<String, Vec<String>>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let csv = formats.contains(&Format::Csv);
    let pgm = formats.contains(&Format::Pgm);
    let mut manifest = BTreeMap::new();
    for (key, d) in &r.densities {
        let mut files = Vec::new();
        if csv {
            files.push(write(dir, &format!("{key}.csv"), &density_csv(d))?);
        }
        manifest.insert(key.clone(), files);
    }
    for (key, j) in &r.joints {
        let mut files = Vec::new();
        if csv {
            files.push(write(dir, &format!("{key}.csv"), &joint_csv(j))?);
        }
        if pgm {
            files.push(write(dir, &format!("{key}.pgm"), &joint_pgm(j))?);
        }
        manifest.insert(key.clone(), files);
    }
    for (key, c) in &r.counts {
        let mut files = Vec::new();
        if csv {
            files.push(write(dir, &format!("{key}.csv"), &counts_csv(c))?);
        }
        if pgm {
            files.push(write(dir, &format!("{key}.pgm"), &matrix_pgm(&c.counts().map(|v| v as f64)))?);
        }
        manifest.insert(key.clone(), files);
    }
    Ok(manifest)
}
