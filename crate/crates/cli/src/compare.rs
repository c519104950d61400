//! Comparison of two `t,E,G` series files: per-time relative
//! differences against the second (reference) file, plus max and
//! time-integrated summaries.

use std::fmt::Write as _;
use std::path::Path;

use crate::run::sig17;

/// Parsed series file.
#[derive(Debug, Clone)]
pub struct Series {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub grad_sq: Vec<f64>,
}

/// Reads a `t,E,G` file, skipping `#` comments and the column header.
pub fn read_series(path: &Path) -> Result<Series, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut series = Series {
        times: Vec::new(),
        energy: Vec::new(),
        grad_sq: Vec::new(),
    };
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("t,") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(format!(
                "{} line {}: expected 3 columns, got {}",
                path.display(),
                idx + 1,
                fields.len()
            ));
        }
        let parse = |s: &str| -> Result<f64, String> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| format!("{} line {}: {e}", path.display(), idx + 1))
        };
        series.times.push(parse(fields[0])?);
        series.energy.push(parse(fields[1])?);
        series.grad_sq.push(parse(fields[2])?);
    }
    if series.times.is_empty() {
        return Err(format!("{} holds no data rows", path.display()));
    }
    Ok(series)
}

/// Relative-difference summary of two series on a shared grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareSummary {
    pub max_rel_energy: f64,
    pub max_rel_grad_sq: f64,
    pub int_rel_energy: f64,
    pub int_rel_grad_sq: f64,
}

/// Per-time relative differences `|a - b| / max(|b|, tiny)` and the
/// summaries: max over time, and trapezoid-integrated
/// `∫|a-b| dt / ∫|b| dt`.
pub fn summarize(a: &Series, b: &Series) -> Result<(Vec<(f64, f64, f64)>, CompareSummary), String> {
    if a.times.len() != b.times.len() {
        return Err(format!(
            "series length mismatch: {} vs {} rows",
            a.times.len(),
            b.times.len()
        ));
    }
    for (ta, tb) in a.times.iter().zip(&b.times) {
        if (ta - tb).abs() > 1e-12 * (1.0 + tb.abs()) {
            return Err(format!("time grids differ: {ta} vs {tb}"));
        }
    }
    let tiny = 1e-30;
    let mut rows = Vec::with_capacity(a.times.len());
    let mut max_e = 0.0f64;
    let mut max_g = 0.0f64;
    for i in 0..a.times.len() {
        let rel_e = (a.energy[i] - b.energy[i]).abs() / b.energy[i].abs().max(tiny);
        let rel_g = (a.grad_sq[i] - b.grad_sq[i]).abs() / b.grad_sq[i].abs().max(tiny);
        max_e = max_e.max(rel_e);
        max_g = max_g.max(rel_g);
        rows.push((a.times[i], rel_e, rel_g));
    }
    let int_rel = |xa: &[f64], xb: &[f64]| -> f64 {
        let trapz = |vals: &dyn Fn(usize) -> f64| -> f64 {
            let mut acc = 0.0;
            for i in 1..a.times.len() {
                let h = a.times[i] - a.times[i - 1];
                acc += 0.5 * h * (vals(i - 1) + vals(i));
            }
            acc
        };
        let num = trapz(&|i| (xa[i] - xb[i]).abs());
        let den = trapz(&|i| xb[i].abs()).max(tiny);
        num / den
    };
    let summary = CompareSummary {
        max_rel_energy: max_e,
        max_rel_grad_sq: max_g,
        int_rel_energy: int_rel(&a.energy, &b.energy),
        int_rel_grad_sq: int_rel(&a.grad_sq, &b.grad_sq),
    };
    Ok((rows, summary))
}

/// Full comparison output: summary in the header comments, then
/// per-time rows.
pub fn compare_files(a_path: &Path, b_path: &Path) -> Result<String, String> {
    let a = read_series(a_path)?;
    let b = read_series(b_path)?;
    let (rows, summary) = summarize(&a, &b)?;
    let mut out = String::new();
    let _ = writeln!(out, "# compare_a = {}", a_path.display());
    let _ = writeln!(out, "# compare_b = {}", b_path.display());
    let _ = writeln!(out, "# max_rel_E = {}", sig17(summary.max_rel_energy));
    let _ = writeln!(out, "# max_rel_G = {}", sig17(summary.max_rel_grad_sq));
    let _ = writeln!(out, "# int_rel_E = {}", sig17(summary.int_rel_energy));
    let _ = writeln!(out, "# int_rel_G = {}", sig17(summary.int_rel_grad_sq));
    let _ = writeln!(out, "t,rel_E,rel_G");
    for (t, rel_e, rel_g) in rows {
        let _ = writeln!(out, "{},{},{}", sig17(t), sig17(rel_e), sig17(rel_g));
    }
    Ok(out)
}
