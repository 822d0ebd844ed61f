//! CSV emission. Numbers are written in Rust's shortest round-trip form, so
//! identical results give identical bytes. Wall-clock times go to separate
//! `*_timing.csv` files.

use std::fs;
use std::path::{Path, PathBuf};

use csv::Writer;

use crate::analysis::AssumptionReport;
use crate::error::Result;

use super::benchmark::BenchmarkRow;
use super::convergence::ConvergenceReport;
use super::studies::OccupationReport;

fn num(v: f64) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn writer(dir: &Path, name: &str) -> Result<(Writer<fs::File>, PathBuf)> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    Ok((Writer::from_path(&path)?, path))
}

/// Writes `convergence.csv`, `convergence_timing.csv` and, with
/// `dump_paths`, one `terminal_<model>_<scheme>.csv` per report.
pub fn write_convergence(dir: &Path, reports: &[ConvergenceReport], dump_paths: bool) -> Result<Vec<PathBuf>> {
    let (mut main, main_path) = writer(dir, "convergence.csv")?;
    main.write_record([
        "model",
        "scheme",
        "k",
        "steps",
        "delta",
        "log2_delta",
        "raw_error",
        "error",
        "log2_error",
        "normalizer",
        "slope",
        "n_paths",
        "seed",
    ])?;
    let (mut timing, timing_path) = writer(dir, "convergence_timing.csv")?;
    timing.write_record(["model", "scheme", "k", "seconds"])?;
    let mut written = vec![main_path, timing_path];
    for r in reports {
        for l in &r.levels {
            main.write_record([
                r.model.clone(),
                r.scheme.tag().to_string(),
                l.k.to_string(),
                l.steps.to_string(),
                num(l.delta),
                num(l.delta.log2()),
                num(l.raw_error),
                num(l.error),
                num(l.error.log2()),
                opt(r.normalizer),
                opt(r.slope),
                r.n_paths.to_string(),
                r.seed.to_string(),
            ])?;
            timing.write_record([r.model.clone(), r.scheme.tag().to_string(), l.k.to_string(), num(l.seconds)])?;
        }
        if dump_paths {
            let (mut dump, path) = writer(dir, &format!("terminal_{}_{}.csv", r.model, r.scheme.tag()))?;
            let dim = r.terminal.first().and_then(|p| p.first()).map_or(0, Vec::len);
            let mut header = vec!["path".to_string(), "k".to_string()];
            header.extend((1..=dim).map(|i| format!("x{i}")));
            dump.write_record(&header)?;
            for (i, path_states) in r.terminal.iter().enumerate() {
                for (k, x) in r.terminal_levels.iter().zip(path_states) {
                    let mut row = vec![i.to_string(), k.to_string()];
                    row.extend(x.iter().map(|v| num(*v)));
                    dump.write_record(&row)?;
                }
            }
            dump.flush()?;
            written.push(path);
        }
    }
    main.flush()?;
    timing.flush()?;
    Ok(written)
}

pub fn write_benchmark(dir: &Path, rows: &[BenchmarkRow]) -> Result<PathBuf> {
    let (mut w, path) = writer(dir, "benchmark.csv")?;
    w.write_record(["model", "scheme", "steps", "paths", "seconds", "error"])?;
    for r in rows {
        w.write_record([
            r.model.clone(),
            r.scheme.tag().to_string(),
            r.steps.to_string(),
            r.paths.to_string(),
            num(r.seconds),
            num(r.error),
        ])?;
    }
    w.flush()?;
    Ok(path)
}

pub fn write_occupation(dir: &Path, report: &OccupationReport) -> Result<PathBuf> {
    let (mut w, path) = writer(dir, "occupation.csv")?;
    w.write_record(["model", "scheme", "eps", "occupation", "std_error", "fitted_exponent", "n_paths", "delta"])?;
    let s = &report.stats;
    for k in 0..s.eps_grid.len() {
        w.write_record([
            report.model.clone(),
            report.scheme.tag().to_string(),
            num(s.eps_grid[k]),
            num(s.occupation[k]),
            num(s.std_error[k]),
            opt(s.fitted_exponent),
            s.n_paths.to_string(),
            num(s.step),
        ])?;
    }
    w.flush()?;
    Ok(path)
}

pub fn write_check(dir: &Path, report: &AssumptionReport) -> Result<PathBuf> {
    let (mut w, path) = writer(dir, "check.csv")?;
    w.write_record(["model", "item", "name", "passed", "statistic", "detail"])?;
    for i in &report.items {
        w.write_record([
            report.model.clone(),
            i.index.to_string(),
            i.name.to_string(),
            i.passed.to_string(),
            num(i.statistic),
            i.detail.clone(),
        ])?;
    }
    w.flush()?;
    Ok(path)
}
