//! Sequential EM-versus-GM timing. Brownian increments are generated before
//! the clock starts; only the scheme loop over all paths is timed.

use std::time::Instant;

use crate::error::Result;
use crate::solver::{BrownianGrid, SchemeKind};

use super::config::ExperimentConfig;
use super::convergence::{level_steps, raw_errors};

pub const BENCH_STEPS: usize = 512;
pub const BENCH_PATHS: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchmarkSetup {
    /// A power of two, at least 8.
    pub steps: usize,
    pub paths: usize,
}

impl Default for BenchmarkSetup {
    fn default() -> Self {
        BenchmarkSetup { steps: BENCH_STEPS, paths: BENCH_PATHS }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkRow {
    pub model: String,
    pub scheme: SchemeKind,
    pub steps: usize,
    pub paths: usize,
    pub seconds: f64,
    /// Normalized `err_k` at the benchmark step size, as in the convergence study.
    pub error: f64,
}

pub fn run_benchmark(cfg: &ExperimentConfig) -> Result<Vec<BenchmarkRow>> {
    run_benchmark_with(cfg, BenchmarkSetup::default())
}

/// Runs on the calling thread only.
pub fn run_benchmark_with(cfg: &ExperimentConfig, setup: BenchmarkSetup) -> Result<Vec<BenchmarkRow>> {
    let spec = cfg.model_spec()?;
    let k_top = setup.steps.trailing_zeros().saturating_sub(2);
    let level_counts: Vec<usize> = (0..=k_top).map(level_steps).collect();
    let grids: Vec<BrownianGrid> = (0..setup.paths as u64)
        .map(|i| BrownianGrid::generate(cfg.seed, i, spec.dim(), spec.horizon, setup.steps))
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(cfg.schemes.len());
    for &scheme in &cfg.schemes {
        let sim = spec.simulator(scheme)?;
        let start = Instant::now();
        for g in &grids {
            std::hint::black_box(sim.terminal(g)?);
        }
        let seconds = start.elapsed().as_secs_f64();

        let terminal = grids
            .iter()
            .map(|g| level_counts.iter().map(|&n| sim.terminal(&g.coarsen(setup.steps / n)?)).collect())
            .collect::<Result<Vec<Vec<_>>>>()?;
        let raw = raw_errors(&terminal);
        let error = 0.5 / raw[0] * raw[raw.len() - 1];
        rows.push(BenchmarkRow {
            model: spec.name.clone(),
            scheme,
            steps: setup.steps,
            paths: setup.paths,
            seconds,
            error,
        });
    }
    Ok(rows)
}
