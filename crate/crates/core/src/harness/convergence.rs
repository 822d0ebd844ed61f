//! Strong-convergence study. Level `k` uses `delta_k = T 2^-(k+2)`; every
//! level of a path is driven by coarsenings of one Brownian path, and
//!
//! ```text
//! err_k = e_bar * ( mean_i |X_T^(k),i - X_T^(k-1),i|^2 )^(1/2),   e_bar = 1/2 / raw err_{k_min}.
//! ```

use crate::analysis::least_squares_slope;
use crate::error::{Error, Result};
use crate::solver::{simulate_batch_timed, SchemeKind};

use super::config::ExperimentConfig;

#[derive(Clone, Debug, PartialEq)]
pub struct LevelRow {
    pub k: u32,
    pub steps: usize,
    pub delta: f64,
    pub raw_error: f64,
    pub error: f64,
    /// Scheme time at this level summed over paths.
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub model: String,
    pub scheme: SchemeKind,
    pub seed: u64,
    pub n_paths: usize,
    /// Levels `k_min..=k_max`.
    pub levels: Vec<LevelRow>,
    /// `e_bar`; `None` when the raw error at `k_min` is below [`DEGENERATE_RAW_ERROR`].
    pub normalizer: Option<f64>,
    /// Least-squares slope of `log2 err_k` against `log2 delta_k`.
    pub slope: Option<f64>,
    /// Levels of [`Self::terminal`]: `k_min - 1..=k_max`.
    pub terminal_levels: Vec<u32>,
    /// `terminal[path][level]`.
    pub terminal: Vec<Vec<Vec<f64>>>,
}

impl ConvergenceReport {
    /// The raw errors vanished, so `err_k` could not be normalized.
    pub fn degenerate(&self) -> bool {
        self.normalizer.is_none()
    }
}

/// A raw error at `k_min` below this counts as zero: the scheme reproduced
/// the solution up to rounding, and `e_bar` is left undefined.
pub const DEGENERATE_RAW_ERROR: f64 = 1e-12;

pub fn level_steps(k: u32) -> usize {
    1usize << (k + 2)
}

/// `( mean_i |t[i][l] - t[i][l-1]|^2 )^(1/2)` for `l = 1..levels`, summed in
/// path order.
pub fn raw_errors(terminal: &[Vec<Vec<f64>>]) -> Vec<f64> {
    let Some(first) = terminal.first() else { return Vec::new() };
    let n = terminal.len() as f64;
    (1..first.len())
        .map(|l| {
            let sum: f64 = terminal
                .iter()
                .map(|path| path[l].iter().zip(&path[l - 1]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
                .sum();
            (sum / n).sqrt()
        })
        .collect()
}

/// Slope of `log2 errors` against `log2 deltas`; `None` if an error is zero.
pub fn convergence_slope(deltas: &[f64], errors: &[f64]) -> Result<Option<f64>> {
    if errors.iter().any(|e| !(*e > 0.0)) {
        return Ok(None);
    }
    let xs: Vec<f64> = deltas.iter().map(|d| d.log2()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.log2()).collect();
    least_squares_slope(&xs, &ys).map(Some)
}

/// One report per configured scheme.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<Vec<ConvergenceReport>> {
    cfg.validate()?;
    if cfg.k_max - cfg.k_min < 2 {
        return Err(Error::InsufficientLevels { k_min: cfg.k_min, k_max: cfg.k_max });
    }
    let spec = cfg.model_spec()?;
    let ks: Vec<u32> = (cfg.k_min - 1..=cfg.k_max).collect();
    let steps: Vec<usize> = ks.iter().map(|&k| level_steps(k)).collect();
    let mut reports = Vec::with_capacity(cfg.schemes.len());
    for &scheme in &cfg.schemes {
        let sim = spec.simulator(scheme)?;
        let (batch, seconds) = cfg.install(|| simulate_batch_timed(&sim, cfg.n_paths, &steps, cfg.seed))??;
        let raw = raw_errors(&batch.terminal);
        let normalizer = (raw[0] > DEGENERATE_RAW_ERROR).then(|| 0.5 / raw[0]);
        let levels: Vec<LevelRow> = ks[1..]
            .iter()
            .enumerate()
            .map(|(i, &k)| LevelRow {
                k,
                steps: steps[i + 1],
                delta: spec.horizon / steps[i + 1] as f64,
                raw_error: raw[i],
                error: normalizer.map_or(raw[i], |e| e * raw[i]),
                seconds: seconds[i + 1],
            })
            .collect();
        let slope = match normalizer {
            None => None,
            Some(_) => {
                let deltas: Vec<f64> = levels.iter().map(|l| l.delta).collect();
                let errors: Vec<f64> = levels.iter().map(|l| l.error).collect();
                convergence_slope(&deltas, &errors)?
            }
        };
        reports.push(ConvergenceReport {
            model: spec.name.clone(),
            scheme,
            seed: cfg.seed,
            n_paths: cfg.n_paths,
            levels,
            normalizer,
            slope,
            terminal_levels: ks.clone(),
            terminal: batch.terminal,
        });
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(model: &str, levels: (u32, u32), paths: usize) -> ExperimentConfig {
        ExperimentConfig { model: model.into(), k_min: levels.0, k_max: levels.1, n_paths: paths, ..Default::default() }
    }

    #[test]
    fn first_error_is_one_half() {
        let r = run_convergence(&cfg("step", (1, 4), 64)).unwrap().remove(0);
        assert_eq!(r.levels[0].error, 0.5);
        assert_eq!(r.levels.len(), 4);
        assert_eq!(r.terminal_levels, vec![0, 1, 2, 3, 4]);
        assert_eq!(r.levels[3].steps, 64);
        assert!(r.slope.unwrap().is_finite());
    }

    #[test]
    fn ode_converges_at_order_one() {
        let r = run_convergence(&cfg("linear-ode", (1, 8), 2)).unwrap().remove(0);
        let slope = r.slope.unwrap();
        assert!((slope - 1.0).abs() < 0.05, "slope {slope}");
    }

    #[test]
    fn brownian_motion_is_reproduced_exactly() {
        let r = run_convergence(&cfg("brownian", (1, 4), 16)).unwrap().remove(0);
        assert!(r.degenerate());
        assert!(r.levels.iter().all(|l| l.raw_error < DEGENERATE_RAW_ERROR));
        assert_eq!(r.slope, None);
    }

    #[test]
    fn too_few_levels() {
        assert!(matches!(
            run_convergence(&cfg("step", (2, 3), 8)),
            Err(Error::InsufficientLevels { k_min: 2, k_max: 3 })
        ));
    }
}
