use rayon::prelude::*;

use super::fit::{least_squares_slope, mean_and_std_error};
use crate::error::{Error, Result};
use crate::geometry::Hypersurface;
use crate::solver::Simulator;

#[derive(Clone, Debug, PartialEq)]
pub struct OccupationStats {
    pub eps_grid: Vec<f64>,
    /// Estimates of `int_0^T P(X_s in Θ^eps) ds`, one per `eps`.
    pub occupation: Vec<f64>,
    /// Standard errors of the per-path occupation times.
    pub std_error: Vec<f64>,
    /// Slope of `ln occupation` against `ln eps`; `None` when some occupation
    /// is zero.
    pub fitted_exponent: Option<f64>,
    pub n_paths: usize,
    pub step: f64,
}

/// Time spent in each tube `Θ^eps`, from grid-time states:
/// `delta * sum_{j < N} 1{X_{j delta} in Θ^eps}` averaged over paths.
pub fn occupation_time(
    sim: &Simulator,
    surface: &Hypersurface,
    n_paths: usize,
    steps: usize,
    eps_grid: &[f64],
    seed: u64,
) -> Result<OccupationStats> {
    if eps_grid.is_empty() {
        return Err(Error::InvalidArgument("empty eps grid".into()));
    }
    if let Some(bad) = eps_grid.iter().find(|e| !(**e > 0.0) || **e >= surface.reach() / 2.0) {
        return Err(Error::InvalidArgument(format!("eps = {bad} must lie in (0, reach / 2)")));
    }
    if n_paths == 0 {
        return Err(Error::InvalidArgument("at least one path is required".into()));
    }
    let delta = sim.horizon() / steps as f64;
    let per_path: Vec<Vec<f64>> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let grid = sim.grid(seed, i, steps)?;
            let mut counts = vec![0u64; eps_grid.len()];
            sim.visit_states(&grid, |j, x| {
                if j < steps {
                    let d = surface.distance(x);
                    for (c, eps) in counts.iter_mut().zip(eps_grid) {
                        if d < *eps {
                            *c += 1;
                        }
                    }
                }
                Ok(())
            })?;
            Ok(counts.into_iter().map(|c| c as f64 * delta).collect())
        })
        .collect::<Result<_>>()?;

    let mut occupation = Vec::with_capacity(eps_grid.len());
    let mut std_error = Vec::with_capacity(eps_grid.len());
    let mut column = vec![0.0; n_paths];
    for k in 0..eps_grid.len() {
        for (c, row) in column.iter_mut().zip(&per_path) {
            *c = row[k];
        }
        let (m, se) = mean_and_std_error(&column);
        occupation.push(m);
        std_error.push(se);
    }
    let fitted_exponent = if eps_grid.len() < 2 {
        return Err(Error::DegenerateFit("an exponent needs at least two eps values".into()));
    } else if occupation.iter().all(|o| *o > 0.0) {
        let xs: Vec<f64> = eps_grid.iter().map(|e| e.ln()).collect();
        let ys: Vec<f64> = occupation.iter().map(|o| o.ln()).collect();
        Some(least_squares_slope(&xs, &ys)?)
    } else {
        None
    };
    Ok(OccupationStats { eps_grid: eps_grid.to_vec(), occupation, std_error, fitted_exponent, n_paths, step: delta })
}

/// Expected value of the grid-time occupation estimator for a standard
/// one-dimensional Brownian motion from 0 and `Θ = {0}`:
/// `delta * sum_{j < N} P(|W_{j delta}| < eps)`.
pub fn brownian_occupation_expectation(eps: f64, horizon: f64, steps: usize) -> f64 {
    let delta = horizon / steps as f64;
    let tail: f64 = (1..steps).map(|j| statrs::function::erf::erf(eps / (2.0 * j as f64 * delta).sqrt())).sum();
    delta * (1.0 + tail)
}

/// Discrete occupation-density estimate of the local time of a scalar path
/// at level `y`: `(1 / 2h) sum_j 1{|Y_j - y| < h} (Y_{j+1} - Y_j)^2`.
pub fn local_time_estimate(path: &[f64], y: f64, h: f64) -> f64 {
    let sum: f64 = path.windows(2).filter(|w| (w[0] - y).abs() < h).map(|w| (w[1] - w[0]) * (w[1] - w[0])).sum();
    sum / (2.0 * h)
}
