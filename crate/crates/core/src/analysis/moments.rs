//! Within-step behaviour of the Euler-Maruyama interpolation
//! `X_s = X_j + mu(X_j)(s - t_j) + sigma(X_j)(W_s - W_{t_j})`, sampled on a
//! sub-grid [`SUBSTEPS`] times finer than the scheme step. The sub-grid is the
//! grid the Brownian increments are generated on; the scheme itself uses
//! their coarsening.

use rayon::prelude::*;

use super::fit::{least_squares_slope, mean_and_std_error};
use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::models::ModelSpec;
use crate::solver::{BrownianGrid, Coefficients};

pub const SUBSTEPS: usize = 8;

/// Runs one path and hands `|X_{s_i} - X_{t_j}|` for the sub-points
/// `s_i = t_j + i delta / SUBSTEPS`, `i = 1..=SUBSTEPS`, to `visit`, together
/// with the matching `|W_{s_i} - W_{t_j}|`.
fn interpolated_path<F>(model: &ModelSpec, grid: &BrownianGrid, steps: usize, mut visit: F) -> Result<()>
where
    F: FnMut(&[f64; SUBSTEPS], &[f64; SUBSTEPS]),
{
    let coeffs = &model.coefficients;
    let d = coeffs.dim();
    let coarse = grid.coarsen(SUBSTEPS)?;
    let delta = coarse.step_size();
    let h = grid.step_size();
    let mut x = model.x0.clone();
    let (mut mu, mut sigma) = (vec![0.0; d], vec![0.0; d * d]);
    let mut w = vec![0.0; d];
    let mut diff = vec![0.0; d];
    let mut dist = [0.0; SUBSTEPS];
    let mut noise = [0.0; SUBSTEPS];
    for j in 0..steps {
        coeffs.evaluate(&x, &mut mu, &mut sigma)?;
        w.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..SUBSTEPS {
            for (wk, inc) in w.iter_mut().zip(grid.increment(j * SUBSTEPS + i)) {
                *wk += inc;
            }
            let elapsed = (i + 1) as f64 * h;
            for r in 0..d {
                let row = &sigma[r * d..(r + 1) * d];
                diff[r] = mu[r] * elapsed + row.iter().zip(&w).map(|(s, v)| s * v).sum::<f64>();
            }
            dist[i] = norm(&diff);
            noise[i] = norm(&w);
        }
        visit(&dist, &noise);
        let dw = coarse.increment(j);
        for r in 0..d {
            let row = &sigma[r * d..(r + 1) * d];
            x[r] += mu[r] * delta + row.iter().zip(dw).map(|(s, v)| s * v).sum::<f64>();
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { step: j + 1 });
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// Monte Carlo estimate of `E int_0^T |X_s - X_{floor(s)}|^2 ds` for the
/// Euler-Maruyama scheme with `steps` steps, each step integrated by
/// composite Simpson on the sub-grid.
pub fn one_step_moment(model: &ModelSpec, n_paths: usize, steps: usize, seed: u64) -> Result<MomentEstimate> {
    let h = model.horizon / (steps * SUBSTEPS) as f64;
    let per_path: Vec<f64> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let grid = BrownianGrid::generate(seed, i, model.dim(), model.horizon, steps * SUBSTEPS)?;
            let mut total = 0.0;
            interpolated_path(model, &grid, steps, |dist, _| {
                let mut s = 0.0;
                for (k, r) in dist.iter().enumerate() {
                    let weight = if k + 1 == SUBSTEPS {
                        1.0
                    } else if k % 2 == 0 {
                        4.0
                    } else {
                        2.0
                    };
                    s += weight * r * r;
                }
                total += s * h / 3.0;
            })?;
            Ok(total)
        })
        .collect::<Result<_>>()?;
    let (value, std_error) = mean_and_std_error(&per_path);
    Ok(MomentEstimate { value, std_error })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExcursionStats {
    pub eps_grid: Vec<f64>,
    /// Number of (path, step) pairs whose within-step excursion reached eps.
    pub counts: Vec<u64>,
    /// `counts` divided by the number of (path, step) pairs.
    pub frequency: Vec<f64>,
    /// Largest `|W_s - W_{floor(s)}|` seen on the sub-grid.
    pub max_noise: f64,
    pub step: f64,
}

impl ExcursionStats {
    /// Slope of `ln frequency` against `eps / (sup_diffusion sqrt(delta))`.
    pub fn decay_slope(&self, sup_diffusion: f64) -> Result<f64> {
        if self.counts.contains(&0) {
            return Err(Error::DegenerateFit("some eps never saw an excursion".into()));
        }
        let scale = sup_diffusion * self.step.sqrt();
        let xs: Vec<f64> = self.eps_grid.iter().map(|e| e / scale).collect();
        let ys: Vec<f64> = self.frequency.iter().map(|f| f.ln()).collect();
        least_squares_slope(&xs, &ys)
    }
}

/// Frequency, over paths and steps, of `sup_{s in step j} |X_s - X_{t_j}| >= eps`.
pub fn excursion_profile(
    model: &ModelSpec,
    n_paths: usize,
    steps: usize,
    eps_grid: &[f64],
    seed: u64,
) -> Result<ExcursionStats> {
    if eps_grid.is_empty() {
        return Err(Error::InvalidArgument("empty eps grid".into()));
    }
    let per_path: Vec<(Vec<u64>, f64)> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let grid = BrownianGrid::generate(seed, i, model.dim(), model.horizon, steps * SUBSTEPS)?;
            let mut counts = vec![0u64; eps_grid.len()];
            let mut max_noise: f64 = 0.0;
            interpolated_path(model, &grid, steps, |dist, noise| {
                let sup = dist.iter().copied().fold(0.0, f64::max);
                max_noise = noise.iter().copied().fold(max_noise, f64::max);
                for (c, e) in counts.iter_mut().zip(eps_grid) {
                    if sup >= *e {
                        *c += 1;
                    }
                }
            })?;
            Ok((counts, max_noise))
        })
        .collect::<Result<_>>()?;
    let mut counts = vec![0u64; eps_grid.len()];
    let mut max_noise: f64 = 0.0;
    for (c, m) in &per_path {
        counts.iter_mut().zip(c).for_each(|(a, b)| *a += b);
        max_noise = max_noise.max(*m);
    }
    let total = (n_paths * steps) as f64;
    Ok(ExcursionStats {
        eps_grid: eps_grid.to_vec(),
        frequency: counts.iter().map(|c| *c as f64 / total).collect(),
        counts,
        max_noise,
        step: model.horizon / steps as f64,
    })
}

pub fn excursion_prob(model: &ModelSpec, n_paths: usize, steps: usize, eps: f64, seed: u64) -> Result<f64> {
    Ok(excursion_profile(model, n_paths, steps, &[eps], seed)?.frequency[0])
}
