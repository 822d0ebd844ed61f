use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use super::brownian::BrownianGrid;
use super::coefficients::CoefficientSet;
use super::scheme::{self, PathResult, SchemeKind};
use crate::error::{Error, Result};
use crate::transform::{Transform, TransformedCoefficients};

/// One scheme bound to one model and initial state.
#[derive(Clone)]
pub struct Simulator {
    kind: SchemeKind,
    x0: Vec<f64>,
    horizon: f64,
    coefficients: CoefficientSet,
    transformed: Option<TransformedCoefficients>,
}

impl Simulator {
    /// `transform` is required for [`SchemeKind::Transformed`] and ignored
    /// otherwise.
    pub fn new(
        kind: SchemeKind,
        coefficients: CoefficientSet,
        transform: Option<Arc<Transform>>,
        x0: Vec<f64>,
        horizon: f64,
    ) -> Result<Self> {
        use super::Coefficients;
        if x0.len() != coefficients.dim() {
            return Err(Error::DimensionMismatch { expected: coefficients.dim(), got: x0.len() });
        }
        if !(horizon > 0.0) {
            return Err(Error::InvalidArgument(format!("horizon must be positive, got {horizon}")));
        }
        let transformed = match kind {
            SchemeKind::EulerMaruyama => None,
            SchemeKind::Transformed => {
                let t = transform
                    .ok_or_else(|| Error::InvalidArgument("the transformed scheme needs a transform".into()))?;
                Some(TransformedCoefficients::new(t, coefficients.clone()))
            }
        };
        Ok(Simulator { kind, x0, horizon, coefficients, transformed })
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn terminal(&self, grid: &BrownianGrid) -> Result<Vec<f64>> {
        match &self.transformed {
            None => scheme::euler_maruyama_terminal(&self.coefficients, &self.x0, grid),
            Some(tc) => scheme::transform_scheme_terminal(tc, &self.x0, grid),
        }
    }

    pub fn path(&self, grid: &BrownianGrid) -> Result<PathResult> {
        match &self.transformed {
            None => scheme::euler_maruyama(&self.coefficients, &self.x0, grid),
            Some(tc) => scheme::transform_scheme(tc, &self.x0, grid),
        }
    }

    /// Streams `(j, X_j)` for every grid state without storing the path.
    pub fn visit_states<F>(&self, grid: &BrownianGrid, mut visit: F) -> Result<()>
    where
        F: FnMut(usize, &[f64]) -> Result<()>,
    {
        match &self.transformed {
            None => scheme::integrate(&self.coefficients, &self.x0, grid, visit).map(|_| ()),
            Some(tc) => {
                let t = tc.transform();
                scheme::integrate(tc, &t.apply(&self.x0)?, grid, |j, z| visit(j, &t.inverse(z)?)).map(|_| ())
            }
        }
    }

    /// Brownian grid for path `index` at the finest resolution.
    pub fn grid(&self, seed: u64, index: u64, fine_steps: usize) -> Result<BrownianGrid> {
        BrownianGrid::generate(seed, index, self.dim(), self.horizon, fine_steps)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BatchResult {
    /// Steps per level, coarse to fine as requested.
    pub steps: Vec<usize>,
    /// `terminal[path][level]`.
    pub terminal: Vec<Vec<Vec<f64>>>,
}

/// Terminal states of `n_paths` paths at every requested step count. All
/// levels of one path share the Brownian path generated at the finest level.
/// Paths run on the current rayon pool and come back in index order.
pub fn simulate_batch(sim: &Simulator, n_paths: usize, level_steps: &[usize], seed: u64) -> Result<BatchResult> {
    simulate_batch_timed(sim, n_paths, level_steps, seed).map(|(batch, _)| batch)
}

/// [`simulate_batch`] plus, per level, the scheme time summed over paths.
/// Increment generation and coarsening are not timed.
pub fn simulate_batch_timed(
    sim: &Simulator,
    n_paths: usize,
    level_steps: &[usize],
    seed: u64,
) -> Result<(BatchResult, Vec<f64>)> {
    let fine = *level_steps.iter().max().ok_or_else(|| Error::InvalidArgument("no levels requested".into()))?;
    for &n in level_steps {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("step count {n} is not a power of two")));
        }
    }
    let per_path = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let grid = sim.grid(seed, i, fine)?;
            let mut states = Vec::with_capacity(level_steps.len());
            let mut seconds = Vec::with_capacity(level_steps.len());
            for &n in level_steps {
                let coarse = grid.coarsen(fine / n)?;
                let start = Instant::now();
                states.push(sim.terminal(&coarse)?);
                seconds.push(start.elapsed().as_secs_f64());
            }
            Ok((states, seconds))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut level_seconds = vec![0.0; level_steps.len()];
    let mut terminal = Vec::with_capacity(n_paths);
    for (states, seconds) in per_path {
        level_seconds.iter_mut().zip(&seconds).for_each(|(a, b)| *a += b);
        terminal.push(states);
    }
    Ok((BatchResult { steps: level_steps.to_vec(), terminal }, level_seconds))
}
