//! Seeded Brownian increments on a dyadic grid.
//!
//! Each path owns its own ChaCha8 stream, selected by `(seed, path_index)`, so a
//! path's increments never depend on which worker generated it or in what
//! order. Coarser grids are built by repeated pairwise halving: coarse
//! increment `j` is `fine[2j] + fine[2j + 1]`. Because every coarsening is a
//! chain of halvings, `coarsen(coarsen(g, 2), 2)` and `coarsen(g, 4)` perform
//! the same additions and agree bit for bit.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::erf::erfc_inv;

use crate::error::{Error, Result};

/// Maps 64 random bits to a standard normal draw by inverting the CDF at a
/// uniform in the open interval (0, 1). The upper half mirrors the lower half,
/// so complementary bit patterns give draws of opposite sign exactly.
pub fn standard_normal_from_bits(bits: u64) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 52) as f64;
    let u = ((bits >> 12) as f64 + 0.5) * SCALE;
    if u < 0.5 {
        -std::f64::consts::SQRT_2 * erfc_inv(2.0 * u)
    } else {
        std::f64::consts::SQRT_2 * erfc_inv(2.0 * (1.0 - u))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BrownianGrid {
    dim: usize,
    horizon: f64,
    steps: usize,
    /// `steps x dim`, step-major.
    increments: Vec<f64>,
}

impl BrownianGrid {
    /// Draws `fine_steps` i.i.d. `N(0, T / fine_steps)` increments per component.
    pub fn generate(seed: u64, path_index: u64, dim: usize, horizon: f64, fine_steps: usize) -> Result<Self> {
        check_shape(dim, horizon, fine_steps)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(path_index);
        let scale = (horizon / fine_steps as f64).sqrt();
        let increments = (0..fine_steps * dim).map(|_| scale * standard_normal_from_bits(rng.next_u64())).collect();
        Ok(BrownianGrid { dim, horizon, steps: fine_steps, increments })
    }

    /// Wraps caller-supplied increments (`steps x dim`, step-major).
    pub fn from_increments(dim: usize, horizon: f64, increments: Vec<f64>) -> Result<Self> {
        if dim == 0 || !increments.len().is_multiple_of(dim) {
            return Err(Error::InvalidGrid(format!(
                "{} increments do not split into dimension {dim}",
                increments.len()
            )));
        }
        let steps = increments.len() / dim;
        check_shape(dim, horizon, steps)?;
        Ok(BrownianGrid { dim, horizon, steps, increments })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn step_size(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn increment(&self, j: usize) -> &[f64] {
        &self.increments[j * self.dim..(j + 1) * self.dim]
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    /// Increments at step `factor * delta`; `factor` must be a power of two
    /// dividing the number of steps.
    pub fn coarsen(&self, factor: usize) -> Result<BrownianGrid> {
        if factor == 0 || !factor.is_power_of_two() || factor > self.steps {
            return Err(Error::InvalidGrid(format!(
                "coarsening factor {factor} must be a power of two dividing {} steps",
                self.steps
            )));
        }
        let mut grid = self.clone();
        for _ in 0..factor.trailing_zeros() {
            grid = grid.halve();
        }
        Ok(grid)
    }

    fn halve(&self) -> BrownianGrid {
        let d = self.dim;
        let steps = self.steps / 2;
        let mut increments = Vec::with_capacity(steps * d);
        for j in 0..steps {
            let (a, b) = (self.increment(2 * j), self.increment(2 * j + 1));
            increments.extend(a.iter().zip(b).map(|(x, y)| x + y));
        }
        BrownianGrid { dim: d, horizon: self.horizon, steps, increments }
    }
}

fn check_shape(dim: usize, horizon: f64, steps: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidGrid("dimension must be at least 1".into()));
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidGrid(format!("horizon must be positive, got {horizon}")));
    }
    if steps == 0 || !steps.is_power_of_two() {
        return Err(Error::InvalidGrid(format!("step count {steps} is not a power of two")));
    }
    Ok(())
}
