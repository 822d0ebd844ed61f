//! Fixtures shared by the criterion benchmarks.

use discsde::{BrownianGrid, Result};

/// Brownian grids for paths `0..n_paths`, generated up front so benchmarks
/// time only the schemes.
pub fn pregenerated_grids(
    seed: u64,
    n_paths: usize,
    dim: usize,
    horizon: f64,
    steps: usize,
) -> Result<Vec<BrownianGrid>> {
    (0..n_paths as u64).map(|i| BrownianGrid::generate(seed, i, dim, horizon, steps)).collect()
}
