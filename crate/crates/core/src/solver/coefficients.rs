use std::fmt;
use std::sync::Arc;

use crate::error::Result;
use crate::linalg::Matrix;

/// `x -> v(x)`, written into the output slice.
pub type VectorField = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// `x -> M(x)` for a square matrix, written row-major into the output slice.
pub type MatrixField = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// Anything the Euler-Maruyama recursion can step: a drift vector and a
/// diffusion matrix per state.
pub trait Coefficients: Send + Sync {
    fn dim(&self) -> usize;

    /// Writes `mu(x)` into `drift` and `sigma(x)` (row-major) into `diffusion`.
    fn evaluate(&self, x: &[f64], drift: &mut [f64], diffusion: &mut [f64]) -> Result<()>;
}

/// Drift/diffusion pair of `dX = mu(X) dt + sigma(X) dW`.
///
/// `sup_drift` bounds the Euclidean norm of the drift, `sup_diffusion` the
/// spectral norm of the diffusion matrix, over the state space.
#[derive(Clone)]
pub struct CoefficientSet {
    dim: usize,
    drift: VectorField,
    diffusion: MatrixField,
    pub sup_drift: f64,
    pub sup_diffusion: f64,
}

impl CoefficientSet {
    pub fn new(dim: usize, drift: VectorField, diffusion: MatrixField, sup_drift: f64, sup_diffusion: f64) -> Self {
        CoefficientSet { dim, drift, diffusion, sup_drift, sup_diffusion }
    }

    pub fn drift_field(&self) -> &VectorField {
        &self.drift
    }

    pub fn diffusion_field(&self) -> &MatrixField {
        &self.diffusion
    }

    pub fn drift_at(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        (self.drift)(x, &mut out);
        out
    }

    pub fn diffusion_at(&self, x: &[f64]) -> Matrix {
        let mut m = Matrix::zeros(self.dim);
        (self.diffusion)(x, m.as_mut_slice());
        m
    }
}

impl Coefficients for CoefficientSet {
    fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn evaluate(&self, x: &[f64], drift: &mut [f64], diffusion: &mut [f64]) -> Result<()> {
        (self.drift)(x, drift);
        (self.diffusion)(x, diffusion);
        Ok(())
    }
}

impl fmt::Debug for CoefficientSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientSet")
            .field("dim", &self.dim)
            .field("sup_drift", &self.sup_drift)
            .field("sup_diffusion", &self.sup_diffusion)
            .finish_non_exhaustive()
    }
}
