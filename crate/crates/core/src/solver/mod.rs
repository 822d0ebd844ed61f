//! Path simulation: Brownian increments, the Euler-Maruyama recursion and the
//! transformed scheme built on top of it.

mod batch;
mod brownian;
mod coefficients;
mod scheme;

pub use batch::{simulate_batch, simulate_batch_timed, BatchResult, Simulator};
pub use brownian::{standard_normal_from_bits, BrownianGrid};
pub use coefficients::{CoefficientSet, Coefficients, MatrixField, VectorField};
pub use scheme::{
    euler_maruyama, euler_maruyama_terminal, integrate, transform_scheme, transform_scheme_terminal, PathResult,
    SchemeKind,
};
