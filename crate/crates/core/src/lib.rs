//! Simulation of SDEs whose drift jumps across a hypersurface: the
//! Euler-Maruyama scheme, a transformation that removes the jump, and the
//! estimators used to study both.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod models;
pub mod solver;
pub mod transform;

pub use error::{Error, Result};
pub use geometry::{Hypersurface, SampleBox, Side};
pub use linalg::{Matrix, Point};
pub use models::ModelSpec;
pub use solver::{BrownianGrid, CoefficientSet, Coefficients, PathResult, SchemeKind, Simulator};
pub use transform::{PiecewiseDrift, Transform, TransformParams, TransformedCoefficients};
