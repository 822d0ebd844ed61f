use std::fmt;
use std::str::FromStr;

use super::brownian::BrownianGrid;
use super::coefficients::{CoefficientSet, Coefficients};
use crate::error::{Error, Result};
use crate::transform::TransformedCoefficients;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    /// Euler-Maruyama on `X` directly.
    EulerMaruyama,
    /// Euler-Maruyama on `Z = G(X)`, mapped back through `G^{-1}`.
    Transformed,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 2] = [SchemeKind::EulerMaruyama, SchemeKind::Transformed];

    pub fn tag(self) -> &'static str {
        match self {
            SchemeKind::EulerMaruyama => "EM",
            SchemeKind::Transformed => "GM",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "em" => Ok(SchemeKind::EulerMaruyama),
            "gm" => Ok(SchemeKind::Transformed),
            other => Err(Error::InvalidArgument(format!("unknown scheme '{other}', expected em or gm"))),
        }
    }
}

/// States of one simulated path on the uniform grid `t_j = j * step`.
#[derive(Clone, Debug, PartialEq)]
pub struct PathResult {
    pub scheme: SchemeKind,
    pub step: f64,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl PathResult {
    pub fn terminal(&self) -> &[f64] {
        self.states.last().expect("a path has at least its initial state")
    }
}

/// `Y_{j+1} = Y_j + mu(Y_j) delta + sigma(Y_j) dW_j` over the whole grid.
/// `visit(j, Y_j)` sees every grid state, the initial one included; the
/// terminal state is returned.
pub fn integrate<C, F>(coeffs: &C, y0: &[f64], grid: &BrownianGrid, mut visit: F) -> Result<Vec<f64>>
where
    C: Coefficients + ?Sized,
    F: FnMut(usize, &[f64]) -> Result<()>,
{
    let d = coeffs.dim();
    if y0.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: y0.len() });
    }
    if grid.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: grid.dim() });
    }
    let delta = grid.step_size();
    let mut y = y0.to_vec();
    let mut mu = vec![0.0; d];
    let mut sigma = vec![0.0; d * d];
    visit(0, &y)?;
    for j in 0..grid.steps() {
        coeffs.evaluate(&y, &mut mu, &mut sigma)?;
        let dw = grid.increment(j);
        for r in 0..d {
            let row = &sigma[r * d..(r + 1) * d];
            let noise: f64 = row.iter().zip(dw).map(|(s, w)| s * w).sum();
            y[r] += mu[r] * delta + noise;
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { step: j + 1 });
        }
        visit(j + 1, &y)?;
    }
    Ok(y)
}

fn record(scheme: SchemeKind, grid: &BrownianGrid, states: Vec<Vec<f64>>) -> PathResult {
    let step = grid.step_size();
    let times = (0..=grid.steps()).map(|j| j as f64 * step).collect();
    PathResult { scheme, step, times, states }
}

pub fn euler_maruyama(coeffs: &CoefficientSet, x0: &[f64], grid: &BrownianGrid) -> Result<PathResult> {
    let mut states = Vec::with_capacity(grid.steps() + 1);
    integrate(coeffs, x0, grid, |_, x| {
        states.push(x.to_vec());
        Ok(())
    })?;
    Ok(record(SchemeKind::EulerMaruyama, grid, states))
}

pub fn euler_maruyama_terminal(coeffs: &CoefficientSet, x0: &[f64], grid: &BrownianGrid) -> Result<Vec<f64>> {
    integrate(coeffs, x0, grid, |_, _| Ok(()))
}

/// Runs the transformed scheme and reports states in the original
/// coordinates, `X_j = G^{-1}(Z_j)`.
pub fn transform_scheme(coeffs: &TransformedCoefficients, x0: &[f64], grid: &BrownianGrid) -> Result<PathResult> {
    let t = coeffs.transform();
    let z0 = t.apply(x0)?;
    let mut states = Vec::with_capacity(grid.steps() + 1);
    integrate(coeffs, &z0, grid, |_, z| {
        states.push(t.inverse(z)?);
        Ok(())
    })?;
    Ok(record(SchemeKind::Transformed, grid, states))
}

pub fn transform_scheme_terminal(
    coeffs: &TransformedCoefficients,
    x0: &[f64],
    grid: &BrownianGrid,
) -> Result<Vec<f64>> {
    let t = coeffs.transform();
    let z = integrate(coeffs, &t.apply(x0)?, grid, |_, _| Ok(()))?;
    t.inverse(&z)
}
