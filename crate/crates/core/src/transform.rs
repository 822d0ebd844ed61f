//! The discontinuity-removing map
//!
//! ```text
//! G(x) = x + phi~(x) alpha(p(x))   inside the tube around Θ,   G(x) = x outside,
//! phi~(x) = D(x) |D(x)| phi(|D(x)| / c),   phi(u) = (1 + u)^3 (1 - u)^3 on |u| <= 1,
//! alpha(xi) = (mu_-(xi) - mu_+(xi)) / (2 |sigma(xi)^T n(xi)|^2),
//! ```
//!
//! its derivatives, its inverse, and the coefficients of `Z = G(X)`:
//!
//! ```text
//! mu~(z)    = G'(x) mu(x) + 1/2 sum_l G''(x)[sigma_l(x), sigma_l(x)],   x = G^{-1}(z),
//! sigma~(z) = G'(x) sigma(x),
//! ```
//!
//! where `sigma_l` is the `l`-th column of `sigma`. The scalar profile
//! `g(s) = s |s| phi(|s| / c)`, the signed distance `D` and the projection `p`
//! are differentiated in closed form. The field `a(x) = alpha(p(x))` is smooth
//! in the tube; its derivatives are taken by central differences of the exact
//! `alpha`.

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{Frame, Hypersurface, SampleBox, Side, SURFACE_TOL};
use crate::linalg::{dot, mul_vec_into, norm, spectral_norm, transpose_mul_vec_into, Matrix};
use crate::solver::{CoefficientSet, Coefficients, MatrixField, VectorField};

pub const DEFAULT_INVERSION_TOL: f64 = 1e-12;
pub const DEFAULT_INVERSION_MAX_ITER: usize = 50;
/// Smallest admissible `|sigma(xi)^T n(xi)|`.
pub const DEFAULT_C0_MIN: f64 = 1e-8;
/// One-sided offset used by [`alpha_from_limits`].
pub const LIMIT_STEP: f64 = 1e-6;
/// `choose_c` accepts a bump scale once the sampled Jacobian norm of the
/// perturbation `x -> phi~(x) a(x)` is at most this.
pub const CONTRACTION_BOUND: f64 = 0.5;
const CHOOSE_C_SAMPLES: usize = 1000;
const CHOOSE_C_HALVINGS: u32 = 40;

/// `(1 + u)^3 (1 - u)^3` on `[-1, 1]`, zero outside.
pub fn bump(u: f64) -> f64 {
    if u.abs() <= 1.0 {
        let v = 1.0 - u * u;
        v * v * v
    } else {
        0.0
    }
}

fn bump_derivatives(u: f64) -> (f64, f64, f64) {
    if u.abs() > 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let v = 1.0 - u * u;
    (v * v * v, -6.0 * u * v * v, v * (30.0 * u * u - 6.0))
}

/// `g` and its first two derivatives at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileValue {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

/// The radial profile `g(s) = s |s| phi(|s| / c)` of the transform.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BumpProfile {
    c: f64,
}

impl BumpProfile {
    pub fn new(c: f64) -> Self {
        BumpProfile { c }
    }

    pub fn scale(&self) -> f64 {
        self.c
    }

    /// The smooth branch `sign * s^2 phi(s / c)`, valid for every `s`. On the
    /// matching side of zero it coincides with `g`.
    pub fn branch(&self, s: f64, sign: f64) -> ProfileValue {
        let c = self.c;
        let (p, p1, p2) = bump_derivatives(s / c);
        ProfileValue {
            value: sign * s * s * p,
            d1: sign * (2.0 * s * p + s * s * p1 / c),
            d2: sign * (2.0 * p + 4.0 * s * p1 / c + s * s * p2 / (c * c)),
        }
    }

    /// `g(s)`; at `s = 0` the second derivative is the positive-side limit.
    pub fn eval(&self, s: f64) -> ProfileValue {
        self.branch(s, if s >= 0.0 { 1.0 } else { -1.0 })
    }
}

/// `phi~(x) = D(x) |D(x)| phi(|D(x)| / c)`; zero whenever `d(x, Θ) >= c`.
pub fn phi_tilde(surface: &Hypersurface, c: f64, x: &[f64]) -> f64 {
    if surface.distance(x) >= c {
        return 0.0;
    }
    let d = surface.local_frame(x).signed_distance;
    d * d.abs() * bump(d.abs() / c)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransformParams {
    /// Bump support scale.
    pub c: f64,
    /// Tube width, below the reach of the surface.
    pub eps0: f64,
    pub inversion_tol: f64,
    pub inversion_max_iter: usize,
    /// First-derivative difference step; `None` means `eps^(1/3) max(1, |x|)`.
    pub fd_step: Option<f64>,
    pub c0_min: f64,
}

impl TransformParams {
    pub fn new(c: f64, eps0: f64) -> Self {
        TransformParams {
            c,
            eps0,
            inversion_tol: DEFAULT_INVERSION_TOL,
            inversion_max_iter: DEFAULT_INVERSION_MAX_ITER,
            fd_step: None,
            c0_min: DEFAULT_C0_MIN,
        }
    }

    pub fn validate(&self, surface: &Hypersurface) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.c > 0.0) || !(self.eps0 > 0.0) {
            return bad(format!("c = {} and eps0 = {} must be positive", self.c, self.eps0));
        }
        if self.c > self.eps0 {
            return bad(format!("bump scale c = {} exceeds eps0 = {}", self.c, self.eps0));
        }
        if self.eps0 >= surface.reach() {
            return bad(format!("eps0 = {} is not below the reach {}", self.eps0, surface.reach()));
        }
        if !(self.inversion_tol >= 1e-14) || self.inversion_max_iter == 0 {
            return bad("inversion_tol must be >= 1e-14 and inversion_max_iter >= 1".into());
        }
        if matches!(self.fd_step, Some(h) if !(h > 0.0)) {
            return bad("fd_step must be positive".into());
        }
        Ok(())
    }
}

/// Drift made of one smooth, globally defined piece per side of the surface.
#[derive(Clone)]
pub struct PiecewiseDrift {
    surface: Hypersurface,
    negative: VectorField,
    positive: VectorField,
    continuous: bool,
}

impl PiecewiseDrift {
    /// `negative` applies where the signed distance is negative, `positive`
    /// elsewhere (including on the surface).
    pub fn new(surface: Hypersurface, negative: VectorField, positive: VectorField) -> Self {
        PiecewiseDrift { surface, negative, positive, continuous: false }
    }

    /// A drift with no jump; its `alpha` vanishes identically.
    pub fn continuous(surface: Hypersurface, field: VectorField) -> Self {
        PiecewiseDrift { surface, negative: field.clone(), positive: field, continuous: true }
    }

    pub fn surface(&self) -> &Hypersurface {
        &self.surface
    }

    pub fn is_continuous(&self) -> bool {
        self.continuous
    }

    pub fn piece(&self, side: Side) -> &VectorField {
        match side {
            Side::Negative => &self.negative,
            Side::Positive => &self.positive,
        }
    }

    pub fn classify(&self, x: &[f64]) -> Side {
        self.surface.side(x)
    }

    #[inline]
    pub fn eval(&self, x: &[f64], out: &mut [f64]) {
        (self.piece(self.surface.side(x)))(x, out)
    }

    /// The assembled drift as a plain field.
    pub fn as_field(&self) -> VectorField {
        let me = self.clone();
        Arc::new(move |x, out| me.eval(x, out))
    }
}

impl fmt::Debug for PiecewiseDrift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PiecewiseDrift")
            .field("surface", self.surface())
            .field("continuous", &self.is_continuous())
            .finish_non_exhaustive()
    }
}

fn alpha_from_jump(jump: &mut [f64], diffusion: &MatrixField, xi: &[f64], normal: &[f64], c0_min: f64) -> Result<()> {
    let d = xi.len();
    let mut sigma = vec![0.0; d * d];
    diffusion(xi, &mut sigma);
    let mut proj = vec![0.0; d];
    transpose_mul_vec_into(&sigma, d, normal, &mut proj);
    let s = norm(&proj);
    if !(s >= c0_min) {
        return Err(Error::DegenerateDiffusion { value: s, threshold: c0_min });
    }
    let denom = 2.0 * s * s;
    jump.iter_mut().for_each(|v| *v /= denom);
    Ok(())
}

/// `alpha(xi)` from the drift pieces evaluated at the surface point itself.
pub fn alpha(drift: &PiecewiseDrift, coeffs: &CoefficientSet, xi: &[f64]) -> Result<Vec<f64>> {
    alpha_with_threshold(drift, coeffs.diffusion_field(), xi, DEFAULT_C0_MIN)
}

fn alpha_with_threshold(drift: &PiecewiseDrift, diffusion: &MatrixField, xi: &[f64], c0_min: f64) -> Result<Vec<f64>> {
    let normal = drift.surface().unit_normal(xi)?;
    let d = xi.len();
    if drift.is_continuous() {
        return Ok(vec![0.0; d]);
    }
    let mut minus = vec![0.0; d];
    let mut plus = vec![0.0; d];
    (drift.negative)(xi, &mut minus);
    (drift.positive)(xi, &mut plus);
    let mut jump: Vec<f64> = minus.iter().zip(&plus).map(|(m, p)| m - p).collect();
    alpha_from_jump(&mut jump, diffusion, xi, &normal, c0_min)?;
    Ok(jump)
}

/// `alpha(xi)` for a drift known only as a black box, from one-sided values at
/// `xi -/+ h n(xi)`.
pub fn alpha_from_limits(
    drift: &VectorField,
    coeffs: &CoefficientSet,
    surface: &Hypersurface,
    xi: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    let normal = surface.unit_normal(xi)?;
    let d = xi.len();
    let minus_pt: Vec<f64> = xi.iter().zip(&normal).map(|(a, n)| a - h * n).collect();
    let plus_pt: Vec<f64> = xi.iter().zip(&normal).map(|(a, n)| a + h * n).collect();
    let mut minus = vec![0.0; d];
    let mut plus = vec![0.0; d];
    drift(&minus_pt, &mut minus);
    drift(&plus_pt, &mut plus);
    let mut jump: Vec<f64> = minus.iter().zip(&plus).map(|(m, p)| m - p).collect();
    alpha_from_jump(&mut jump, coeffs.diffusion_field(), xi, &normal, DEFAULT_C0_MIN)?;
    Ok(jump)
}

/// Everything needed for first and second derivatives of `G` at a point
/// inside the bump support.
struct Jet {
    frame: Frame,
    g: ProfileValue,
    /// `a(x) = alpha(p(x))`.
    a: Vec<f64>,
    /// Row-major `d x d`, `da[k * d + j] = d a_k / d x_j`.
    da: Vec<f64>,
    second_step: f64,
}

pub struct Transform {
    drift: PiecewiseDrift,
    diffusion: MatrixField,
    dim: usize,
    params: TransformParams,
    profile: BumpProfile,
}

impl Transform {
    pub fn new(drift: PiecewiseDrift, coeffs: &CoefficientSet, params: TransformParams) -> Result<Self> {
        params.validate(drift.surface())?;
        let dim = coeffs.dim();
        if drift.surface().dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: drift.surface().dim() });
        }
        Ok(Transform {
            profile: BumpProfile::new(params.c),
            diffusion: coeffs.diffusion_field().clone(),
            drift,
            dim,
            params,
        })
    }

    pub fn params(&self) -> &TransformParams {
        &self.params
    }

    pub fn surface(&self) -> &Hypersurface {
        self.drift.surface()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// A continuous drift makes `G` the identity.
    pub fn is_identity(&self) -> bool {
        self.drift.is_continuous()
    }

    pub fn alpha(&self, xi: &[f64]) -> Result<Vec<f64>> {
        alpha_with_threshold(&self.drift, &self.diffusion, xi, self.params.c0_min)
    }

    /// `G` differs from the identity only where this holds.
    pub fn in_support(&self, x: &[f64]) -> bool {
        !self.is_identity() && self.surface().distance(x) < self.params.c
    }

    pub fn phi_tilde(&self, x: &[f64]) -> f64 {
        phi_tilde(self.surface(), self.params.c, x)
    }

    /// `a(x) = alpha(p(x))` for `x` well inside the reach.
    fn alpha_field(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let frame = self.surface().local_frame(x);
        let xi = &frame.foot;
        (self.drift.negative)(xi, out);
        let mut plus = vec![0.0; self.dim];
        (self.drift.positive)(xi, &mut plus);
        out.iter_mut().zip(&plus).for_each(|(m, p)| *m -= p);
        alpha_from_jump(out, &self.diffusion, xi, &frame.normal, self.params.c0_min)
    }

    fn steps(&self, x: &[f64]) -> (f64, f64) {
        let scale = norm(x).max(1.0);
        let first = self.params.fd_step.unwrap_or(f64::EPSILON.cbrt());
        (first * scale, first.powf(0.75) * scale)
    }

    fn jet(&self, x: &[f64]) -> Result<Jet> {
        let d = self.dim;
        let frame = self.surface().local_frame(x);
        let g = self.profile.eval(frame.signed_distance);
        let mut a = vec![0.0; d];
        self.alpha_field(x, &mut a)?;
        let (h1, h2) = self.steps(x);
        let mut da = vec![0.0; d * d];
        let mut probe = x.to_vec();
        let mut fwd = vec![0.0; d];
        let mut bwd = vec![0.0; d];
        for j in 0..d {
            probe[j] = x[j] + h1;
            self.alpha_field(&probe, &mut fwd)?;
            probe[j] = x[j] - h1;
            self.alpha_field(&probe, &mut bwd)?;
            probe[j] = x[j];
            for k in 0..d {
                da[k * d + j] = (fwd[k] - bwd[k]) / (2.0 * h1);
            }
        }
        Ok(Jet { frame, g, a, da, second_step: h2 })
    }

    /// Second directional derivative `a''(x)[u, u]` by central differences.
    fn alpha_second(&self, x: &[f64], jet: &Jet, u: &[f64], out: &mut [f64]) -> Result<()> {
        let len = norm(u);
        if len == 0.0 {
            out.iter_mut().for_each(|v| *v = 0.0);
            return Ok(());
        }
        let t = jet.second_step / len;
        let d = self.dim;
        let fwd_pt: Vec<f64> = x.iter().zip(u).map(|(a, b)| a + t * b).collect();
        let bwd_pt: Vec<f64> = x.iter().zip(u).map(|(a, b)| a - t * b).collect();
        let mut fwd = vec![0.0; d];
        let mut bwd = vec![0.0; d];
        self.alpha_field(&fwd_pt, &mut fwd)?;
        self.alpha_field(&bwd_pt, &mut bwd)?;
        for k in 0..d {
            out[k] = (fwd[k] - 2.0 * jet.a[k] + bwd[k]) / (t * t);
        }
        Ok(())
    }

    /// `G(x)`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if !self.in_support(x) {
            return Ok(x.to_vec());
        }
        let phi = self.phi_tilde(x);
        let mut a = vec![0.0; self.dim];
        self.alpha_field(x, &mut a)?;
        Ok(x.iter().zip(&a).map(|(xi, ai)| xi + phi * ai).collect())
    }

    fn jacobian_from(&self, jet: &Jet) -> Matrix {
        let d = self.dim;
        let mut m = Matrix::identity(d);
        let n = &jet.frame.normal;
        for k in 0..d {
            for (j, nj) in n.iter().enumerate() {
                let v = m.get(k, j) + jet.a[k] * jet.g.d1 * nj + jet.g.value * jet.da[k * d + j];
                m.set(k, j, v);
            }
        }
        m
    }

    /// `G'(x)`.
    pub fn jacobian(&self, x: &[f64]) -> Result<Matrix> {
        if !self.in_support(x) {
            return Ok(Matrix::identity(self.dim));
        }
        let jet = self.jet(x)?;
        Ok(self.jacobian_from(&jet))
    }

    /// `G''(x)[v, w]`, componentwise. On the surface itself the positive-side
    /// limit is used.
    pub fn hessian_apply(&self, x: &[f64], v: &[f64], w: &[f64]) -> Result<Vec<f64>> {
        let d = self.dim;
        if !self.in_support(x) {
            return Ok(vec![0.0; d]);
        }
        let jet = self.jet(x)?;
        let mut out = self.hessian_first_order_terms(&jet, v, w);
        if jet.g.value != 0.0 {
            // Polarization keeps the form symmetric in (v, w) bit for bit.
            let sum: Vec<f64> = v.iter().zip(w).map(|(a, b)| a + b).collect();
            let diff: Vec<f64> = v.iter().zip(w).map(|(a, b)| a - b).collect();
            let mut q_sum = vec![0.0; d];
            let mut q_diff = vec![0.0; d];
            self.alpha_second(x, &jet, &sum, &mut q_sum)?;
            self.alpha_second(x, &jet, &diff, &mut q_diff)?;
            for k in 0..d {
                out[k] += jet.g.value * 0.25 * (q_sum[k] - q_diff[k]);
            }
        }
        Ok(out)
    }

    /// `G''(x)[u, u]`.
    fn hessian_quadratic(&self, x: &[f64], jet: &Jet, u: &[f64]) -> Result<Vec<f64>> {
        let mut out = self.hessian_first_order_terms(jet, u, u);
        if jet.g.value != 0.0 {
            let mut q = vec![0.0; self.dim];
            self.alpha_second(x, jet, u, &mut q)?;
            out.iter_mut().zip(&q).for_each(|(o, qk)| *o += jet.g.value * qk);
        }
        Ok(out)
    }

    /// Every term of `G''[v, w]` except `g(D) a''[v, w]`.
    fn hessian_first_order_terms(&self, jet: &Jet, v: &[f64], w: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let n = &jet.frame.normal;
        let (nv, nw) = (dot(n, v), dot(n, w));
        let radial = jet.g.d2 * nv * nw + jet.g.d1 * jet.frame.distance_hessian_form(v, w);
        let mut da_v = vec![0.0; d];
        let mut da_w = vec![0.0; d];
        mul_vec_into(&jet.da, d, v, &mut da_v);
        mul_vec_into(&jet.da, d, w, &mut da_w);
        (0..d).map(|k| jet.a[k] * radial + jet.g.d1 * (nv * da_w[k] + nw * da_v[k])).collect()
    }

    /// `G^{-1}(y)` by the fixed-point iteration `z <- y - phi~(z) a(z)`,
    /// started at `z = y`.
    pub fn inverse(&self, y: &[f64]) -> Result<Vec<f64>> {
        let d = self.dim;
        let mut z = y.to_vec();
        if self.is_identity() {
            return Ok(z);
        }
        let mut next = vec![0.0; d];
        let mut a = vec![0.0; d];
        let mut last_step = f64::INFINITY;
        for _ in 0..self.params.inversion_max_iter {
            if self.in_support(&z) {
                let phi = self.phi_tilde(&z);
                self.alpha_field(&z, &mut a)?;
                for k in 0..d {
                    next[k] = y[k] - phi * a[k];
                }
            } else {
                next.copy_from_slice(y);
            }
            last_step = next.iter().zip(&z).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
            std::mem::swap(&mut z, &mut next);
            if last_step < self.params.inversion_tol {
                return Ok(z);
            }
        }
        Err(Error::InversionFailed { iterations: self.params.inversion_max_iter, last_step })
    }

    /// Sampled maximum of the spectral norm of the Jacobian of
    /// `x -> phi~(x) a(x)` over `samples` points of the bump support.
    pub fn max_perturbation_norm(&self, region: &SampleBox, samples: usize, seed: u64) -> Result<f64> {
        if self.is_identity() {
            return Ok(0.0);
        }
        let d = self.dim;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = self.params.c;
        let mut worst: f64 = 0.0;
        for x in region.tube_points(self.surface(), c, samples, &mut rng) {
            if !self.in_support(&x) {
                continue;
            }
            let jet = self.jet(&x)?;
            let mut m = self.jacobian_from(&jet);
            for i in 0..d {
                m.set(i, i, m.get(i, i) - 1.0);
            }
            worst = worst.max(spectral_norm(m.as_slice(), d));
        }
        Ok(worst)
    }
}

/// Largest `c` in `{eps0 2^-j}` whose sampled perturbation Jacobian norm stays
/// within [`CONTRACTION_BOUND`], so the inverse iteration contracts.
pub fn choose_c(
    drift: &PiecewiseDrift,
    coeffs: &CoefficientSet,
    eps0: f64,
    region: &SampleBox,
    seed: u64,
) -> Result<f64> {
    if drift.is_continuous() {
        return Ok(eps0);
    }
    for j in 0..=CHOOSE_C_HALVINGS {
        let c = eps0 * 0.5f64.powi(j as i32);
        let t = Transform::new(drift.clone(), coeffs, TransformParams::new(c, eps0))?;
        if t.max_perturbation_norm(region, CHOOSE_C_SAMPLES, seed)? <= CONTRACTION_BOUND {
            return Ok(c);
        }
    }
    Err(Error::SearchExhausted)
}

/// Coefficients `(mu~, sigma~)` of `Z = G(X)`.
#[derive(Clone)]
pub struct TransformedCoefficients {
    transform: Arc<Transform>,
    base: CoefficientSet,
}

impl TransformedCoefficients {
    pub fn new(transform: Arc<Transform>, base: CoefficientSet) -> Self {
        TransformedCoefficients { transform, base }
    }

    pub fn transform(&self) -> &Transform {
        &self.transform
    }

    pub fn base(&self) -> &CoefficientSet {
        &self.base
    }

    pub fn drift_at(&self, z: &[f64]) -> Result<Vec<f64>> {
        let d = self.dim();
        let (mut mu, mut sigma) = (vec![0.0; d], vec![0.0; d * d]);
        self.evaluate(z, &mut mu, &mut sigma)?;
        Ok(mu)
    }

    pub fn diffusion_at(&self, z: &[f64]) -> Result<Matrix> {
        let d = self.dim();
        let (mut mu, mut sigma) = (vec![0.0; d], vec![0.0; d * d]);
        self.evaluate(z, &mut mu, &mut sigma)?;
        Matrix::from_row_major(d, sigma)
    }
}

impl Coefficients for TransformedCoefficients {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn evaluate(&self, z: &[f64], drift: &mut [f64], diffusion: &mut [f64]) -> Result<()> {
        let t = &self.transform;
        let x = t.inverse(z)?;
        self.base.evaluate(&x, drift, diffusion)?;
        if !t.in_support(&x) {
            return Ok(());
        }
        let d = t.dim;
        let jet = t.jet(&x)?;
        let jac = t.jacobian_from(&jet);
        let mu = drift.to_vec();
        mul_vec_into(jac.as_slice(), d, &mu, drift);
        let sigma = diffusion.to_vec();
        let mut column = vec![0.0; d];
        for l in 0..d {
            for (r, c) in column.iter_mut().enumerate() {
                *c = sigma[r * d + l];
            }
            if column.iter().all(|&v| v == 0.0) {
                continue;
            }
            let correction = t.hessian_quadratic(&x, &jet, &column)?;
            drift.iter_mut().zip(&correction).for_each(|(m, h)| *m += 0.5 * h);
        }
        for r in 0..d {
            for c in 0..d {
                diffusion[r * d + c] = (0..d).map(|k| jac.get(r, k) * sigma[k * d + c]).sum();
            }
        }
        Ok(())
    }
}

/// Checks that a point is on the surface to [`SURFACE_TOL`].
pub fn on_surface(surface: &Hypersurface, xi: &[f64]) -> bool {
    surface.distance(xi) <= SURFACE_TOL
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;
    use rand::Rng;

    #[test]
    fn bump_examples() {
        assert_eq!(bump(0.0), 1.0);
        assert_eq!(bump(1.0), 0.0);
        assert_eq!(bump(-1.0), 0.0);
        assert_eq!(bump(0.5), 0.421875);
        assert_eq!(bump(1.5), 0.0);
        for i in -30..=30 {
            let u = i as f64 / 10.0;
            assert!((0.0..=1.0).contains(&bump(u)));
            if u.abs() <= 1.0 {
                assert!((bump(u) - (1.0 + u).powi(3) * (1.0 - u).powi(3)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn profile_derivatives_match_differences() {
        let p = BumpProfile::new(0.7);
        let h = 1e-6;
        for i in 1..100 {
            let s = -0.75 + 1.5 * i as f64 / 100.0;
            if s.abs() < 2.0 * h {
                continue;
            }
            let v = p.eval(s);
            let d1 = (p.eval(s + h).value - p.eval(s - h).value) / (2.0 * h);
            let d2 = (p.eval(s + h).d1 - p.eval(s - h).d1) / (2.0 * h);
            assert!((v.d1 - d1).abs() < 1e-8, "s={s}");
            assert!((v.d2 - d2).abs() < 1e-7, "s={s}");
        }
        // g'' jumps by 4 across zero, g' is continuous.
        assert_eq!(p.eval(0.0).d2, 2.0);
        assert_eq!(p.eval(-1e-300).d2, -2.0);
        assert_eq!(p.eval(0.0).d1, 0.0);
    }

    #[test]
    fn phi_tilde_examples() {
        let plane = Hypersurface::hyperplane(vec![1.0, 0.0], 0.0).unwrap();
        assert_eq!(phi_tilde(&plane, 1.0, &[0.0, 3.0]), 0.0);
        assert_eq!(phi_tilde(&plane, 1.0, &[1.0, 3.0]), 0.0);
        assert_eq!(phi_tilde(&plane, 1.0, &[2.5, 3.0]), 0.0);
        assert_eq!(phi_tilde(&plane, 1.0, &[0.5, 0.0]), 0.5 * 0.5 * 0.421875);
        assert_eq!(phi_tilde(&plane, 1.0, &[-0.5, 0.0]), -0.10546875);
        let c = 0.3;
        for i in 0..50 {
            let x = [-0.4 + 0.8 * i as f64 / 50.0, 1.0];
            assert!(phi_tilde(&plane, c, &x).abs() <= c * c);
        }
    }

    #[test]
    fn alpha_examples() {
        let step = models::step_function_model();
        for y in [-3.0, 0.0, 2.5] {
            let a = alpha(&step.drift, &step.coefficients, &[0.0, y]).unwrap();
            assert_eq!(a, vec![-3.0, 0.0]);
        }

        let circle = models::unit_circle_model();
        let a = alpha(&circle.drift, &circle.coefficients, &[1.0, 0.0]).unwrap();
        assert!((a[0] + 1.0).abs() < 1e-15 && (a[1] + 0.5).abs() < 1e-15, "{a:?}");

        let smooth = models::brownian_model(2);
        assert_eq!(alpha(&smooth.drift, &smooth.coefficients, &[0.0, 1.0]).unwrap(), vec![0.0, 0.0]);

        // Black-box limits agree with the piece evaluation.
        let field = step.drift.as_field();
        let lim = alpha_from_limits(&field, &step.coefficients, step.drift.surface(), &[0.0, 0.4], LIMIT_STEP).unwrap();
        assert_eq!(lim, vec![-3.0, 0.0]);

        assert!(matches!(alpha(&step.drift, &step.coefficients, &[0.2, 0.0]), Err(Error::OffSurface { .. })));
        let broken = models::tangential_noise_model();
        assert!(matches!(
            alpha(&broken.drift, &broken.coefficients, &[0.0, 0.0]),
            Err(Error::DegenerateDiffusion { .. })
        ));
    }

    fn step_transform(c: f64) -> Transform {
        let m = models::step_function_model();
        Transform::new(m.drift.clone(), &m.coefficients, TransformParams::new(c, 1.0)).unwrap()
    }

    #[test]
    fn g_examples() {
        let t = step_transform(0.5);
        assert_eq!(t.apply(&[0.5, 1.0]).unwrap(), vec![0.5, 1.0]);
        assert_eq!(t.apply(&[-2.0, 1.0]).unwrap(), vec![-2.0, 1.0]);
        assert_eq!(t.apply(&[0.0, 7.0]).unwrap(), vec![0.0, 7.0]);
        let g = t.apply(&[0.1, 0.0]).unwrap();
        let expected = 0.1 - 3.0 * 0.01 * 0.884736;
        assert!((g[0] - expected).abs() < 1e-15 && g[1] == 0.0, "{g:?}");
    }

    #[test]
    fn g_is_continuous_at_the_support_edge() {
        let t = step_transform(0.25);
        for y in [-1.0, 0.0, 3.0] {
            for side in [-1.0, 1.0] {
                let inner = t.apply(&[side * (0.25 - 1e-8), y]).unwrap();
                let outer = t.apply(&[side * (0.25 + 1e-8), y]).unwrap();
                assert!(crate::linalg::distance(&inner, &outer) < 1e-6);
            }
        }
    }

    #[test]
    fn identity_branches() {
        let t = step_transform(0.25);
        assert_eq!(t.jacobian(&[0.3, 0.0]).unwrap(), Matrix::identity(2));
        assert_eq!(t.hessian_apply(&[0.3, 0.0], &[1.0, 0.0], &[0.0, 1.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(t.inverse(&[0.9, -4.0]).unwrap(), vec![0.9, -4.0]);
        assert_eq!(t.inverse(&[0.0, 2.0]).unwrap(), vec![0.0, 2.0]);
    }

    fn close_tube_points(model: &models::ModelSpec, width: f64, n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        model.sample_box.tube_points(model.drift.surface(), width, n, &mut rng)
    }

    #[test]
    fn jacobian_matches_central_differences() {
        for model in [models::step_function_model(), models::unit_circle_model(), models::dividend_model_default()] {
            let t = model.transform().unwrap();
            let c = t.params().c;
            let surface = t.surface().clone();
            let h = 1e-6;
            for x in close_tube_points(&model, c, 300, 5) {
                if surface.distance(&x) < 1e-4 {
                    continue;
                }
                let jac = t.jacobian(&x).unwrap();
                for j in 0..t.dim() {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[j] += h;
                    xm[j] -= h;
                    let (gp, gm) = (t.apply(&xp).unwrap(), t.apply(&xm).unwrap());
                    for k in 0..t.dim() {
                        let fd = (gp[k] - gm[k]) / (2.0 * h);
                        assert!((jac.get(k, j) - fd).abs() < 1e-6, "{} at {x:?}", model.name);
                    }
                }
            }
        }
    }

    #[test]
    fn hessian_is_symmetric_and_matches_jacobian_differences() {
        let model = models::unit_circle_model();
        let t = model.transform().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h = 1e-5;
        for x in close_tube_points(&model, t.params().c, 100, 3) {
            if t.surface().distance(&x) < 1e-3 {
                continue;
            }
            let v: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
            let w: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
            let hvw = t.hessian_apply(&x, &v, &w).unwrap();
            let hwv = t.hessian_apply(&x, &w, &v).unwrap();
            for k in 0..2 {
                assert!((hvw[k] - hwv[k]).abs() < 1e-8);
            }
            // d/ds G'(x + s w) v at s = 0.
            let xp: Vec<f64> = x.iter().zip(&w).map(|(a, b)| a + h * b).collect();
            let xm: Vec<f64> = x.iter().zip(&w).map(|(a, b)| a - h * b).collect();
            let jp = t.jacobian(&xp).unwrap().mul_vec(&v);
            let jm = t.jacobian(&xm).unwrap().mul_vec(&v);
            for k in 0..2 {
                let fd = (jp[k] - jm[k]) / (2.0 * h);
                assert!((hvw[k] - fd).abs() < 1e-4, "{k}: {} vs {fd} at {x:?}", hvw[k]);
            }
        }
    }

    #[test]
    fn inverse_round_trips() {
        for model in [models::step_function_model(), models::unit_circle_model()] {
            let t = model.transform().unwrap();
            let eps0 = t.params().eps0;
            for x in close_tube_points(&model, 2.0 * eps0, 2000, 17) {
                let back = t.inverse(&t.apply(&x).unwrap()).unwrap();
                assert!(crate::linalg::distance(&back, &x) < 1e-10, "{}", model.name);
                let fwd = t.apply(&t.inverse(&x).unwrap()).unwrap();
                assert!(crate::linalg::distance(&fwd, &x) < 1e-10, "{}", model.name);
            }
        }
    }

    #[test]
    fn inverse_reports_non_convergence() {
        let m = models::step_function_model();
        let mut params = TransformParams::new(1.0, 1.0);
        params.inversion_max_iter = 2;
        let t = Transform::new(m.drift.clone(), &m.coefficients, params).unwrap();
        assert!(matches!(t.inverse(&[0.4, 0.0]), Err(Error::InversionFailed { .. })));
    }

    #[test]
    fn params_are_validated() {
        let m = models::unit_circle_model();
        let bad = |p: TransformParams| Transform::new(m.drift.clone(), &m.coefficients, p).is_err();
        assert!(bad(TransformParams::new(0.6, 0.5)));
        assert!(bad(TransformParams::new(0.5, 1.0)));
        let mut p = TransformParams::new(0.1, 0.5);
        p.inversion_tol = 1e-16;
        assert!(bad(p));
    }

    #[test]
    fn choose_c_examples() {
        let smooth = models::brownian_model(2);
        assert_eq!(choose_c(&smooth.drift, &smooth.coefficients, 0.75, &smooth.sample_box, 1).unwrap(), 0.75);

        let m = models::step_function_model();
        let c = choose_c(&m.drift, &m.coefficients, 1.0, &m.sample_box, 1).unwrap();
        assert!(c > 0.0 && c <= 1.0);
        let t = Transform::new(m.drift.clone(), &m.coefficients, TransformParams::new(c, 1.0)).unwrap();
        for x in close_tube_points(&m, 2.0, 1000, 4) {
            let back = t.inverse(&t.apply(&x).unwrap()).unwrap();
            assert!(crate::linalg::distance(&back, &x) < 1e-10);
        }
        // The next larger scale was rejected for a reason.
        if c < 1.0 {
            let bigger = Transform::new(m.drift.clone(), &m.coefficients, TransformParams::new(2.0 * c, 1.0)).unwrap();
            assert!(bigger.max_perturbation_norm(&m.sample_box, 1000, 1).unwrap() > CONTRACTION_BOUND);
        }
    }

    #[test]
    fn transformed_coefficients_reduce_to_base_away_from_surface() {
        let m = models::step_function_model();
        let t = Arc::new(m.transform().unwrap());
        let tc = TransformedCoefficients::new(t, m.coefficients.clone());
        for z in [[2.0, 1.0], [-3.0, 0.5]] {
            assert_eq!(tc.drift_at(&z).unwrap(), m.coefficients.drift_at(&z));
            assert_eq!(tc.diffusion_at(&z).unwrap(), m.coefficients.diffusion_at(&z));
        }

        let smooth = models::linear_ode_model();
        let t = Arc::new(smooth.transform().unwrap());
        let tc = TransformedCoefficients::new(t, smooth.coefficients.clone());
        for z in [[0.0, 0.0], [0.01, -0.3], [1.0, 2.0]] {
            assert_eq!(tc.drift_at(&z).unwrap(), smooth.coefficients.drift_at(&z));
        }
    }

    #[test]
    fn transformed_drift_has_no_jump_for_step_model() {
        let m = models::step_function_model();
        let t = Arc::new(m.transform().unwrap());
        let tc = TransformedCoefficients::new(t, m.coefficients.clone());
        for h in [1e-3, 1e-4, 1e-5, 1e-6] {
            let plus = tc.drift_at(&[h, 0.0]).unwrap();
            let minus = tc.drift_at(&[-h, 0.0]).unwrap();
            let q = crate::linalg::distance(&plus, &minus) / (2.0 * h);
            assert!(q < 100.0, "h={h}: quotient {q}");
            let raw =
                crate::linalg::distance(&m.coefficients.drift_at(&[h, 0.0]), &m.coefficients.drift_at(&[-h, 0.0]));
            assert_eq!(raw, 6.0);
        }
    }
}
