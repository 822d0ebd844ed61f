//! Concrete SDEs with a drift discontinuous along a hypersurface, plus a few
//! smooth reference models with known behaviour.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{Hypersurface, SampleBox};
use crate::linalg::{norm, transpose_mul_vec_into};
use crate::solver::{CoefficientSet, MatrixField, SchemeKind, Simulator, VectorField};
use crate::transform::{choose_c, BumpProfile, PiecewiseDrift, Transform, TransformParams, DEFAULT_C0_MIN};

/// Seed of the sample used to pick the bump scale.
pub const CHOOSE_C_SEED: u64 = 0x6d6f_6465_6c73;

/// Names accepted by [`by_name`].
pub const MODEL_NAMES: [&str; 9] =
    ["step", "circle", "dividend", "prescribed", "brownian", "linear-ode", "pinned", "parallel", "tangential"];

#[derive(Clone, Debug)]
pub struct ModelSpec {
    pub name: String,
    pub drift: PiecewiseDrift,
    pub coefficients: CoefficientSet,
    pub x0: Vec<f64>,
    pub horizon: f64,
    /// Tube width; already capped at half the reach.
    pub eps0: f64,
    /// Fixed bump scale; `None` means [`choose_c`] picks it.
    pub bump_scale: Option<f64>,
    pub sample_box: SampleBox,
}

impl ModelSpec {
    #[allow(clippy::too_many_arguments)]
    fn build(
        name: &str,
        drift: PiecewiseDrift,
        diffusion: MatrixField,
        sup_drift: f64,
        sup_diffusion: f64,
        x0: Vec<f64>,
        eps0: f64,
        sample_box: SampleBox,
    ) -> Self {
        let dim = x0.len();
        let eps0 = eps0.min(drift.surface().reach() / 2.0);
        let coefficients = CoefficientSet::new(dim, drift.as_field(), diffusion, sup_drift, sup_diffusion);
        ModelSpec { name: name.to_string(), drift, coefficients, x0, horizon: 1.0, eps0, bump_scale: None, sample_box }
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    pub fn surface(&self) -> &Hypersurface {
        self.drift.surface()
    }

    pub fn transform_params(&self) -> Result<TransformParams> {
        let c = match self.bump_scale {
            Some(c) => c,
            None => choose_c(&self.drift, &self.coefficients, self.eps0, &self.sample_box, CHOOSE_C_SEED)?,
        };
        Ok(TransformParams::new(c, self.eps0))
    }

    pub fn transform(&self) -> Result<Transform> {
        Transform::new(self.drift.clone(), &self.coefficients, self.transform_params()?)
    }

    pub fn simulator(&self, kind: SchemeKind) -> Result<Simulator> {
        let transform = match kind {
            SchemeKind::EulerMaruyama => None,
            SchemeKind::Transformed => Some(Arc::new(self.transform()?)),
        };
        Simulator::new(kind, self.coefficients.clone(), transform, self.x0.clone(), self.horizon)
    }
}

fn field(f: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static) -> VectorField {
    Arc::new(f)
}

fn identity_diffusion(dim: usize) -> MatrixField {
    Arc::new(move |_, out: &mut [f64]| {
        out.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..dim {
            out[i * dim + i] = 1.0;
        }
    })
}

fn zero_field() -> VectorField {
    Arc::new(|_, out: &mut [f64]| out.iter_mut().for_each(|v| *v = 0.0))
}

fn first_axis_plane(dim: usize) -> Hypersurface {
    let mut a = vec![0.0; dim];
    a[0] = 1.0;
    Hypersurface::hyperplane(a, 0.0).expect("unit normal")
}

/// `mu = (3 sgn(x1), 1)` with `sgn(0) = 1`, `sigma = I`, `Θ = {x1 = 0}`.
pub fn step_function_model() -> ModelSpec {
    let surface = first_axis_plane(2);
    let drift = PiecewiseDrift::new(
        surface,
        field(|_, out| {
            out[0] = -3.0;
            out[1] = 1.0;
        }),
        field(|_, out| {
            out[0] = 3.0;
            out[1] = 1.0;
        }),
    );
    let boxed = SampleBox::new(vec![-1.0, -1.0], vec![1.0, 3.0]).expect("valid box");
    ModelSpec::build("step", drift, identity_diffusion(2), 10f64.sqrt(), 1.0, vec![0.1, 0.0], 1.0, boxed)
}

/// Drift `(1, 1)` on `|x| >= 1` and `(-x1, x2)` inside, rank-one diffusion
/// `2 / (1 + |x|^2) [[x1, 0], [x2, 0]]`, `Θ` the unit circle.
pub fn unit_circle_model() -> ModelSpec {
    let surface = Hypersurface::sphere(vec![0.0, 0.0], 1.0).expect("unit circle");
    let drift = PiecewiseDrift::new(
        surface,
        field(|x, out| {
            out[0] = -x[0];
            out[1] = x[1];
        }),
        field(|_, out| {
            out[0] = 1.0;
            out[1] = 1.0;
        }),
    );
    let diffusion: MatrixField = Arc::new(|x: &[f64], out: &mut [f64]| {
        let s = 2.0 / (1.0 + x[0] * x[0] + x[1] * x[1]);
        out[0] = s * x[0];
        out[1] = 0.0;
        out[2] = s * x[1];
        out[3] = 0.0;
    });
    let boxed = SampleBox::around(&[0.0, 0.0], 2.0);
    ModelSpec::build("circle", drift, diffusion, 2f64.sqrt(), 1.0, vec![1.2, 0.0], 0.5, boxed)
}

/// Parameters of the filtered dividend model. Indices are zero-based:
/// `theta[i]` is the drift of regime `i + 1`, `q[j * d + m]` the generator
/// entry from regime `j + 1` to `m + 1`, and `Θ = {x1 = f_offset + f_coeffs . (x2..xd)}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DividendParams {
    pub d: usize,
    pub u_bar: f64,
    pub beta: f64,
    pub theta: Vec<f64>,
    pub q: Vec<f64>,
    pub f_offset: f64,
    pub f_coeffs: Vec<f64>,
}

impl DividendParams {
    pub fn with_dim(d: usize) -> Self {
        DividendParams {
            d,
            u_bar: 1.0,
            beta: 0.3,
            theta: (1..=d).map(|i| i as f64 / 10.0).collect(),
            q: uniform_generator(d, 0.25),
            f_offset: 0.2,
            f_coeffs: vec![0.1; d.saturating_sub(1)],
        }
    }

    pub fn default_x0(&self) -> Vec<f64> {
        let mut x0 = vec![0.8 / (self.d - 1) as f64; self.d];
        x0[0] = 0.25;
        x0
    }

    fn validate(&self) -> Result<()> {
        let d = self.d;
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if d < 2 {
            return bad(format!("dividend model needs d >= 2, got {d}"));
        }
        if self.theta.len() != d || self.q.len() != d * d || self.f_coeffs.len() != d - 1 {
            return bad("theta, q and f coefficients do not match the dimension".into());
        }
        if !(self.beta != 0.0) || !self.beta.is_finite() {
            return bad("beta must be nonzero".into());
        }
        for j in 0..d {
            let row = &self.q[j * d..(j + 1) * d];
            if row.iter().sum::<f64>().abs() > 1e-12 {
                return bad(format!("generator row {} does not sum to zero", j + 1));
            }
        }
        Ok(())
    }
}

impl Default for DividendParams {
    fn default() -> Self {
        DividendParams::with_dim(5)
    }
}

/// Generator with constant off-diagonal `rate` and rows summing to zero.
pub fn uniform_generator(d: usize, rate: f64) -> Vec<f64> {
    let mut q = vec![rate; d * d];
    for i in 0..d {
        q[i * d + i] = -rate * (d - 1) as f64;
    }
    q
}

/// Filtered dividend model. The belief coordinates `x2..xd` enter the
/// coefficients clipped to `[0, 1]`; the discontinuity test uses `x` as is.
pub fn dividend_model(params: DividendParams) -> Result<ModelSpec> {
    params.validate()?;
    let d = params.d;
    let mut a = vec![1.0];
    a.extend(params.f_coeffs.iter().map(|c| -c));
    let surface = Hypersurface::hyperplane(a, params.f_offset)?;
    let p = Arc::new(params);

    let base = {
        let p = p.clone();
        move |x: &[f64], out: &mut [f64]| {
            let (th, q) = (&p.theta, &p.q);
            let last = (d - 1) * d;
            out[0] = th[d - 1] + (1..d).map(|i| (th[i - 1] - th[d - 1]) * x[i].clamp(0.0, 1.0)).sum::<f64>();
            for (m, slot) in out.iter_mut().enumerate().take(d).skip(1) {
                let col = m - 1;
                *slot = q[last + col]
                    + (1..d).map(|j| (q[(j - 1) * d + col] - q[last + col]) * x[j].clamp(0.0, 1.0)).sum::<f64>();
            }
        }
    };
    let negative = field(base.clone());
    let positive = {
        let u_bar = p.u_bar;
        field(move |x, out| {
            base(x, out);
            out[0] -= u_bar;
        })
    };
    let diffusion: MatrixField = {
        let p = p.clone();
        Arc::new(move |x: &[f64], out: &mut [f64]| {
            let th = &p.theta;
            out.iter_mut().for_each(|v| *v = 0.0);
            let mean: f64 = (1..d).map(|j| (th[j - 1] - th[d - 1]) * x[j].clamp(0.0, 1.0)).sum();
            out[0] = p.beta;
            for i in 1..d {
                out[i * d] = x[i].clamp(0.0, 1.0) * (th[i - 1] - th[d - 1] - mean) / p.beta;
            }
        })
    };

    let spread: f64 = (0..d - 1).map(|i| (p.theta[i] - p.theta[d - 1]).abs()).sum();
    let drift_first = p.theta[d - 1].abs() + spread + p.u_bar.abs();
    let last = (d - 1) * d;
    let drift_rest: f64 = (1..d)
        .map(|m| {
            let col = m - 1;
            let b =
                p.q[last + col].abs() + (1..d).map(|j| (p.q[(j - 1) * d + col] - p.q[last + col]).abs()).sum::<f64>();
            b * b
        })
        .sum();
    let sup_drift = (drift_first * drift_first + drift_rest).sqrt();
    let column: f64 =
        (1..d).map(|i| ((p.theta[i - 1] - p.theta[d - 1]).abs() + spread) / p.beta.abs()).map(|v| v * v).sum();
    let sup_diffusion = (p.beta * p.beta + column).sqrt();

    let drift = PiecewiseDrift::new(surface, negative, positive);
    let mut lower = vec![0.0; d];
    let mut upper = vec![0.25; d];
    lower[0] = -0.5;
    upper[0] = 1.0;
    let boxed = SampleBox::new(lower, upper)?;
    let spec = ModelSpec::build("dividend", drift, diffusion, sup_drift, sup_diffusion, p.default_x0(), 0.5, boxed);

    let mut rng = ChaCha8Rng::seed_from_u64(CHOOSE_C_SEED);
    let mut sigma = vec![0.0; d * d];
    let mut proj = vec![0.0; d];
    for xi in spec.sample_box.surface_points(spec.surface(), 1000, &mut rng) {
        let n = spec.surface().unit_normal(&xi)?;
        (spec.coefficients.diffusion_field())(&xi, &mut sigma);
        transpose_mul_vec_into(&sigma, d, &n, &mut proj);
        let value = norm(&proj);
        if value < DEFAULT_C0_MIN {
            return Err(Error::DegenerateDiffusion { value, threshold: DEFAULT_C0_MIN });
        }
    }
    Ok(spec)
}

pub fn dividend_model_default() -> ModelSpec {
    dividend_model(DividendParams::default()).expect("default dividend parameters are valid")
}

/// Bump scale of the prescribed one-dimensional transform `x + x|x| phi(10x)`.
pub const PRESCRIBED_SCALE: f64 = 0.1;

/// One-dimensional model whose transform is known in advance:
/// `mu = (G^{-1})''(G(x)) / 2 = -G''(x) / (2 G'(x)^3)` and
/// `sigma = (G^{-1})'(G(x)) = 1 / G'(x)` with `G(x) = x + x|x| phi(10x)`, so the
/// transformed equation is `dZ = dW`.
pub fn prescribed_transform_model() -> ModelSpec {
    let profile = BumpProfile::new(PRESCRIBED_SCALE);
    let piece = move |sign: f64| {
        field(move |x, out| {
            let g = profile.branch(x[0], sign);
            let gp = 1.0 + g.d1;
            out[0] = -0.5 * g.d2 / (gp * gp * gp);
        })
    };
    let diffusion: MatrixField = Arc::new(move |x: &[f64], out: &mut [f64]| {
        out[0] = 1.0 / (1.0 + profile.eval(x[0]).d1);
    });
    let drift = PiecewiseDrift::new(first_axis_plane(1), piece(-1.0), piece(1.0));

    // Tight sup bounds from a dense scan of the support.
    let (mut sup_mu, mut sup_sigma) = (0.0f64, 1.0f64);
    for i in 0..=20_000 {
        let s = -PRESCRIBED_SCALE + 2.0 * PRESCRIBED_SCALE * i as f64 / 20_000.0;
        let g = profile.eval(s);
        let gp = 1.0 + g.d1;
        sup_mu = sup_mu.max((0.5 * g.d2 / gp.powi(3)).abs());
        sup_sigma = sup_sigma.max(1.0 / gp);
    }
    let boxed = SampleBox::around(&[0.0], 0.3);
    let mut spec = ModelSpec::build(
        "prescribed",
        drift,
        diffusion,
        1.01 * sup_mu,
        1.01 * sup_sigma,
        vec![0.0],
        PRESCRIBED_SCALE,
        boxed,
    );
    spec.bump_scale = Some(PRESCRIBED_SCALE);
    spec
}

/// `dX = dW` in `dim` dimensions with `Θ = {x1 = 0}`, started on `Θ`.
pub fn brownian_model(dim: usize) -> ModelSpec {
    let drift = PiecewiseDrift::continuous(first_axis_plane(dim), zero_field());
    let boxed = SampleBox::around(&vec![0.0; dim], 2.0);
    ModelSpec::build("brownian", drift, identity_diffusion(dim), 0.0, 1.0, vec![0.0; dim], 1.0, boxed)
}

/// `dX = -X dt` in two dimensions.
pub fn linear_ode_model() -> ModelSpec {
    let drift = PiecewiseDrift::continuous(
        first_axis_plane(2),
        field(|x, out| {
            out[0] = -x[0];
            out[1] = -x[1];
        }),
    );
    let zero: MatrixField = Arc::new(|_, out: &mut [f64]| out.iter_mut().for_each(|v| *v = 0.0));
    let boxed = SampleBox::around(&[0.0, 0.0], 2.0);
    ModelSpec::build("linear-ode", drift, zero, 2f64.sqrt() * 2.0, 0.0, vec![1.0, 1.0], 1.0, boxed)
}

/// Zero coefficients, started on `Θ = {x1 = 0}`.
pub fn pinned_model(dim: usize) -> ModelSpec {
    let drift = PiecewiseDrift::continuous(first_axis_plane(dim), zero_field());
    let zero: MatrixField = Arc::new(|_, out: &mut [f64]| out.iter_mut().for_each(|v| *v = 0.0));
    let boxed = SampleBox::around(&vec![0.0; dim], 1.0);
    ModelSpec::build("pinned", drift, zero, 0.0, 0.0, vec![0.0; dim], 1.0, boxed)
}

/// Deterministic motion `dX = (0, 1) dt` from `(1, 0)`, parallel to `Θ = {x1 = 0}`.
pub fn parallel_motion_model() -> ModelSpec {
    let drift = PiecewiseDrift::continuous(
        first_axis_plane(2),
        field(|_, out| {
            out[0] = 0.0;
            out[1] = 1.0;
        }),
    );
    let zero: MatrixField = Arc::new(|_, out: &mut [f64]| out.iter_mut().for_each(|v| *v = 0.0));
    let boxed = SampleBox::new(vec![-2.0, -1.0], vec![2.0, 2.0]).expect("valid box");
    ModelSpec::build("parallel", drift, zero, 1.0, 0.0, vec![1.0, 0.0], 1.0, boxed)
}

/// Step drift across `Θ = {x1 = 0}` with noise only along `Θ`, so
/// `sigma^T n` vanishes on the surface.
pub fn tangential_noise_model() -> ModelSpec {
    let drift = PiecewiseDrift::new(
        first_axis_plane(2),
        field(|_, out| {
            out[0] = -1.0;
            out[1] = 0.0;
        }),
        field(|_, out| {
            out[0] = 1.0;
            out[1] = 0.0;
        }),
    );
    let diffusion: MatrixField = Arc::new(|_, out: &mut [f64]| {
        out.copy_from_slice(&[0.0, 0.0, 0.0, 1.0]);
    });
    let boxed = SampleBox::around(&[0.0, 0.0], 1.0);
    ModelSpec::build("tangential", drift, diffusion, 1.0, 1.0, vec![0.1, 0.0], 1.0, boxed)
}

fn parse_real(key: &str, value: &str) -> Result<f64> {
    value
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::InvalidArgument(format!("parameter {key}: '{value}' is not a finite number")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value.split(',').map(|v| parse_real(key, v)).collect()
}

/// Builds a model by name. `overrides` holds `param.*` keys with the prefix
/// stripped: `eps0` and `c` for every model, and for `dividend` also `d`,
/// `u_bar`, `beta`, `theta`, `q_rate`, `f_offset`, `f_coeffs`.
pub fn by_name(name: &str, overrides: &BTreeMap<String, String>) -> Result<ModelSpec> {
    let mut used: Vec<&str> = Vec::new();
    let mut spec = match name {
        "step" | "step-function" => step_function_model(),
        "circle" | "unit-circle" => unit_circle_model(),
        "prescribed" => prescribed_transform_model(),
        "brownian" => brownian_model(1),
        "linear-ode" => linear_ode_model(),
        "pinned" => pinned_model(2),
        "parallel" => parallel_motion_model(),
        "tangential" => tangential_noise_model(),
        "dividend" => {
            let d = match overrides.get("d") {
                Some(v) => v
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidArgument(format!("parameter d: '{v}' is not an integer")))?,
                None => 5,
            };
            let mut p = DividendParams::with_dim(d);
            used.push("d");
            for (key, value) in overrides {
                match key.as_str() {
                    "u_bar" => p.u_bar = parse_real(key, value)?,
                    "beta" => p.beta = parse_real(key, value)?,
                    "theta" => p.theta = parse_list(key, value)?,
                    "q_rate" => p.q = uniform_generator(d, parse_real(key, value)?),
                    "f_offset" => p.f_offset = parse_real(key, value)?,
                    "f_coeffs" => p.f_coeffs = parse_list(key, value)?,
                    _ => continue,
                }
                used.push(key);
            }
            dividend_model(p)?
        }
        other => return Err(Error::UnknownModel(other.to_string())),
    };
    for (key, value) in overrides {
        match key.as_str() {
            "eps0" => spec.eps0 = parse_real(key, value)?.min(spec.surface().reach() / 2.0),
            "c" => spec.bump_scale = Some(parse_real(key, value)?),
            k if used.contains(&k) => {}
            other => return Err(Error::InvalidArgument(format!("unknown parameter '{other}' for model {name}"))),
        }
    }
    Ok(spec)
}
