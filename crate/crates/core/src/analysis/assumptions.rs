//! Sampled checks of the standing assumptions on a model: bounded
//! coefficients, Lipschitz diffusion, piecewise Lipschitz drift,
//! non-parallelity of the diffusion to the surface, and a bounded `alpha`.
//! Smoothness of `alpha` beyond first differences is not checked.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{distance, norm, transpose_mul_vec_into};
use crate::models::ModelSpec;
use crate::transform::{alpha, DEFAULT_C0_MIN};

/// Pair separations for the Lipschitz probes. A jump shows up as a quotient
/// growing like `1 / h` down this list.
const PROBE_STEPS: [f64; 3] = [1e-2, 1e-4, 1e-6];
/// Allowed growth of the sampled quotient from the widest to the narrowest
/// separation.
const GROWTH_LIMIT: f64 = 10.0;
const BOUND_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct AssumptionItem {
    pub index: usize,
    pub name: &'static str,
    pub passed: bool,
    /// The headline measurement for the item.
    pub statistic: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssumptionReport {
    pub model: String,
    pub n_samples: usize,
    pub items: Vec<AssumptionItem>,
}

impl AssumptionReport {
    pub fn all_passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }

    pub fn item(&self, index: usize) -> Option<&AssumptionItem> {
        self.items.iter().find(|i| i.index == index)
    }

    /// Smallest sampled `|sigma(xi)^T n(xi)|`.
    pub fn min_non_parallelity(&self) -> f64 {
        self.item(4).map_or(f64::NAN, |i| i.statistic)
    }
}

impl fmt::Display for AssumptionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "model {} ({} samples)", self.model, self.n_samples)?;
        for item in &self.items {
            let tag = if item.passed { "pass" } else { "FAIL" };
            writeln!(f, "  [{tag}] {}. {}: {}", item.index, item.name, item.detail)?;
        }
        write!(f, "overall: {}", if self.all_passed() { "pass" } else { "FAIL" })
    }
}

fn unit_direction(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = norm(&v);
        if n > 1e-3 && n <= 1.0 {
            return v.into_iter().map(|c| c / n).collect();
        }
    }
}

/// Largest sampled difference quotient of `f` at each probe separation.
/// `same_side` restricts to pairs on one side of the surface.
fn lipschitz_profile(
    model: &ModelSpec,
    n: usize,
    rng: &mut ChaCha8Rng,
    same_side: bool,
    f: impl Fn(&[f64]) -> Vec<f64>,
) -> [f64; 3] {
    let d = model.dim();
    let mut worst = [0.0f64; 3];
    for _ in 0..n {
        let x = model.sample_box.sample(rng);
        let u = unit_direction(rng, d);
        let fx = f(&x);
        for (k, h) in PROBE_STEPS.iter().enumerate() {
            let y: Vec<f64> = x.iter().zip(&u).map(|(a, b)| a + h * b).collect();
            if same_side && model.drift.classify(&x) != model.drift.classify(&y) {
                continue;
            }
            worst[k] = worst[k].max(distance(&fx, &f(&y)) / distance(&x, &y));
        }
    }
    worst
}

fn profile_passes(q: &[f64; 3]) -> bool {
    q.iter().all(|v| v.is_finite()) && q[2] <= GROWTH_LIMIT * q[0].max(1.0)
}

fn profile_detail(q: &[f64; 3]) -> String {
    format!("max quotient {:.4e} / {:.4e} / {:.4e} at h = 1e-2 / 1e-4 / 1e-6", q[0], q[1], q[2])
}

/// Runs every check on `n_samples` points of the model's sample box (and as
/// many surface points). Failures are reported, never raised.
pub fn check_assumptions(model: &ModelSpec, n_samples: usize, seed: u64) -> AssumptionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs = &model.coefficients;
    let d = model.dim();
    let mut items = Vec::with_capacity(5);

    let (mut drift_max, mut diff_max) = (0.0f64, 0.0f64);
    let mut finite = true;
    for _ in 0..n_samples {
        let x = model.sample_box.sample(&mut rng);
        let mu = coeffs.drift_at(&x);
        let sigma = coeffs.diffusion_at(&x);
        finite &= mu.iter().chain(sigma.as_slice()).all(|v| v.is_finite());
        drift_max = drift_max.max(norm(&mu));
        diff_max = diff_max.max(sigma.spectral_norm());
    }
    items.push(AssumptionItem {
        index: 1,
        name: "bounded coefficients",
        passed: finite && drift_max <= coeffs.sup_drift + BOUND_SLACK && diff_max <= coeffs.sup_diffusion + BOUND_SLACK,
        statistic: drift_max.max(diff_max),
        detail: format!(
            "sampled |mu| {drift_max:.4e} <= {:.4e}, |sigma| {diff_max:.4e} <= {:.4e}",
            coeffs.sup_drift, coeffs.sup_diffusion
        ),
    });

    let sigma_q = lipschitz_profile(model, n_samples, &mut rng, false, |x| coeffs.diffusion_at(x).as_slice().to_vec());
    items.push(AssumptionItem {
        index: 2,
        name: "Lipschitz diffusion",
        passed: profile_passes(&sigma_q),
        statistic: sigma_q[2],
        detail: profile_detail(&sigma_q),
    });

    let mu_q = lipschitz_profile(model, n_samples, &mut rng, true, |x| coeffs.drift_at(x));
    items.push(AssumptionItem {
        index: 3,
        name: "piecewise Lipschitz drift",
        passed: profile_passes(&mu_q),
        statistic: mu_q[2],
        detail: profile_detail(&mu_q),
    });

    let surface = model.surface();
    let points = model.sample_box.surface_points(surface, n_samples, &mut rng);
    let mut min_np = f64::INFINITY;
    let mut proj = vec![0.0; d];
    for xi in &points {
        let Ok(n) = surface.unit_normal(xi) else { continue };
        let sigma = coeffs.diffusion_at(xi);
        transpose_mul_vec_into(sigma.as_slice(), d, &n, &mut proj);
        min_np = min_np.min(norm(&proj));
    }
    items.push(AssumptionItem {
        index: 4,
        name: "non-parallelity",
        passed: min_np >= DEFAULT_C0_MIN,
        statistic: min_np,
        detail: format!("min |sigma^T n| over {} surface points = {min_np:.12e}", points.len()),
    });

    let mut alpha_max = 0.0f64;
    let mut alpha_q = 0.0f64;
    let mut alpha_ok = true;
    for xi in &points {
        let Ok(a) = alpha(&model.drift, coeffs, xi) else {
            alpha_ok = false;
            break;
        };
        alpha_max = alpha_max.max(norm(&a));
        let nudged: Vec<f64> = xi.iter().zip(unit_direction(&mut rng, d)).map(|(a, b)| a + 1e-3 * b).collect();
        let Some(other) = surface.nearest_surface_point(&nudged) else { continue };
        let sep = distance(xi, &other);
        if sep == 0.0 {
            continue;
        }
        match alpha(&model.drift, coeffs, &other) {
            Ok(b) => alpha_q = alpha_q.max(distance(&a, &b) / sep),
            Err(_) => alpha_ok = false,
        }
    }
    items.push(AssumptionItem {
        index: 5,
        name: "bounded alpha (first differences only)",
        passed: alpha_ok && alpha_max.is_finite() && alpha_q.is_finite(),
        statistic: alpha_max,
        detail: if alpha_ok {
            format!("max |alpha| {alpha_max:.4e}, max surface difference quotient {alpha_q:.4e}")
        } else {
            "alpha undefined at a sampled surface point".to_string()
        },
    });

    AssumptionReport { model: model.name.clone(), n_samples, items }
}
