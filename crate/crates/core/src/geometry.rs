//! Closed-form hypersurfaces: affine hyperplanes and spheres.
//!
//! Each surface knows its closest-point map `p`, a fixed unit normal `n`, the
//! signed distance `D(x) = n(p(x))^T (x - p(x))` and its reach. The normal of a
//! hyperplane is `a / |a|`; the normal of a sphere points outward.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{distance, dot, norm};

/// Points farther than this from the level set are not "on" the surface.
pub const SURFACE_TOL: f64 = 1e-10;

/// Which side of the oriented surface a point lies on. Points on the surface
/// count as `Positive`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Negative,
    Positive,
}

#[derive(Clone, Debug, PartialEq)]
enum Shape {
    /// `{x : normal . x = offset}` with `|normal| = 1`.
    Hyperplane {
        normal: Vec<f64>,
        offset: f64,
    },
    Sphere {
        center: Vec<f64>,
        radius: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Hypersurface {
    shape: Shape,
    /// `f64::INFINITY` for hyperplanes.
    reach: f64,
}

impl Hypersurface {
    /// The hyperplane `{x : a . x = b}`.
    pub fn hyperplane(a: Vec<f64>, b: f64) -> Result<Self> {
        let len = norm(&a);
        if a.is_empty() || !(len > 0.0) || !len.is_finite() || !b.is_finite() {
            return Err(Error::InvalidArgument("hyperplane needs a finite, nonzero normal and finite offset".into()));
        }
        let normal = a.iter().map(|v| v / len).collect();
        Ok(Hypersurface { shape: Shape::Hyperplane { normal, offset: b / len }, reach: f64::INFINITY })
    }

    pub fn sphere(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("sphere center must be finite".into()));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidArgument(format!("sphere radius must be positive, got {radius}")));
        }
        Ok(Hypersurface { shape: Shape::Sphere { center, radius }, reach: radius })
    }

    pub fn dim(&self) -> usize {
        match &self.shape {
            Shape::Hyperplane { normal, .. } => normal.len(),
            Shape::Sphere { center, .. } => center.len(),
        }
    }

    /// Reach of the surface; `f64::INFINITY` means unbounded.
    pub fn reach(&self) -> f64 {
        self.reach
    }

    pub fn is_hyperplane(&self) -> bool {
        matches!(self.shape, Shape::Hyperplane { .. })
    }

    /// Unsigned Euclidean distance `d(x, Θ)`, defined everywhere.
    pub fn distance(&self, x: &[f64]) -> f64 {
        match &self.shape {
            Shape::Hyperplane { normal, offset } => (dot(normal, x) - offset).abs(),
            Shape::Sphere { center, radius } => (distance(x, center) - radius).abs(),
        }
    }

    /// Side classification by the sign of a global level function, so it is
    /// defined everywhere (including the sphere center) and costs no sqrt.
    pub fn side(&self, x: &[f64]) -> Side {
        let level = match &self.shape {
            Shape::Hyperplane { normal, offset } => dot(normal, x) - offset,
            Shape::Sphere { center, radius } => {
                x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>() - radius * radius
            }
        };
        if level >= 0.0 {
            Side::Positive
        } else {
            Side::Negative
        }
    }

    /// Outside a sphere the closest point is unique at any distance, so only
    /// the inner side is limited by the reach.
    fn check_reach(&self, x: &[f64]) -> Result<()> {
        let d = self.distance(x);
        let unique = match &self.shape {
            Shape::Hyperplane { .. } => true,
            Shape::Sphere { .. } => d < self.reach || self.side(x) == Side::Positive,
        };
        if unique {
            Ok(())
        } else {
            Err(Error::ReachViolation { distance: d, reach: self.reach })
        }
    }

    /// Closest point `p(x)`.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_reach(x)?;
        Ok(self.local_frame(x).foot)
    }

    /// Unit normal at a surface point.
    pub fn unit_normal(&self, xi: &[f64]) -> Result<Vec<f64>> {
        let residual = self.distance(xi);
        if residual > SURFACE_TOL {
            return Err(Error::OffSurface { residual });
        }
        Ok(self.local_frame(xi).normal)
    }

    pub fn signed_distance(&self, x: &[f64]) -> Result<f64> {
        self.check_reach(x)?;
        Ok(self.local_frame(x).signed_distance)
    }

    /// `d(x, Θ) < eps`; valid for every `x`, also beyond the reach.
    pub fn in_tube(&self, x: &[f64], eps: f64) -> bool {
        self.distance(x) < eps
    }

    /// Foot point, normal there, and signed distance in one pass. The caller
    /// guarantees `x` is inside the reach; for a sphere, `x` is not the center.
    pub(crate) fn local_frame(&self, x: &[f64]) -> Frame {
        match &self.shape {
            Shape::Hyperplane { normal, offset } => {
                let sd = dot(normal, x) - offset;
                let foot = x.iter().zip(normal).map(|(xi, ni)| xi - sd * ni).collect();
                Frame { foot, normal: normal.clone(), signed_distance: sd, curvature: 0.0 }
            }
            Shape::Sphere { center, radius } => {
                let rho = distance(x, center);
                let normal: Vec<f64> = x.iter().zip(center).map(|(xi, ci)| (xi - ci) / rho).collect();
                let foot = center.iter().zip(&normal).map(|(c, n)| c + radius * n).collect();
                Frame { foot, normal, signed_distance: rho - radius, curvature: 1.0 / rho }
            }
        }
    }

    /// Closest surface point to an arbitrary `x`, ignoring the reach. Used to
    /// sample surface points. `None` only for the exact sphere center.
    pub fn nearest_surface_point(&self, x: &[f64]) -> Option<Vec<f64>> {
        match &self.shape {
            Shape::Sphere { center, .. } if distance(x, center) == 0.0 => None,
            _ => Some(self.local_frame(x).foot),
        }
    }
}

/// Local geometry at a point inside the reach.
#[derive(Clone, Debug)]
pub(crate) struct Frame {
    pub foot: Vec<f64>,
    pub normal: Vec<f64>,
    pub signed_distance: f64,
    /// Hessian of `D` is `curvature * (I - n n^T)`: zero for hyperplanes,
    /// `1 / |x - center|` for spheres.
    pub curvature: f64,
}

impl Frame {
    pub fn distance_hessian_form(&self, v: &[f64], w: &[f64]) -> f64 {
        if self.curvature == 0.0 {
            return 0.0;
        }
        self.curvature * (dot(v, w) - dot(&self.normal, v) * dot(&self.normal, w))
    }
}

/// Axis-aligned box of representative states, used wherever surface or tube
/// points have to be sampled.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl SampleBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::DimensionMismatch { expected: lower.len(), got: upper.len() });
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u) || !l.is_finite() || !u.is_finite()) {
            return Err(Error::InvalidArgument("sample box bounds must be finite with lower < upper".into()));
        }
        Ok(SampleBox { lower, upper })
    }

    /// `[-half_width, half_width]^dim` around `center`.
    pub fn around(center: &[f64], half_width: f64) -> Self {
        SampleBox {
            lower: center.iter().map(|c| c - half_width).collect(),
            upper: center.iter().map(|c| c + half_width).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(l, u)| rng.random_range(*l..*u)).collect()
    }

    /// `n` surface points: projections of uniform box samples.
    pub fn surface_points<R: Rng + ?Sized>(&self, surface: &Hypersurface, n: usize, rng: &mut R) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            if let Some(p) = surface.nearest_surface_point(&self.sample(rng)) {
                out.push(p);
            }
        }
        out
    }

    /// `n` points `xi + s n(xi)` with `xi` from [`Self::surface_points`] and `s`
    /// uniform in `(-width, width)`.
    pub fn tube_points<R: Rng + ?Sized>(
        &self,
        surface: &Hypersurface,
        width: f64,
        n: usize,
        rng: &mut R,
    ) -> Vec<Vec<f64>> {
        self.surface_points(surface, n, rng)
            .into_iter()
            .map(|xi| {
                let normal = surface.local_frame(&xi).normal;
                let s = rng.random_range(-width..width);
                xi.iter().zip(&normal).map(|(a, b)| a + s * b).collect()
            })
            .collect()
    }
}
