//! Metric-space backends.
//!
//! Every backend implements [`MetricSpace`]. Backends that can place points
//! at a prescribed distance from a center implement [`SphereSampling`], those
//! with an analytic radial structure implement [`RadialGeometry`] and those
//! carrying a volume measure implement [`VolumeMeasure`].

mod euclidean;
mod hyperbolic;
mod mesh;
pub mod model;
mod torus;

use std::fmt::Debug;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use euclidean::Euclidean;
pub use hyperbolic::HyperbolicPlane;
pub use mesh::{build_sinusoidal_surface, GridInfo, MeshJson, MeshSurface};
pub use model::{exp_growth_a, model_volume, sin_kappa, ModelSpaceParams};
pub use torus::FlatTorus;

/// A metric space with a distance oracle.
pub trait MetricSpace: Send + Sync {
    type Point: Clone + Debug + PartialEq + Send + Sync;

    /// Topological dimension used for scaling exponents.
    fn dim(&self) -> usize;

    /// Short backend name recorded in provenance metadata.
    fn name(&self) -> String;

    /// Checks that `x` is a valid point of the space.
    fn validate(&self, x: &Self::Point) -> Result<()>;

    /// Distance between two valid points.
    fn distance(&self, x: &Self::Point, y: &Self::Point) -> f64;

    /// Distances from `x` to every element of `ys`.
    fn distances_from(&self, x: &Self::Point, ys: &[Self::Point]) -> Vec<f64> {
        ys.par_iter().with_min_len(512).map(|y| self.distance(x, y)).collect()
    }

    /// Coordinates used for CSV export.
    fn coords(&self, x: &Self::Point) -> Vec<f64>;

    /// Inverse of [`MetricSpace::coords`].
    #[allow(clippy::wrong_self_convention)]
    fn from_coords(&self, c: &[f64]) -> Result<Self::Point>;

    /// Minimizer of `c ↦ Σ wᵢ d(xᵢ, c)^p` when the backend has a cheap
    /// closed-form or iterative solver. `None` means callers fall back to a
    /// medoid over the given points.
    fn power_mean(&self, _points: &[&Self::Point], _weights: &[f64], _p: f64, _start: &Self::Point) -> Option<Self::Point> {
        None
    }
}

/// Distance with domain validation of both arguments.
pub fn distance<S: MetricSpace>(space: &S, x: &S::Point, y: &S::Point) -> Result<f64> {
    space.validate(x)?;
    space.validate(y)?;
    Ok(space.distance(x, y))
}

/// Finite discretization of the geodesic sphere ∂B_R(x₀).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereSample<P> {
    pub center: P,
    pub radius: f64,
    pub points: Vec<P>,
    /// Tolerance on |d(x, center) − radius| satisfied by every member.
    pub band: f64,
    /// Upper bound on the distance from any point of the continuum sphere to
    /// the sample.
    pub fill: f64,
}

impl<P> SphereSample<P> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub trait SphereSampling: MetricSpace {
    /// Discretizes ∂B_R(center). Analytic backends return `n` points placed
    /// parametrically; graph backends return the vertex band
    /// `|d(v, center) − R| ≤ band`.
    fn sample_sphere(&self, center: &Self::Point, radius: f64, n: usize, band: f64) -> Result<SphereSample<Self::Point>>;

    /// Band used when callers do not specify one.
    fn default_band(&self) -> f64 {
        1e-12
    }
}

/// Backends with an exponential map at every point and a radial volume
/// element depending only on the distance to the center.
pub trait RadialGeometry: MetricSpace {
    /// Point at distance `r` from `center` in the unit tangent direction `u`
    /// (`u.len() == dim()`).
    fn point_along(&self, center: &Self::Point, u: &[f64], r: f64) -> Self::Point;

    /// Sectional curvature of the backend.
    fn curvature(&self) -> f64;

    /// Model-space parameters matching the backend.
    fn model(&self) -> ModelSpaceParams {
        ModelSpaceParams::new(self.curvature(), self.dim()).expect("backend dimension is positive")
    }

    /// Largest radius for which spheres are embedded (∞ when unbounded).
    fn max_radius(&self) -> f64 {
        f64::INFINITY
    }
}

/// Backends carrying a volume measure ν.
pub trait VolumeMeasure: MetricSpace {
    /// ν(B_r(x)) for the open ball.
    fn ball_volume(&self, x: &Self::Point, r: f64) -> Result<f64>;

    /// Weighted cells discretizing ν on the annulus `r_in ≤ d(·, center) < r_out`.
    /// `resolution` is the number of cells per unit length where the backend
    /// builds its own grid.
    fn annulus_quadrature(&self, center: &Self::Point, r_in: f64, r_out: f64, resolution: f64) -> Result<Vec<(Self::Point, f64)>>;
}

pub(crate) fn check_sphere_args(radius: f64, n: usize, band: f64) -> Result<()> {
    if !(radius >= 0.0) || !radius.is_finite() {
        return Err(Error::Argument(format!("sphere radius must be finite and nonnegative, got {radius}")));
    }
    if n == 0 {
        return Err(Error::Argument("sphere sample needs n >= 1".into()));
    }
    if !(band > 0.0) {
        return Err(Error::Argument(format!("band must be positive, got {band}")));
    }
    Ok(())
}

/// Unit directions for a 2-D circle sample, equally spaced from angle 0.
pub(crate) fn circle_directions(n: usize) -> impl Iterator<Item = [f64; 2]> {
    (0..n).map(move |j| {
        let t = std::f64::consts::TAU * j as f64 / n as f64;
        [t.cos(), t.sin()]
    })
}
