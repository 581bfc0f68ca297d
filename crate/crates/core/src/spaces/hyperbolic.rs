use serde::{Deserialize, Serialize};

use super::model::{model_volume, ModelSpaceParams};
use super::{check_sphere_args, circle_directions, MetricSpace, RadialGeometry, SphereSample, SphereSampling, VolumeMeasure};
use crate::error::{Error, Result};

/// The hyperbolic plane of curvature κ < 0 in Poincaré-disk coordinates.
///
/// Points are Euclidean coordinates with norm < 1; the metric is the
/// Poincaré metric rescaled by 1/√−κ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicPlane {
    kappa: f64,
}

impl Default for HyperbolicPlane {
    fn default() -> Self {
        Self { kappa: -1.0 }
    }
}

impl HyperbolicPlane {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_curvature(kappa: f64) -> Result<Self> {
        if !(kappa < 0.0) || !kappa.is_finite() {
            return Err(Error::Argument(format!("hyperbolic curvature must be negative, got {kappa}")));
        }
        Ok(Self { kappa })
    }

    fn scale(&self) -> f64 {
        1.0 / (-self.kappa).sqrt()
    }

    /// Disk point at hyperbolic distance `r` from the origin along `u`.
    pub fn from_polar(&self, u: [f64; 2], r: f64) -> [f64; 2] {
        let t = (r / (2.0 * self.scale())).tanh();
        [t * u[0], t * u[1]]
    }

    /// The orientation-preserving isometry z ↦ (z + c)/(1 + c̄z) taking 0 to c.
    fn mobius(c: [f64; 2], z: [f64; 2]) -> [f64; 2] {
        if c == [0.0, 0.0] {
            return z;
        }
        let num = [z[0] + c[0], z[1] + c[1]];
        let den = [1.0 + c[0] * z[0] + c[1] * z[1], c[0] * z[1] - c[1] * z[0]];
        let den2 = den[0] * den[0] + den[1] * den[1];
        [(num[0] * den[0] + num[1] * den[1]) / den2, (num[1] * den[0] - num[0] * den[1]) / den2]
    }
}

fn one_minus_norm2(x: &[f64; 2]) -> f64 {
    let n = (x[0] * x[0] + x[1] * x[1]).sqrt();
    (1.0 - n) * (1.0 + n)
}

impl MetricSpace for HyperbolicPlane {
    type Point = [f64; 2];

    fn dim(&self) -> usize {
        2
    }

    fn name(&self) -> String {
        format!("hyperbolic(kappa={})", self.kappa)
    }

    fn validate(&self, x: &[f64; 2]) -> Result<()> {
        if !(x[0].is_finite() && x[1].is_finite()) || !(one_minus_norm2(x) > 0.0) {
            return Err(Error::Domain(format!("point {x:?} is not inside the Poincare disk")));
        }
        Ok(())
    }

    fn distance(&self, x: &[f64; 2], y: &[f64; 2]) -> f64 {
        let dx = x[0] - y[0];
        let dy = x[1] - y[1];
        let chord = (dx * dx + dy * dy).sqrt();
        if chord == 0.0 {
            return 0.0;
        }
        let denom = (one_minus_norm2(x) * one_minus_norm2(y)).sqrt();
        2.0 * self.scale() * (chord / denom).asinh()
    }

    fn coords(&self, x: &[f64; 2]) -> Vec<f64> {
        x.to_vec()
    }

    fn from_coords(&self, c: &[f64]) -> Result<[f64; 2]> {
        if c.len() != 2 {
            return Err(Error::Domain(format!("expected 2 coordinates, got {}", c.len())));
        }
        let p = [c[0], c[1]];
        self.validate(&p)?;
        Ok(p)
    }
}

impl RadialGeometry for HyperbolicPlane {
    fn point_along(&self, center: &[f64; 2], u: &[f64], r: f64) -> [f64; 2] {
        Self::mobius(*center, self.from_polar([u[0], u[1]], r))
    }

    fn curvature(&self) -> f64 {
        self.kappa
    }

    fn max_radius(&self) -> f64 {
        30.0 * self.scale()
    }
}

impl SphereSampling for HyperbolicPlane {
    fn sample_sphere(&self, center: &[f64; 2], radius: f64, n: usize, band: f64) -> Result<SphereSample<[f64; 2]>> {
        check_sphere_args(radius, n, band)?;
        self.validate(center)?;
        if radius > self.max_radius() {
            return Err(Error::Domain(format!("radius {radius} is beyond the numerically resolved range")));
        }
        if radius == 0.0 {
            return Ok(SphereSample { center: *center, radius, points: vec![*center], band, fill: 0.0 });
        }
        let points: Vec<[f64; 2]> = circle_directions(n).map(|u| self.point_along(center, &u, radius)).collect();
        for p in &points {
            self.validate(p)?;
        }
        let half = std::f64::consts::PI / n as f64;
        let mid = self.point_along(center, &[half.cos(), half.sin()], radius);
        let fill = self.distance(&points[0], &mid);
        Ok(SphereSample { center: *center, radius, points, band, fill })
    }
}

impl VolumeMeasure for HyperbolicPlane {
    fn ball_volume(&self, _x: &[f64; 2], r: f64) -> Result<f64> {
        model_volume(self.model(), r)
    }

    /// Polar grid around `center`: rings of width 1/resolution, each split
    /// into cells of arc length about 1/resolution.
    fn annulus_quadrature(&self, center: &[f64; 2], r_in: f64, r_out: f64, resolution: f64) -> Result<Vec<([f64; 2], f64)>> {
        self.validate(center)?;
        if !(resolution > 0.0) || !(r_out > r_in) || r_in < 0.0 {
            return Err(Error::Argument("annulus quadrature needs 0 <= r_in < r_out and resolution > 0".into()));
        }
        let params = ModelSpaceParams { kappa: self.kappa, d: 2 };
        let rings = ((r_out - r_in) * resolution).ceil().max(1.0) as usize;
        let dr = (r_out - r_in) / rings as f64;
        let mut out = Vec::new();
        for i in 0..rings {
            let a = r_in + i as f64 * dr;
            let b = a + dr;
            let mid = 0.5 * (a + b);
            let circumference = params.sphere_area(mid)?;
            let cells = (circumference * resolution).ceil().max(8.0) as usize;
            let weight = params.shell_volume(a, b)? / cells as f64;
            for j in 0..cells {
                let t = std::f64::consts::TAU * (j as f64 + 0.5) / cells as f64;
                out.push((self.point_along(center, &[t.cos(), t.sin()], mid), weight));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radial_distance_matches_length_integral() {
        // Hyperbolic length of the radial segment [0, t] is ∫ 2/(1 − s²) ds;
        // summed here as a fine polygonal length.
        let h = HyperbolicPlane::new();
        let t = 0.5f64.tanh();
        let steps = 200_000;
        let mut len = 0.0;
        for i in 0..steps {
            let s = (i as f64 + 0.5) * t / steps as f64;
            len += 2.0 / (1.0 - s * s) * t / steps as f64;
        }
        let d = h.distance(&[0.0, 0.0], &[t, 0.0]);
        assert!((d - len).abs() < 1e-9);
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mobius_is_an_isometry() {
        let h = HyperbolicPlane::new();
        let c = [0.3, -0.4];
        let a = [0.1, 0.2];
        let b = [-0.5, 0.6];
        let d0 = h.distance(&a, &b);
        let d1 = h.distance(&HyperbolicPlane::mobius(c, a), &HyperbolicPlane::mobius(c, b));
        assert!((d0 - d1).abs() < 1e-12);
        assert_eq!(HyperbolicPlane::mobius(c, [0.0, 0.0]), c);
    }

    #[test]
    fn sphere_sample_is_exact() {
        let h = HyperbolicPlane::new();
        let c = [0.2, 0.1];
        let s = h.sample_sphere(&c, 2.0, 100, 1e-12).unwrap();
        assert_eq!(s.len(), 100);
        for p in &s.points {
            assert!((h.distance(p, &c) - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn outside_disk_is_domain_error() {
        let h = HyperbolicPlane::new();
        assert!(matches!(super::super::distance(&h, &[1.0, 0.0], &[0.0, 0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn exponential_map_growth_by_finite_differences() {
        // |d exp(w)| for a unit tangential w at |v| = R equals the limit of
        // d(exp(R e^{i0}), exp(R e^{iε}))/ε.
        let h = HyperbolicPlane::new();
        let r = 3.0;
        let eps: f64 = 1e-6;
        let a = h.from_polar([1.0, 0.0], r);
        let b = h.from_polar([eps.cos(), eps.sin()], r);
        let fd = h.distance(&a, &b) / eps;
        let model = super::super::exp_growth_a(h.model(), r).unwrap();
        assert!((fd - model).abs() < 1e-5 * model, "{fd} vs {model}");
    }

    #[test]
    fn curvature_rescales_distance() {
        let h4 = HyperbolicPlane::with_curvature(-4.0).unwrap();
        let h1 = HyperbolicPlane::new();
        let a = [0.1, 0.3];
        let b = [-0.2, 0.5];
        assert!((h4.distance(&a, &b) - 0.5 * h1.distance(&a, &b)).abs() < 1e-15);
        assert!(HyperbolicPlane::with_curvature(0.5).is_err());
    }

    #[test]
    fn annulus_quadrature_area() {
        let h = HyperbolicPlane::new();
        let q = h.annulus_quadrature(&[0.0, 0.0], 1.0, 2.0, 50.0).unwrap();
        let area: f64 = q.iter().map(|(_, w)| w).sum();
        let exact = std::f64::consts::TAU * (2f64.cosh() - 1f64.cosh());
        assert!((area - exact).abs() < 1e-10 * exact);
        for (p, _) in &q {
            let r = h.distance(p, &[0.0, 0.0]);
            assert!((1.0..2.0).contains(&r));
        }
    }
}
