use serde::{Deserialize, Serialize};

use super::{check_sphere_args, circle_directions, MetricSpace, RadialGeometry, SphereSample, SphereSampling, VolumeMeasure};
use crate::error::{Error, Result};
use crate::numeric::unit_ball_volume;

/// The flat torus ℝᵈ/(Lℤ)ᵈ with coordinates in [0, L)ᵈ.
///
/// Balls and spheres are only embedded for radii below L/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlatTorus {
    d: usize,
    side: f64,
}

impl FlatTorus {
    pub fn new(d: usize, side: f64) -> Result<Self> {
        if d == 0 || !(side > 0.0) || !side.is_finite() {
            return Err(Error::Argument(format!("flat torus needs d >= 1 and side > 0, got d={d}, side={side}")));
        }
        Ok(Self { d, side })
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    fn wrap(&self, c: f64) -> f64 {
        let w = c.rem_euclid(self.side);
        if w >= self.side {
            0.0
        } else {
            w
        }
    }

    fn check_embedded(&self, r: f64) -> Result<()> {
        if r >= 0.5 * self.side {
            return Err(Error::Domain(format!("radius {r} reaches the torus injectivity radius {}", 0.5 * self.side)));
        }
        Ok(())
    }
}

impl MetricSpace for FlatTorus {
    type Point = Vec<f64>;

    fn dim(&self) -> usize {
        self.d
    }

    fn name(&self) -> String {
        format!("flat_torus(d={}, side={})", self.d, self.side)
    }

    fn validate(&self, x: &Vec<f64>) -> Result<()> {
        if x.len() != self.d || x.iter().any(|c| !(*c >= 0.0 && *c < self.side)) {
            return Err(Error::Domain(format!("{x:?} is not a point of [0, {})^{}", self.side, self.d)));
        }
        Ok(())
    }

    fn distance(&self, x: &Vec<f64>, y: &Vec<f64>) -> f64 {
        x.iter()
            .zip(y)
            .map(|(a, b)| {
                let t = (a - b).abs();
                let t = t.min(self.side - t);
                t * t
            })
            .sum::<f64>()
            .sqrt()
    }

    fn coords(&self, x: &Vec<f64>) -> Vec<f64> {
        x.clone()
    }

    fn from_coords(&self, c: &[f64]) -> Result<Vec<f64>> {
        let p = c.to_vec();
        self.validate(&p)?;
        Ok(p)
    }
}

impl RadialGeometry for FlatTorus {
    fn point_along(&self, center: &Vec<f64>, u: &[f64], r: f64) -> Vec<f64> {
        center.iter().zip(u).map(|(c, ui)| self.wrap(c + r * ui)).collect()
    }

    fn curvature(&self) -> f64 {
        0.0
    }

    fn max_radius(&self) -> f64 {
        0.5 * self.side
    }
}

impl SphereSampling for FlatTorus {
    fn sample_sphere(&self, center: &Vec<f64>, radius: f64, n: usize, band: f64) -> Result<SphereSample<Vec<f64>>> {
        check_sphere_args(radius, n, band)?;
        self.validate(center)?;
        self.check_embedded(radius)?;
        if self.d != 2 {
            return Err(Error::Unsupported(format!("torus sphere sampling in dimension {}", self.d)));
        }
        if radius == 0.0 {
            return Ok(SphereSample { center: center.clone(), radius, points: vec![center.clone()], band, fill: 0.0 });
        }
        let points = circle_directions(n).map(|u| self.point_along(center, &u, radius)).collect();
        let fill = 2.0 * radius * (std::f64::consts::PI / (2.0 * n as f64)).sin();
        Ok(SphereSample { center: center.clone(), radius, points, band, fill })
    }
}

impl VolumeMeasure for FlatTorus {
    fn ball_volume(&self, _x: &Vec<f64>, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::Argument(format!("ball radius must be nonnegative, got {r}")));
        }
        self.check_embedded(r)?;
        Ok(unit_ball_volume(self.d) * r.powi(self.d as i32))
    }

    fn annulus_quadrature(&self, center: &Vec<f64>, r_in: f64, r_out: f64, resolution: f64) -> Result<Vec<(Vec<f64>, f64)>> {
        self.check_embedded(r_out)?;
        let flat = super::Euclidean::new(self.d)?;
        let cells = flat.annulus_quadrature(center, r_in, r_out, resolution)?;
        Ok(cells.into_iter().map(|(p, w)| (p.into_iter().map(|c| self.wrap(c)).collect(), w)).collect())
    }
}
