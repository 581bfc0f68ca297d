use serde::{Deserialize, Serialize};

use super::MetricSpace;
use super::{check_sphere_args, circle_directions, ModelSpaceParams, RadialGeometry, SphereSample, SphereSampling, VolumeMeasure};
use crate::error::{Error, Result};
use crate::numeric::unit_ball_volume;

/// ℝᵈ with the ℓ² metric and Lebesgue measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Euclidean {
    d: usize,
}

impl Euclidean {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Argument("Euclidean dimension must be >= 1".into()));
        }
        Ok(Self { d })
    }
}

fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn fibonacci_sphere(n: usize, offset: f64) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5 + offset) / (n as f64 + 2.0 * offset.abs());
            let z = z.clamp(-1.0, 1.0);
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let t = golden * i as f64;
            [rho * t.cos(), rho * t.sin(), z]
        })
        .collect()
}

impl MetricSpace for Euclidean {
    type Point = Vec<f64>;

    fn dim(&self) -> usize {
        self.d
    }

    fn name(&self) -> String {
        format!("euclidean(d={})", self.d)
    }

    fn validate(&self, x: &Vec<f64>) -> Result<()> {
        if x.len() != self.d {
            return Err(Error::Domain(format!("expected {} coordinates, got {}", self.d, x.len())));
        }
        if x.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("non-finite coordinate".into()));
        }
        Ok(())
    }

    fn distance(&self, x: &Vec<f64>, y: &Vec<f64>) -> f64 {
        sq_dist(x, y).sqrt()
    }

    fn coords(&self, x: &Vec<f64>) -> Vec<f64> {
        x.clone()
    }

    fn from_coords(&self, c: &[f64]) -> Result<Vec<f64>> {
        let p = c.to_vec();
        self.validate(&p)?;
        Ok(p)
    }

    /// Weighted centroid for p = 2; iteratively reweighted least squares
    /// (Weiszfeld-type) otherwise.
    fn power_mean(&self, points: &[&Vec<f64>], weights: &[f64], p: f64, start: &Vec<f64>) -> Option<Vec<f64>> {
        let total: f64 = weights.iter().sum();
        if points.is_empty() || !(total > 0.0) {
            return None;
        }
        let centroid = |w: &dyn Fn(usize) -> f64| -> Option<Vec<f64>> {
            let mut acc = vec![0.0; self.d];
            let mut mass = 0.0;
            for (i, x) in points.iter().enumerate() {
                let wi = w(i);
                mass += wi;
                for (a, c) in acc.iter_mut().zip(x.iter()) {
                    *a += wi * c;
                }
            }
            (mass > 0.0 && mass.is_finite()).then(|| acc.into_iter().map(|a| a / mass).collect())
        };
        if (p - 2.0).abs() < 1e-12 {
            return centroid(&|i| weights[i]);
        }
        let mut c = start.clone();
        for _ in 0..100 {
            let floor = 1e-12;
            let next = centroid(&|i| weights[i] * self.distance(points[i], &c).max(floor).powf(p - 2.0))?;
            let moved = self.distance(&next, &c);
            c = next;
            if moved < 1e-13 {
                break;
            }
        }
        Some(c)
    }
}

impl SphereSampling for Euclidean {
    fn sample_sphere(&self, center: &Vec<f64>, radius: f64, n: usize, band: f64) -> Result<SphereSample<Vec<f64>>> {
        check_sphere_args(radius, n, band)?;
        self.validate(center)?;
        if radius == 0.0 {
            return Ok(SphereSample { center: center.clone(), radius, points: vec![center.clone()], band, fill: 0.0 });
        }
        let shift = |u: &[f64]| -> Vec<f64> { center.iter().zip(u).map(|(c, ui)| c + radius * ui).collect() };
        let (points, fill) = match self.d {
            1 => {
                let pts: Vec<Vec<f64>> = [1.0, -1.0].iter().take(n.min(2)).map(|s| shift(&[*s])).collect();
                let fill = if pts.len() == 2 { 0.0 } else { 2.0 * radius };
                (pts, fill)
            }
            2 => {
                let pts: Vec<Vec<f64>> = circle_directions(n).map(|u| shift(&u)).collect();
                let half_gap = std::f64::consts::PI / n as f64;
                (pts, 2.0 * radius * (half_gap / 2.0).sin())
            }
            3 => {
                let dirs = fibonacci_sphere(n, 0.0);
                let pts: Vec<Vec<f64>> = dirs.iter().map(|u| shift(u)).collect();
                // Fill distance estimated against a denser probe lattice.
                let probes = fibonacci_sphere(8 * n, 0.25);
                let fill =
                    probes.iter().map(|q| dirs.iter().map(|u| sq_dist(q, u)).fold(f64::INFINITY, f64::min).sqrt()).fold(0.0, f64::max);
                (pts, radius * fill * 1.05)
            }
            d => return Err(Error::Unsupported(format!("sphere sampling in dimension {d}"))),
        };
        Ok(SphereSample { center: center.clone(), radius, points, band, fill })
    }
}

impl RadialGeometry for Euclidean {
    fn point_along(&self, center: &Vec<f64>, u: &[f64], r: f64) -> Vec<f64> {
        center.iter().zip(u).map(|(c, ui)| c + r * ui).collect()
    }

    fn curvature(&self) -> f64 {
        0.0
    }

    fn model(&self) -> ModelSpaceParams {
        ModelSpaceParams { kappa: 0.0, d: self.d }
    }
}

impl VolumeMeasure for Euclidean {
    fn ball_volume(&self, _x: &Vec<f64>, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::Argument(format!("ball radius must be nonnegative, got {r}")));
        }
        Ok(unit_ball_volume(self.d) * r.powi(self.d as i32))
    }

    fn annulus_quadrature(&self, center: &Vec<f64>, r_in: f64, r_out: f64, resolution: f64) -> Result<Vec<(Vec<f64>, f64)>> {
        self.validate(center)?;
        if !(resolution > 0.0) || !(r_out > r_in) || r_in < 0.0 {
            return Err(Error::Argument("annulus quadrature needs 0 <= r_in < r_out and resolution > 0".into()));
        }
        let h = 1.0 / resolution;
        let m = (r_out / h).ceil() as i64;
        let cell = h.powi(self.d as i32);
        let mut out = Vec::new();
        let mut idx = vec![-m; self.d];
        'outer: loop {
            let p: Vec<f64> = center.iter().zip(&idx).map(|(c, &i)| c + (i as f64 + 0.5) * h).collect();
            let r = self.distance(&p, center);
            if r >= r_in && r < r_out {
                out.push((p, cell));
            }
            // Odometer increment over the cell index.
            #[allow(clippy::needless_range_loop)]
            for k in 0..self.d {
                idx[k] += 1;
                if idx[k] < m {
                    continue 'outer;
                }
                idx[k] = -m;
            }
            break;
        }
        Ok(out)
    }
}
