//! Special functions of the constant-curvature model spaces M^d_κ.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{integrate, unit_ball_volume};

/// Quadrature tolerance for model volumes.
pub const VOLUME_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpaceParams {
    pub kappa: f64,
    pub d: usize,
}

impl ModelSpaceParams {
    pub fn new(kappa: f64, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Argument("model space dimension must be >= 1".into()));
        }
        if !kappa.is_finite() {
            return Err(Error::Argument(format!("curvature must be finite, got {kappa}")));
        }
        Ok(Self { kappa, d })
    }

    /// Diameter D_κ: π/√κ for κ > 0, ∞ otherwise.
    pub fn diameter(&self) -> f64 {
        if self.kappa > 0.0 {
            std::f64::consts::PI / self.kappa.sqrt()
        } else {
            f64::INFINITY
        }
    }

    fn check_radius(&self, r: f64) -> Result<()> {
        if !(r >= 0.0) {
            return Err(Error::Argument(format!("radius must be nonnegative, got {r}")));
        }
        let diam = self.diameter();
        if r > diam * (1.0 + 1e-12) {
            return Err(Error::Domain(format!("radius {r} exceeds the model diameter {diam} for kappa = {}", self.kappa)));
        }
        Ok(())
    }

    /// Area of the model sphere of radius r: d ω_d sin_κ^{d−1}(r).
    pub fn sphere_area(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        Ok(self.d as f64 * unit_ball_volume(self.d) * jacobi(self.kappa, r).powi(self.d as i32 - 1))
    }

    /// vol^d_κ(b) − vol^d_κ(a) for 0 ≤ a ≤ b.
    pub fn shell_volume(&self, a: f64, b: f64) -> Result<f64> {
        self.check_radius(a)?;
        self.check_radius(b)?;
        if a > b {
            return Err(Error::Argument(format!("shell bounds out of order: {a} > {b}")));
        }
        let scale = self.d as f64 * unit_ball_volume(self.d);
        if self.d == 1 {
            return Ok(scale * (b - a));
        }
        if self.kappa == 0.0 {
            let d = self.d as i32;
            return Ok(unit_ball_volume(self.d) * (b.powi(d) - a.powi(d)));
        }
        let e = self.d as i32 - 1;
        Ok(scale * integrate(|t| jacobi(self.kappa, t).powi(e), a, b, VOLUME_REL_TOL))
    }
}

// sin_κ without argument checks.
fn jacobi(kappa: f64, r: f64) -> f64 {
    if kappa == 0.0 {
        return r;
    }
    let x = kappa * r * r;
    if x.abs() < 1e-8 {
        // r − κr³/6 + κ²r⁵/120
        return r * (1.0 - x / 6.0 + x * x / 120.0);
    }
    if kappa > 0.0 {
        let s = kappa.sqrt();
        (s * r).sin() / s
    } else {
        let s = (-kappa).sqrt();
        (s * r).sinh() / s
    }
}

/// Solution of y'' + κy = 0 with y(0) = 0, y'(0) = 1.
pub fn sin_kappa(kappa: f64, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::Argument(format!("sin_kappa needs r >= 0, got {r}")));
    }
    Ok(jacobi(kappa, r))
}

/// Volume of a ball of radius `r` in M^d_κ.
pub fn model_volume(params: ModelSpaceParams, r: f64) -> Result<f64> {
    params.shell_volume(0.0, r)
}

/// Operator-norm growth 𝒜(R) of the exponential map on the tangent sphere
/// of radius R, for κ ≤ 0.
pub fn exp_growth_a(params: ModelSpaceParams, r: f64) -> Result<f64> {
    if params.kappa > 0.0 {
        return Err(Error::Unsupported("exponential-map growth is only provided for nonpositive curvature".into()));
    }
    sin_kappa(params.kappa, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sin_kappa_examples() {
        assert_eq!(sin_kappa(0.0, 2.5).unwrap(), 2.5);
        assert!((sin_kappa(1.0, PI / 2.0).unwrap() - 1.0).abs() < 1e-15);
        // Taylor series of sinh at 1, summed independently.
        let mut term = 1.0f64;
        let mut series = 0.0;
        for k in 0..20 {
            series += term;
            term /= ((2 * k + 2) * (2 * k + 3)) as f64;
        }
        assert!((sin_kappa(-1.0, 1.0).unwrap() - series).abs() < 1e-14);
        assert!((series - 1.17520).abs() < 1e-5);
        assert!(matches!(sin_kappa(0.0, -1.0), Err(Error::Argument(_))));
    }

    #[test]
    fn sin_kappa_continuous_at_zero_curvature() {
        for &r in &[0.1, 1.0, 3.0] {
            let flat = sin_kappa(0.0, r).unwrap();
            assert!((sin_kappa(1e-12, r).unwrap() - flat).abs() < 1e-9);
            assert!((sin_kappa(-1e-12, r).unwrap() - flat).abs() < 1e-9);
        }
    }

    #[test]
    fn model_volume_examples() {
        let v = model_volume(ModelSpaceParams::new(0.0, 3).unwrap(), 2.0).unwrap();
        assert!((v - 4.0 * PI / 3.0 * 8.0).abs() < 1e-12);
        assert!((v - 33.5103).abs() < 1e-4);

        let v = model_volume(ModelSpaceParams::new(-1.0, 2).unwrap(), 1.0).unwrap();
        let closed = 2.0 * PI * (1.0f64.cosh() - 1.0);
        assert!((v - closed).abs() < 1e-10 * closed);
        assert!((v - 3.4116).abs() < 1e-3);

        let v = model_volume(ModelSpaceParams::new(1.0, 2).unwrap(), PI).unwrap();
        assert!((v - 4.0 * PI).abs() < 1e-10 * 4.0 * PI);
    }

    #[test]
    fn model_volume_rejects_beyond_diameter() {
        let p = ModelSpaceParams::new(1.0, 2).unwrap();
        assert!(matches!(model_volume(p, 3.5), Err(Error::Domain(_))));
        assert!(matches!(model_volume(p, -0.1), Err(Error::Argument(_))));
    }

    #[test]
    fn flat_volume_is_exact() {
        for d in 1..=3 {
            let p = ModelSpaceParams::new(0.0, d).unwrap();
            for &r in &[0.1, 1.0, 10.0] {
                let v = model_volume(p, r).unwrap();
                let exact = unit_ball_volume(d) * r.powi(d as i32);
                assert!((v - exact).abs() <= 1e-12 * exact, "d={d} r={r}");
            }
        }
    }

    #[test]
    fn hyperbolic_three_volume_matches_closed_form() {
        // ∫ sinh² = (sinh(2R)/2 − R)/2
        let p = ModelSpaceParams::new(-1.0, 3).unwrap();
        for &r in &[0.5f64, 2.0, 6.0] {
            let closed = 4.0 * PI * ((2.0 * r).sinh() / 2.0 - r) / 2.0;
            let v = model_volume(p, r).unwrap();
            assert!((v - closed).abs() < 1e-10 * closed);
        }
    }

    #[test]
    fn exp_growth_examples() {
        let flat = ModelSpaceParams::new(0.0, 2).unwrap();
        assert_eq!(exp_growth_a(flat, 7.0).unwrap(), 7.0);
        let h = ModelSpaceParams::new(-1.0, 2).unwrap();
        assert!((exp_growth_a(h, 3.0).unwrap() - 10.0179).abs() < 1e-4);
        let h4 = ModelSpaceParams::new(-4.0, 2).unwrap();
        let rescaled = exp_growth_a(h, 2.0).unwrap() / 2.0;
        assert!((exp_growth_a(h4, 1.0).unwrap() - rescaled).abs() < 1e-14);
        assert!((rescaled - 1.8134).abs() < 1e-4);
        let sphere = ModelSpaceParams::new(1.0, 2).unwrap();
        assert!(matches!(exp_growth_a(sphere, 1.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn exp_growth_dominates_radius() {
        for &k in &[0.0, -0.25, -1.0, -4.0] {
            let p = ModelSpaceParams::new(k, 2).unwrap();
            for i in 0..50 {
                let r = i as f64 * 0.3;
                assert!(exp_growth_a(p, r).unwrap() >= r);
            }
        }
    }
}
