//! Closed-form covering-growth bounds, group-growth combinatorics and
//! ledgers comparing them with measured quantities.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::covering::{cm_estimate, geometric_grid, growth_curve, GrowthCurve};
use crate::error::{Error, Result};
use crate::numeric::{integrate, unit_ball_volume};
use crate::spaces::{exp_growth_a, model_volume, MeshSurface, ModelSpaceParams, RadialGeometry, SphereSampling, VolumeMeasure};

/// Relative slack granted to floating-point evaluation of closed forms whose
/// inequality is tight (equality cases).
pub const ROUNDING_TOL: f64 = 1e-12;

/// One inequality lhs ≤ rhs evaluated at concrete parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub name: String,
    /// The inequality being checked, in words.
    pub source: String,
    pub lhs: f64,
    pub rhs: f64,
    /// rhs − lhs; negative values are recorded, not raised.
    pub margin: f64,
    /// Relative rounding slack used by [`LedgerEntry::passed`].
    #[serde(default)]
    pub tol: f64,
    pub params: serde_json::Value,
}

impl LedgerEntry {
    pub fn new(name: &str, source: &str, lhs: f64, rhs: f64, params: serde_json::Value) -> Self {
        Self { name: name.into(), source: source.into(), lhs, rhs, margin: rhs - lhs, tol: 0.0, params }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn passed(&self) -> bool {
        self.margin >= -self.tol * self.lhs.abs().max(self.rhs.abs()) && !self.margin.is_nan()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundLedger {
    pub entries: Vec<LedgerEntry>,
}

impl BoundLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, e: LedgerEntry) {
        self.entries.push(e);
    }

    pub fn extend(&mut self, other: BoundLedger) {
        self.entries.extend(other.entries);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn failures(&self) -> usize {
        self.entries.iter().filter(|e| !e.passed()).count()
    }

    /// Entries with a strictly negative raw margin.
    pub fn negative_margins(&self) -> usize {
        self.entries.iter().filter(|e| !(e.margin >= 0.0)).count()
    }

    pub fn min_margin(&self) -> f64 {
        self.entries.iter().map(|e| e.margin).fold(f64::INFINITY, f64::min)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.entries).expect("ledger entries serialize")
    }
}

/// Approximate perimeter (vol(B_{R+r}) − vol(B_{R−r}))/(2r) of a model ball
/// together with its upper bound d ω_d sin_κ^{d−1}(R+r).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PKappa {
    pub value: f64,
    pub bound: f64,
}

impl PKappa {
    pub fn holds(&self) -> bool {
        self.value <= self.bound * (1.0 + ROUNDING_TOL)
    }
}

/// Evaluated as d ω_d (2r)⁻¹ ∫_{R−r}^{R+r} sin_κ^{d−1}, which equals the
/// central difference of model volumes without its cancellation.
pub fn p_kappa(kappa: f64, d: usize, big_r: f64, r: f64) -> Result<PKappa> {
    if !(r > 0.0 && r < big_r) {
        return Err(Error::Argument(format!("p_kappa needs 0 < r < R, got r={r}, R={big_r}")));
    }
    let params = ModelSpaceParams::new(kappa, d)?;
    let bound = params.sphere_area(big_r + r)?;
    let value = if d == 1 {
        2.0
    } else {
        let e = d as i32 - 1;
        // t = R + r u keeps the tiny-r case free of the rounded width 2r.
        let s = |u: f64| crate::spaces::sin_kappa(kappa, big_r + r * u).unwrap_or(0.0).powi(e);
        0.5 * d as f64 * unit_ball_volume(d) * integrate(s, -1.0, 1.0, 1e-13)
    };
    Ok(PKappa { value, bound })
}

/// Constants (C₁, C₂) with ∂vol/vol (R+r) ≤ (C₁ + C₂√−κ (R+r))/(R+r) for
/// all R ≥ 2r > 0: C₁ = d cosh^{d−1}(3r₀) covers R ≤ 2r₀ and
/// C₂ = d e^{(d−1)r₀} sinh^{1−d}(r₀) · e^{(d−1)r₀}/(e^{(d−1)r₀} − 1) covers
/// R ≥ 2r₀. κ < 0 reuses the κ = −1 constants by rescaling.
pub fn pkbd_constants(kappa: f64, d: usize, r0: f64) -> Result<(f64, f64)> {
    if kappa > 0.0 || !kappa.is_finite() {
        return Err(Error::Argument(format!("perimeter constants need kappa <= 0, got {kappa}")));
    }
    if !(r0 > 0.0) || d == 0 {
        return Err(Error::Argument(format!("perimeter constants need r0 > 0 and d >= 1, got r0={r0}, d={d}")));
    }
    let df = d as f64;
    if kappa == 0.0 {
        return Ok((df, 0.0));
    }
    let e = d as i32 - 1;
    let c1 = df * (3.0 * r0).cosh().powi(e);
    let c2 = if d == 1 {
        // The ratio is 1/(R+r), already covered by C₁ = 1.
        0.0
    } else {
        let g = ((df - 1.0) * r0).exp();
        df * g / r0.sinh().powi(e) * g / (g - 1.0)
    };
    Ok((c1, c2))
}

/// Sphere area over ball volume in M^d_κ at radius s.
fn sphere_to_ball(params: ModelSpaceParams, s: f64) -> Result<f64> {
    Ok(params.sphere_area(s)? / model_volume(params, s)?)
}

/// Points (R, r) with 0 < r ≤ R/2 and R + r ≤ `reach`, `n` values of each.
pub fn pkbd_grid(n: usize, reach: f64) -> Vec<(f64, f64)> {
    let r_top = reach / 1.5;
    let r_min = r_top / (4.0 * n as f64);
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let big_r = if n == 1 { r_top } else { r_min + (r_top - r_min) * i as f64 / (n - 1) as f64 };
        for j in 1..=n {
            out.push((big_r, 0.5 * big_r * j as f64 / n as f64));
        }
    }
    out
}

/// Checks, per (κ, d) and grid point, the chain
/// P ≤ d ω_d sin^{d−1}(R+r), P/vol(R+r) ≤ ∂vol/vol(R+r) ≤ (C₁ + C₂√−κ(R+r))/(R+r),
/// and the supremum form sup_{r ≤ r₀} P/vol(R+r) ≤ (C₁ + C₂√−κ(R+r₀))/R for
/// R ≥ 2r₀.
pub fn pkbd_grid_check(kappas: &[f64], ds: &[usize], r0: f64, n: usize, reach: f64) -> Result<BoundLedger> {
    let grid = pkbd_grid(n, reach);
    let mut cases = Vec::new();
    for &kappa in kappas {
        for &d in ds {
            cases.push((kappa, d));
        }
    }
    let per_case: Result<Vec<BoundLedger>> = cases
        .par_iter()
        .map(|&(kappa, d)| {
            let params = ModelSpaceParams::new(kappa, d)?;
            let (c1, c2) = pkbd_constants(kappa, d, r0)?;
            let sk = (-kappa).sqrt();
            let mut ledger = BoundLedger::new();
            for &(big_r, r) in &grid {
                let s = big_r + r;
                let pk = p_kappa(kappa, d, big_r, r)?;
                let vol = model_volume(params, s)?;
                let ratio = sphere_to_ball(params, s)?;
                let p = json!({"kappa": kappa, "d": d, "R": big_r, "r": r, "r0": r0, "C1": c1, "C2": c2});
                ledger.push(
                    LedgerEntry::new(
                        "model_perimeter",
                        "model perimeter P <= d omega_d sin_kappa^(d-1)(R+r)",
                        pk.value,
                        pk.bound,
                        p.clone(),
                    )
                    .with_tol(ROUNDING_TOL),
                );
                ledger.push(
                    LedgerEntry::new("perimeter_to_sphere", "P/vol(R+r) <= sphere area/vol(R+r)", pk.value / vol, ratio, p.clone())
                        .with_tol(ROUNDING_TOL),
                );
                ledger.push(
                    LedgerEntry::new(
                        "sphere_to_ball_ratio",
                        "sphere area/vol(R+r) <= (C1 + C2 sqrt(-kappa)(R+r))/(R+r)",
                        ratio,
                        (c1 + c2 * sk * s) / s,
                        p,
                    )
                    .with_tol(ROUNDING_TOL),
                );
            }
            // Supremum form on the R values admitting r ≤ r₀ ≤ R/2.
            let mut rs: Vec<f64> = grid.iter().map(|g| g.0).filter(|&big_r| big_r >= 2.0 * r0).collect();
            rs.dedup();
            for big_r in rs {
                let mut sup: f64 = 0.0;
                for j in 1..=n {
                    let r = r0 * j as f64 / n as f64;
                    let pk = p_kappa(kappa, d, big_r, r)?;
                    sup = sup.max(pk.value / model_volume(params, big_r + r)?);
                }
                ledger.push(
                    LedgerEntry::new(
                        "sup_perimeter_ratio",
                        "sup_{r <= r0} P/vol(R+r) <= (C1 + C2 sqrt(-kappa)(R+r0))/R",
                        sup,
                        (c1 + c2 * sk * (big_r + r0)) / big_r,
                        json!({"kappa": kappa, "d": d, "R": big_r, "r0": r0, "C1": c1, "C2": c2}),
                    )
                    .with_tol(ROUNDING_TOL),
                );
            }
            Ok(ledger)
        })
        .collect();
    let mut out = BoundLedger::new();
    for l in per_case? {
        out.extend(l);
    }
    Ok(out)
}

/// Right-hand side of the covering bound under Ric ≥ (d−1)κ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RicciRhs {
    /// 2^d ω_d⁻¹ (C₁ + C₂√−κ(R+r₀))/R · vol_κ(2R + r₀).
    pub value: f64,
    /// 2^d ω_d⁻¹ (C₁ + 1.5 C₂√−κ R)/R · vol_κ(5R/2), present when r₀ = R/2.
    pub half_radius_form: Option<f64>,
}

pub fn ricci_cover_rhs(kappa: f64, d: usize, big_r: f64, r0: f64, c1: f64, c2: f64) -> Result<RicciRhs> {
    if kappa > 0.0 || !(r0 > 0.0) || !(big_r >= 2.0 * r0) {
        return Err(Error::Argument(format!(
            "Ricci cover bound needs kappa <= 0 and R >= 2 r0 > 0, got kappa={kappa}, R={big_r}, r0={r0}"
        )));
    }
    let params = ModelSpaceParams::new(kappa, d)?;
    let c = 2f64.powi(d as i32) / unit_ball_volume(d);
    let sk = (-kappa).sqrt();
    let value = c * (c1 + c2 * sk * (big_r + r0)) / big_r * model_volume(params, 2.0 * big_r + r0)?;
    let half_radius_form = if (r0 - 0.5 * big_r).abs() <= 1e-12 * big_r {
        Some(c * (c1 + 1.5 * c2 * sk * big_r) / big_r * model_volume(params, 2.5 * big_r)?)
    } else {
        None
    };
    Ok(RicciRhs { value, half_radius_form })
}

/// Universal nonnegative-curvature growth bound (5^d d)^{1/(d−1)} R.
pub fn nonneg_ricci_growth_bound(d: usize, big_r: f64) -> f64 {
    (5f64.powi(d as i32) * d as f64).powf(1.0 / (d as f64 - 1.0)) * big_r
}

/// Growth bound (3^d d ω_d / ϑ)^{1/(d−1)} R under vol(B_r) ≥ ϑ r^d.
pub fn theta_growth_bound(d: usize, vartheta: f64, big_r: f64) -> f64 {
    (3f64.powi(d as i32) * d as f64 * unit_ball_volume(d) / vartheta).powf(1.0 / (d as f64 - 1.0)) * big_r
}

/// Measured k r_{k^{d−1}}(∂B_R) against both nonnegative-curvature bounds;
/// for d = 2 also records the lower sanity check 2R ≤ value.
pub fn euclid_growth_check<S: SphereSampling>(
    space: &S,
    x0: &S::Point,
    radii: &[f64],
    k: usize,
    d: usize,
    vartheta: f64,
    sphere_n: usize,
) -> Result<(BoundLedger, GrowthCurve)> {
    if d < 2 {
        return Err(Error::Argument("covering growth bounds need d >= 2".into()));
    }
    let curve = growth_curve(space, x0, radii, k, d, sphere_n, None)?;
    let mut ledger = BoundLedger::new();
    for row in &curve.rows {
        let p = json!({"R": row.radius, "k": k, "d": d, "vartheta": vartheta});
        ledger.push(LedgerEntry::new(
            "nonneg_ricci_growth",
            "N^(1/(d-1)) r_N(sphere) <= (5^d d)^(1/(d-1)) R",
            row.value,
            nonneg_ricci_growth_bound(d, row.radius),
            p.clone(),
        ));
        ledger.push(LedgerEntry::new(
            "theta_growth",
            "N^(1/(d-1)) r_N(sphere) <= (3^d d omega_d / vartheta)^(1/(d-1)) R",
            row.value,
            theta_growth_bound(d, vartheta, row.radius),
            p.clone(),
        ));
        if d == 2 {
            ledger.push(LedgerEntry::new("antipodal_lower", "2R <= k r_k(circle)", 2.0 * row.radius, row.value, p));
        }
    }
    Ok((ledger, curve))
}

/// Measured growth against (2^{2d−1} d 𝒜(R)^{d−1})^{1/(d−1)} on a model
/// backend, where 𝒜 = sin_κ bounds the exponential-map differential.
pub fn exp_map_growth_check<S: SphereSampling + RadialGeometry>(
    space: &S,
    x0: &S::Point,
    radii: &[f64],
    k: usize,
    d: usize,
    sphere_n: usize,
) -> Result<(BoundLedger, GrowthCurve)> {
    if d < 2 {
        return Err(Error::Argument("covering growth bounds need d >= 2".into()));
    }
    let curve = growth_curve(space, x0, radii, k, d, sphere_n, None)?;
    let mut ledger = BoundLedger::new();
    let e = 1.0 / (d as f64 - 1.0);
    for row in &curve.rows {
        let a = exp_growth_a(space.model(), row.radius)?;
        let rhs = (2f64.powi(2 * d as i32 - 1) * d as f64 * a.powi(d as i32 - 1)).powf(e);
        ledger.push(LedgerEntry::new(
            "exp_map_growth",
            "N r_N(sphere)^(d-1) <= 2^(2d-1) d A(R)^(d-1)",
            row.value,
            rhs,
            json!({"R": row.radius, "k": k, "d": d, "A": a}),
        ));
    }
    Ok((ledger, curve))
}

/// Volumetric chain on geodesic spheres: for r₀ = R/2 the measured
/// C_{d−1}(∂B_R; 2r₀) upper certificate is at most
/// 2^d ϑ⁻¹ sup_{r ≤ r₀} (vol B_{R+r} − vol B_{R−r})/(2r).
pub fn sphere_volume_check<S: SphereSampling + VolumeMeasure>(
    space: &S,
    x0: &S::Point,
    radii: &[f64],
    d: usize,
    sphere_n: usize,
) -> Result<BoundLedger> {
    let mut ledger = BoundLedger::new();
    for &big_r in radii {
        let r0 = 0.5 * big_r;
        let sample = space.sample_sphere(x0, big_r, sphere_n, space.default_band())?;
        let cover_grid = geometric_grid(big_r / 16.0, 2.0 * r0)?;
        let cm = cm_estimate(space, &sample.points, d as f64 - 1.0, &cover_grid)?;
        let vol_grid = geometric_grid(r0 / 16.0, r0)?;
        let theta = crate::covering::theta_estimate(space, &sample.points, d as f64, &vol_grid)?;
        let mut sup: f64 = 0.0;
        for &r in &vol_grid {
            let outer = space.ball_volume(x0, big_r + r)?;
            let inner = space.ball_volume(x0, big_r - r)?;
            sup = sup.max((outer - inner) / (2.0 * r));
        }
        let rhs = 2f64.powi(d as i32) / theta * sup;
        ledger.push(LedgerEntry::new(
            "sphere_volume_chain",
            "C_(d-1)(sphere; 2 r0) <= 2^d vartheta^-1 sup_(r <= r0) P(R; r)",
            cm.upper,
            rhs,
            json!({"R": big_r, "r0": r0, "d": d, "vartheta": theta, "sup_perimeter": sup, "cm_lower": cm.lower}),
        ));
    }
    Ok(ledger)
}

/// Comparison of C_m certificates with the Minkowski curve
/// ν(A^r)/(ω_{d−m} r^{d−m}):
/// sup N r^m ≤ 2^m ω_{d−m} ϑ⁻¹ sup curve (volumetric packing bound), and
/// inf curve ≤ 2^d ω_d ω_{d−m}⁻¹ · density · inf N r^m (cover fattening),
/// where `density` bounds ν(B_r(x))/(ω_d r^d) near A. The third entry uses
/// the coarser factor 2^d/ω_{d−m} on the upper side.
pub fn minkowski_consistency(
    cm: &crate::covering::CmEstimate,
    curve: &[crate::covering::MinkowskiRow],
    d: usize,
    m: usize,
    theta: f64,
    density: f64,
) -> Result<BoundLedger> {
    if curve.is_empty() || cm.rows.is_empty() || m > d {
        return Err(Error::Argument("Minkowski consistency needs nonempty curves and m <= d".into()));
    }
    let sup_curve = curve.iter().map(|c| c.value).fold(0.0, f64::max);
    let inf_curve = curve.iter().map(|c| c.value).fold(f64::INFINITY, f64::min);
    let inf_lower = cm.rows.iter().map(|row| row.lower_count as f64 * row.r.powi(m as i32)).fold(f64::INFINITY, f64::min);
    let w_dm = unit_ball_volume(d - m);
    let p = json!({"d": d, "m": m, "theta": theta, "density": density, "sup_curve": sup_curve, "inf_curve": inf_curve});
    let mut ledger = BoundLedger::new();
    ledger.push(LedgerEntry::new(
        "minkowski_upper",
        "sup N(A;r) r^m <= 2^m omega_(d-m) / theta * sup Minkowski curve",
        cm.upper,
        2f64.powi(m as i32) * w_dm / theta * sup_curve,
        p.clone(),
    ));
    ledger.push(LedgerEntry::new(
        "minkowski_lower",
        "inf Minkowski curve <= 2^d omega_d / omega_(d-m) * density * inf N(A;r) r^m",
        inf_curve,
        2f64.powi(d as i32) * unit_ball_volume(d) / w_dm * density * inf_lower,
        p.clone(),
    ));
    ledger.push(LedgerEntry::new(
        "minkowski_upper_coarse",
        "sup N(A;r) r^m <= 2^d / omega_(d-m) * sup Minkowski curve",
        cm.upper,
        2f64.powi(d as i32) / w_dm * sup_curve,
        p,
    ));
    Ok(ledger)
}

/// Cardinality of the ℓ¹ ball of radius k in ℤᵈ.
pub fn word_ball(d: usize, k: u64) -> u128 {
    if d == 0 {
        return 1;
    }
    // counts[j]: points of ℤ^i with ℓ¹ norm ≤ j, for j = 0..=k.
    let k = k as usize;
    let mut counts: Vec<u128> = (0..=k).map(|j| 2 * j as u128 + 1).collect();
    for _ in 1..d {
        let next: Vec<u128> = (0..=k).map(|j| counts[j] + 2 * (1..=j).map(|t| counts[j - t]).sum::<u128>()).collect();
        counts = next;
    }
    counts[k]
}

/// Growth function β(k) of ℤᵈ with its canonical generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupGrowth {
    pub d: usize,
    pub beta: Vec<u128>,
}

impl GroupGrowth {
    pub fn new(d: usize, k_max: u64) -> Result<Self> {
        if d == 0 {
            return Err(Error::Argument("group rank must be >= 1".into()));
        }
        Ok(Self { d, beta: (0..=k_max).map(|k| word_ball(d, k)).collect() })
    }

    pub fn beta(&self, k: u64) -> u128 {
        match self.beta.get(k as usize) {
            Some(b) => *b,
            None => word_ball(self.d, k),
        }
    }
}

fn check_quasi_isometry(lambda: f64, eps: f64) -> Result<()> {
    if !(lambda >= 1.0) || !(eps >= 0.0) {
        return Err(Error::Argument(format!("quasi-isometry constants need lambda >= 1, eps >= 0, got {lambda}, {eps}")));
    }
    Ok(())
}

/// β(⌊λ(R + r₀ + ε)⌋), bounding translates of B_{r₀}(x₀) needed for B_R(x₀).
pub fn ball_cover_bound(beta: &GroupGrowth, lambda: f64, eps: f64, r0: f64, big_r: f64) -> Result<u128> {
    check_quasi_isometry(lambda, eps)?;
    if !(r0 > 0.0) || !(big_r >= 0.0) {
        return Err(Error::Argument(format!("ball cover bound needs r0 > 0 and R >= 0, got {r0}, {big_r}")));
    }
    Ok(beta.beta((lambda * (big_r + r0 + eps)).floor() as u64))
}

/// β(⌊λ(R₂ + r₀ + ε)⌋) − β(⌊λ⁻¹(R₁ − r₀ − ε)⌋) for the annulus B_{R₂} \ B_{R₁}.
pub fn annulus_cover_bound(beta: &GroupGrowth, lambda: f64, eps: f64, r0: f64, r1: f64, r2: f64) -> Result<u128> {
    check_quasi_isometry(lambda, eps)?;
    if !(r0 > 0.0) || !(r2 > r1) || !(r1 >= r0 + eps) {
        return Err(Error::Argument(format!("annulus bound needs R2 > R1 >= r0 + eps, got R1={r1}, R2={r2}, r0={r0}, eps={eps}")));
    }
    let outer = beta.beta((lambda * (r2 + r0 + eps)).floor() as u64);
    let inner = beta.beta(((r1 - r0 - eps) / lambda).floor() as u64);
    Ok(outer - inner)
}

/// Translate counts at one radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslateCount {
    #[serde(rename = "R")]
    pub radius: f64,
    /// #{γ : γK ∩ B̄_R(x₀) ≠ ∅} for the fundamental square K.
    pub cell_translates: usize,
    /// #{γ : γB̄_{r₀}(x₀) ∩ B̄_R(x₀) ≠ ∅}.
    pub ball_translates: usize,
    pub bound: u128,
}

/// Measured action constants and translate counts on a periodic mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicReport {
    pub lambda: f64,
    pub eps: f64,
    pub delta: f64,
    /// Radius of K about x₀; r₀ is the larger of this and δ, nudged up.
    pub cell_radius: f64,
    pub r0: f64,
    pub counts: Vec<TranslateCount>,
    pub growth: GrowthCurve,
    /// C in value ≤ C R^{(α+d−1)/(d−1)}, fitted at the smallest R.
    pub growth_constant: f64,
}

/// Periodic-surface checks for the ℤ² action by period translations:
/// translate counts against β(⌊λ(R + r₀ + ε)⌋) and the growth exponent
/// value ≤ C R³ with C calibrated at the smallest R.
pub fn periodic_cover_check(mesh: &MeshSurface, x0: usize, radii: &[f64], k: usize) -> Result<(BoundLedger, PeriodicReport)> {
    let g = *mesh.grid().ok_or_else(|| Error::Config("periodic cover check needs a grid mesh with a translation action".into()))?;
    if radii.is_empty() || radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Argument("radii must be nonempty and strictly increasing".into()));
    }
    let s = g.steps_per_period;
    let i0 = x0 / g.n;
    let j0 = x0 % g.n;
    if i0 + s >= g.n || j0 + s >= g.n {
        return Err(Error::Config("fundamental cell at x0 leaves the mesh".into()));
    }
    let field = mesh.distance_field(x0);
    let reach = mesh.boundary_distance(x0);
    let cell: Vec<usize> = (i0..=i0 + s).flat_map(|i| (j0..=j0 + s).map(move |j| i * g.n + j)).collect();
    let cell_radius = cell.iter().map(|&v| field[v]).fold(0.0, f64::max);

    // Orbit points of x₀ that stay within the trusted ball around x₀.
    let span = (reach / g.period).ceil() as i64 + 1;
    let mut orbit: Vec<((i64, i64), usize)> = Vec::new();
    for a in -span..=span {
        for b in -span..=span {
            if let Some(v) = mesh.translate(x0, a, b) {
                if field[v] < reach {
                    orbit.push(((a, b), v));
                }
            }
        }
    }
    let mut lambda: f64 = 1.0;
    for &((a, b), v) in &orbit {
        let w = (a.abs() + b.abs()) as f64;
        if w > 0.0 {
            lambda = lambda.max(field[v] / w).max(w / field[v]);
        }
    }
    let eps = orbit
        .iter()
        .map(|&((a, b), v)| {
            let w = (a.abs() + b.abs()) as f64;
            (field[v] - lambda * w).max(w / lambda - field[v]).max(0.0)
        })
        .fold(0.0, f64::max);

    // δ over the cell: nearest orbit point among the neighbouring translates.
    let near: Vec<usize> = (-1..=2).flat_map(|a| (-1..=2).map(move |b| (a, b))).filter_map(|(a, b)| mesh.translate(x0, a, b)).collect();
    let fields: Vec<_> = near.par_iter().map(|&v| mesh.distance_field(v)).collect();
    let delta = cell.iter().map(|&v| fields.iter().map(|f| f[v]).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max);
    let r0 = cell_radius.max(delta) * (1.0 + 1e-9) + f64::MIN_POSITIVE;

    let r_max = *radii.last().expect("nonempty");
    if reach <= r_max + 2.0 * r0 {
        return Err(Error::Boundary { radius: r_max, band: 2.0 * r0, boundary_distance: reach });
    }
    let group = GroupGrowth::new(2, (lambda * (r_max + r0 + eps)).floor() as u64 + 1)?;
    let mut ledger = BoundLedger::new();
    let mut counts = Vec::with_capacity(radii.len());
    for &big_r in radii {
        let mut cells = 0;
        let mut balls = 0;
        for a in -span..=span {
            for b in -span..=span {
                // Translates reaching B_R lie inside the trusted region.
                let hit = cell.iter().filter_map(|&v| mesh.translate(v, a, b)).any(|u| field[u] <= big_r);
                cells += hit as usize;
                if let Some(c) = mesh.translate(x0, a, b) {
                    balls += (field[c] <= big_r + r0) as usize;
                }
            }
        }
        let bound = ball_cover_bound(&group, lambda, eps, r0, big_r)?;
        let p = json!({"R": big_r, "lambda": lambda, "eps": eps, "r0": r0, "delta": delta});
        ledger.push(LedgerEntry::new(
            "cell_translates",
            "#{g : gK meets B_R(x0)} <= beta(floor(lambda (R + r0 + eps)))",
            cells as f64,
            bound as f64,
            p.clone(),
        ));
        ledger.push(LedgerEntry::new(
            "ball_translates",
            "#{g : g B_r0(x0) meets B_R(x0)} <= beta(floor(lambda (R + r0 + eps)))",
            balls as f64,
            bound as f64,
            p,
        ));
        counts.push(TranslateCount { radius: big_r, cell_translates: cells, ball_translates: balls, bound });
    }

    // Growth exponent: α = d = 2, so (α + d − 1)/(d − 1) = 3.
    let growth = growth_curve(mesh, &x0, radii, k, 2, 1, None)?;
    let first = &growth.rows[0];
    let growth_constant = first.value / first.radius.powi(3);
    for row in &growth.rows[1..] {
        ledger.push(LedgerEntry::new(
            "periodic_growth_exponent",
            "k r_k(sphere) <= C R^((alpha + d - 1)/(d - 1)), C fitted at the smallest R",
            row.value,
            growth_constant * row.radius.powi(3),
            json!({"R": row.radius, "k": k, "C": growth_constant}),
        ));
    }
    Ok((ledger, PeriodicReport { lambda, eps, delta, cell_radius, r0, counts, growth, growth_constant }))
}

/// Bishop-Gromov ratios vol(B_r(x₀))/vol_κ(r) for increasing r.
pub fn bishop_gromov_ratios<S: VolumeMeasure>(space: &S, x0: &S::Point, kappa: f64, rs: &[f64]) -> Result<Vec<f64>> {
    if rs.is_empty() || rs.windows(2).any(|w| w[0] >= w[1]) || !(rs[0] > 0.0) {
        return Err(Error::Argument("radii must be positive and strictly increasing".into()));
    }
    let params = ModelSpaceParams::new(kappa, space.dim())?;
    rs.iter().map(|&r| Ok(space.ball_volume(x0, r)? / model_volume(params, r)?)).collect()
}

/// Consecutive ratios must satisfy ratio_{i+1} ≤ slack · ratio_i; a
/// failure falsifies `kappa_lb` as a Ricci lower bound for the backend.
pub fn bishop_gromov_check<S: VolumeMeasure>(space: &S, x0: &S::Point, kappa_lb: f64, rs: &[f64], slack: f64) -> Result<BoundLedger> {
    let ratios = bishop_gromov_ratios(space, x0, kappa_lb, rs)?;
    let mut ledger = BoundLedger::new();
    for i in 1..ratios.len() {
        ledger.push(LedgerEntry::new(
            "bishop_gromov",
            "vol(B_r)/vol_kappa(r) is nonincreasing in r",
            ratios[i],
            slack * ratios[i - 1],
            json!({"space": space.name(), "kappa": kappa_lb, "r_prev": rs[i - 1], "r": rs[i], "slack": slack}),
        ));
    }
    Ok(ledger)
}
