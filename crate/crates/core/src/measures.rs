//! Finite measures as weighted point clouds, parametric samplers, moments,
//! radial pushforwards and truncation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{integrate, stable_sum_by};
use crate::spaces::{MetricSpace, RadialGeometry};

/// Atoms drawn per independent generator stream.
const SAMPLE_CHUNK: usize = 4096;
const TABLE_CELLS: usize = 4096;

/// A finite measure Σ wᵢ δ_{xᵢ}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measure<P> {
    pub atoms: Vec<P>,
    pub weights: Vec<f64>,
    /// Sampler family that produced the atoms, if any.
    pub family: Option<String>,
    pub seed: Option<u64>,
}

impl<P: Clone> Measure<P> {
    pub fn new(atoms: Vec<P>, weights: Vec<f64>) -> Result<Self> {
        if atoms.len() != weights.len() {
            return Err(Error::Argument(format!("{} atoms but {} weights", atoms.len(), weights.len())));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(Error::Argument(format!("weights must be finite and nonnegative, found {w}")));
        }
        Ok(Self { atoms, weights, family: None, seed: None })
    }

    /// Equal weights summing to one.
    pub fn uniform(atoms: Vec<P>) -> Self {
        let w = 1.0 / atoms.len().max(1) as f64;
        let weights = vec![w; atoms.len()];
        Self { atoms, weights, family: None, seed: None }
    }

    pub fn empty() -> Self {
        Self { atoms: Vec::new(), weights: Vec::new(), family: None, seed: None }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        let w = &self.weights;
        stable_sum_by(w.len(), |i| w[i])
    }

    /// μ + ν as the concatenation of atom lists.
    pub fn add(&self, other: &Self) -> Self {
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        let mut weights = self.weights.clone();
        weights.extend(&other.weights);
        Self { atoms, weights, family: None, seed: None }
    }

    /// t·μ for t ≥ 0.
    pub fn scale(&self, t: f64) -> Self {
        Self {
            atoms: self.atoms.clone(),
            weights: self.weights.iter().map(|w| w * t).collect(),
            family: self.family.clone(),
            seed: self.seed,
        }
    }

    /// Checks every atom against the space.
    pub fn validate<S: MetricSpace<Point = P>>(&self, space: &S) -> Result<()> {
        self.atoms.iter().try_for_each(|a| space.validate(a))
    }
}

/// Pushforward of a measure under r = d(·, x₀).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialMeasure {
    pub radii: Vec<f64>,
    pub weights: Vec<f64>,
}

impl RadialMeasure {
    pub fn new(radii: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if radii.len() != weights.len() {
            return Err(Error::Argument(format!("{} radii but {} weights", radii.len(), weights.len())));
        }
        if let Some(r) = radii.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
            return Err(Error::Argument(format!("radii must be finite and nonnegative, found {r}")));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(Error::Argument(format!("weights must be finite and nonnegative, found {w}")));
        }
        Ok(Self { radii, weights })
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        stable_sum_by(self.weights.len(), |i| self.weights[i])
    }

    /// Σ wᵢ rᵢ^q, with 0⁰ = 1.
    pub fn moment(&self, q: f64) -> f64 {
        stable_sum_by(self.radii.len(), |i| self.weights[i] * pow0(self.radii[i], q))
    }

    /// (radius, weight) pairs sorted by radius.
    pub fn sorted(&self) -> Vec<(f64, f64)> {
        let mut v: Vec<(f64, f64)> = self.radii.iter().copied().zip(self.weights.iter().copied()).collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    }

    /// Smallest radius r with μ₁([0, r]) ≥ t·mass.
    pub fn quantile(&self, t: f64) -> Option<f64> {
        let pairs = self.sorted();
        let target = t.clamp(0.0, 1.0) * self.total_mass();
        let mut acc = 0.0;
        for (r, w) in &pairs {
            acc += w;
            if acc >= target {
                return Some(*r);
            }
        }
        pairs.last().map(|p| p.0)
    }

    /// The same measure as atoms on the real line.
    pub fn to_line_measure(&self) -> Measure<Vec<f64>> {
        Measure { atoms: self.radii.iter().map(|r| vec![*r]).collect(), weights: self.weights.clone(), family: None, seed: None }
    }
}

fn pow0(r: f64, q: f64) -> f64 {
    if q == 0.0 {
        1.0
    } else {
        r.powf(q)
    }
}

/// Σᵢ wᵢ d(xᵢ, x₀)^q.
pub fn moment<S: MetricSpace>(space: &S, mu: &Measure<S::Point>, x0: &S::Point, q: f64) -> Result<f64> {
    if !(q >= 0.0) {
        return Err(Error::Argument(format!("moment order must be >= 0, got {q}")));
    }
    space.validate(x0)?;
    Ok(stable_sum_by(mu.len(), |i| mu.weights[i] * pow0(space.distance(&mu.atoms[i], x0), q)))
}

pub fn radial_pushforward<S: MetricSpace>(space: &S, mu: &Measure<S::Point>, x0: &S::Point) -> Result<RadialMeasure> {
    space.validate(x0)?;
    let radii: Vec<f64> = mu.atoms.par_iter().map(|a| space.distance(a, x0)).collect();
    Ok(RadialMeasure { radii, weights: mu.weights.clone() })
}

/// Restriction to the open ball B_R(x₀) together with tail statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Truncation<P> {
    pub inside: Measure<P>,
    /// Mass outside B_R(x₀); `inside.total_mass() + tail_mass` equals the
    /// total mass bit for bit when any float tail can, else is off by one ulp.
    pub tail_mass: f64,
    /// ∫ over the complement of 1 + d^{p+δ} + f(d)^p.
    pub tail_integrand: f64,
}

pub fn truncate<S: MetricSpace>(
    space: &S,
    mu: &Measure<S::Point>,
    x0: &S::Point,
    radius: f64,
    p: f64,
    delta: f64,
    f: &(dyn Fn(f64) -> f64 + Sync),
) -> Result<Truncation<S::Point>> {
    if !(radius > 0.0) {
        return Err(Error::Argument(format!("truncation radius must be positive, got {radius}")));
    }
    let radial = radial_pushforward(space, mu, x0)?;
    let mut atoms = Vec::new();
    let mut weights = Vec::new();
    let mut tail_integrand = 0.0;
    for (i, &r) in radial.radii.iter().enumerate() {
        if r < radius {
            atoms.push(mu.atoms[i].clone());
            weights.push(mu.weights[i]);
        } else {
            tail_integrand += mu.weights[i] * (1.0 + r.powf(p + delta) + f(r).powf(p));
        }
    }
    let inside = Measure { atoms, weights, family: mu.family.clone(), seed: mu.seed };
    let total = mu.total_mass();
    let inner = inside.total_mass();
    // Smallest non-negative t with inner + t ≥ total; bit order is monotone on non-negative floats.
    let (mut lo, mut hi) = (0u64, total.to_bits());
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if inner + f64::from_bits(mid) >= total {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    // Rounding can skip total; then keep whichever neighbour lands closer.
    let above = f64::from_bits(lo);
    let tail_mass =
        if lo > 0 && total - (inner + f64::from_bits(lo - 1)) < (inner + above) - total { f64::from_bits(lo - 1) } else { above };
    Ok(Truncation { inside, tail_mass, tail_integrand })
}

/// Test-measure families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    /// Volume measure restricted to B_R(x₀), normalized.
    UniformBall { radius: f64 },
    /// Density ∝ e^{−λ d(x, x₀)} with respect to volume.
    RadialExp { lambda: f64 },
    /// Radial law ∝ (1 + r)^{−γ}; moments of order q < γ − 1 are finite.
    RadialPareto { gamma: f64 },
    /// Uniform on the coordinate box [lo, hi].
    UniformBox { lo: Vec<f64>, hi: Vec<f64> },
    /// Cell midpoints of a regular grid on [lo, hi]; n must be a perfect
    /// d-th power.
    Grid { lo: Vec<f64>, hi: Vec<f64> },
}

impl Family {
    pub fn label(&self) -> String {
        match self {
            Family::UniformBall { radius } => format!("uniform_ball(R={radius})"),
            Family::RadialExp { lambda } => format!("radial_exp(lambda={lambda})"),
            Family::RadialPareto { gamma } => format!("radial_pareto(gamma={gamma})"),
            Family::UniformBox { lo, hi } => format!("uniform_box(lo={lo:?}, hi={hi:?})"),
            Family::Grid { lo, hi } => format!("grid(lo={lo:?}, hi={hi:?})"),
        }
    }
}

/// Inverse-CDF table for a radial density on [0, r_max].
struct RadialTable {
    r: Vec<f64>,
    cdf: Vec<f64>,
}

impl RadialTable {
    fn new(density: impl Fn(f64) -> f64, r_max: f64) -> Self {
        let r: Vec<f64> = (0..=TABLE_CELLS).map(|i| r_max * i as f64 / TABLE_CELLS as f64).collect();
        let mut cdf = vec![0.0; TABLE_CELLS + 1];
        for i in 0..TABLE_CELLS {
            cdf[i + 1] = cdf[i] + integrate(&density, r[i], r[i + 1], 1e-10);
        }
        let total = cdf[TABLE_CELLS];
        cdf.iter_mut().for_each(|c| *c /= total);
        Self { r, cdf }
    }

    fn invert(&self, u: f64) -> f64 {
        let i = self.cdf.partition_point(|c| *c < u).clamp(1, TABLE_CELLS);
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let t = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        self.r[i - 1] + t.clamp(0.0, 1.0) * (self.r[i] - self.r[i - 1])
    }
}

enum RadialLaw {
    Table(RadialTable),
    Pareto { gamma: f64 },
    FlatBall { radius: f64, d: usize },
}

impl RadialLaw {
    fn draw(&self, u: f64) -> f64 {
        match self {
            RadialLaw::Table(t) => t.invert(u),
            RadialLaw::Pareto { gamma } => (1.0 - u).powf(-1.0 / (gamma - 1.0)) - 1.0,
            RadialLaw::FlatBall { radius, d } => radius * u.powf(1.0 / *d as f64),
        }
    }
}

fn radial_law<S: RadialGeometry>(space: &S, family: &Family) -> Result<RadialLaw> {
    let model = space.model();
    let (kappa, d) = (model.kappa, model.d);
    let area = move |r: f64| crate::spaces::sin_kappa(kappa, r).unwrap_or(0.0).powi(d as i32 - 1);
    match *family {
        Family::UniformBall { radius } => {
            if !(radius > 0.0) || radius > space.max_radius() {
                return Err(Error::Config(format!("uniform_ball radius must lie in (0, {}], got {radius}", space.max_radius())));
            }
            if kappa == 0.0 {
                Ok(RadialLaw::FlatBall { radius, d })
            } else {
                Ok(RadialLaw::Table(RadialTable::new(area, radius)))
            }
        }
        Family::RadialExp { lambda } => {
            let growth = (d as f64 - 1.0) * (-kappa).max(0.0).sqrt();
            if !(lambda > growth) {
                return Err(Error::Config(format!("radial_exp needs lambda > {growth} to be normalizable in this space, got {lambda}")));
            }
            let rate = lambda - growth;
            let r_max = (60.0 / rate + 10.0 * d as f64 / lambda).min(space.max_radius());
            Ok(RadialLaw::Table(RadialTable::new(move |r| (-lambda * r).exp() * area(r), r_max)))
        }
        Family::RadialPareto { gamma } => {
            if !(gamma > 1.0) {
                return Err(Error::Config(format!("radial_pareto needs gamma > 1, got {gamma}")));
            }
            Ok(RadialLaw::Pareto { gamma })
        }
        Family::UniformBox { .. } | Family::Grid { .. } => unreachable!("box families are not radial"),
    }
}

fn random_direction(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    if d == 1 {
        return vec![if rng.random::<bool>() { 1.0 } else { -1.0 }];
    }
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn check_box(lo: &[f64], hi: &[f64], d: usize) -> Result<()> {
    if lo.len() != d || hi.len() != d || lo.iter().zip(hi).any(|(a, b)| !(a < b)) {
        return Err(Error::Config(format!("box bounds must have {d} coordinates with lo < hi")));
    }
    Ok(())
}

/// Draws `n` equal-weight atoms (total mass 1). Chunk c of `SAMPLE_CHUNK`
/// atoms uses its own ChaCha stream, so results do not depend on the thread
/// count.
pub fn sample_family<S: RadialGeometry>(space: &S, x0: &S::Point, family: &Family, n: usize, seed: u64) -> Result<Measure<S::Point>> {
    if n == 0 {
        return Err(Error::Argument("sample size must be >= 1".into()));
    }
    space.validate(x0)?;
    let d = space.dim();
    let chunks = n.div_ceil(SAMPLE_CHUNK);
    let stream_rng = |c: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        rng
    };
    let atoms: Vec<S::Point> = match family {
        Family::UniformBox { lo, hi } => {
            check_box(lo, hi, d)?;
            let parts: Result<Vec<Vec<S::Point>>> = (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let mut rng = stream_rng(c);
                    (c * SAMPLE_CHUNK..((c + 1) * SAMPLE_CHUNK).min(n))
                        .map(|_| {
                            let x: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| a + (b - a) * rng.random::<f64>()).collect();
                            space.from_coords(&x)
                        })
                        .collect()
                })
                .collect();
            parts?.into_iter().flatten().collect()
        }
        Family::Grid { lo, hi } => {
            check_box(lo, hi, d)?;
            let per_side = (n as f64).powf(1.0 / d as f64).round() as usize;
            if per_side.pow(d as u32) != n {
                return Err(Error::Config(format!("grid sample size {n} is not a perfect {d}-th power")));
            }
            (0..n)
                .map(|mut i| {
                    let mut x = vec![0.0; d];
                    for k in 0..d {
                        let j = i % per_side;
                        i /= per_side;
                        x[k] = lo[k] + (hi[k] - lo[k]) * (j as f64 + 0.5) / per_side as f64;
                    }
                    space.from_coords(&x)
                })
                .collect::<Result<_>>()?
        }
        _ => {
            let law = radial_law(space, family)?;
            let max_r = space.max_radius();
            let parts: Result<Vec<Vec<S::Point>>> = (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let mut rng = stream_rng(c);
                    (c * SAMPLE_CHUNK..((c + 1) * SAMPLE_CHUNK).min(n))
                        .map(|_| {
                            let r = law.draw(rng.random::<f64>());
                            if r > max_r {
                                return Err(Error::Domain(format!("sampled radius {r} exceeds the resolved range {max_r}")));
                            }
                            let u = random_direction(&mut rng, d);
                            Ok(space.point_along(x0, &u, r))
                        })
                        .collect()
                })
                .collect();
            parts?.into_iter().flatten().collect()
        }
    };
    let mut mu = Measure::uniform(atoms);
    mu.family = Some(family.label());
    mu.seed = Some(seed);
    Ok(mu)
}

/// Metadata written next to a measure CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureSidecar {
    pub space: String,
    pub family: Option<String>,
    pub seed: Option<u64>,
    pub atoms: usize,
    pub total_mass: f64,
}

/// CSV with columns `x1..xk,weight`.
pub fn to_csv<S: MetricSpace>(space: &S, mu: &Measure<S::Point>) -> String {
    let k = mu.atoms.first().map(|a| space.coords(a).len()).unwrap_or(space.dim());
    let mut out: String = (1..=k).map(|i| format!("x{i},")).collect();
    out.push_str("weight\n");
    for (a, w) in mu.atoms.iter().zip(&mu.weights) {
        for c in space.coords(a) {
            out.push_str(&format!("{c},"));
        }
        out.push_str(&format!("{w}\n"));
    }
    out
}

pub fn sidecar<S: MetricSpace>(space: &S, mu: &Measure<S::Point>) -> MeasureSidecar {
    MeasureSidecar { space: space.name(), family: mu.family.clone(), seed: mu.seed, atoms: mu.len(), total_mass: mu.total_mass() }
}

/// Parses the CSV written by [`to_csv`].
pub fn from_csv<S: MetricSpace>(space: &S, text: &str) -> Result<Measure<S::Point>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty measure CSV".into()))?;
    let cols = header.split(',').count();
    if cols < 2 || !header.ends_with("weight") {
        return Err(Error::Parse(format!("unexpected measure CSV header {header:?}")));
    }
    let mut atoms = Vec::new();
    let mut weights = Vec::new();
    for (lineno, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let vals: std::result::Result<Vec<f64>, _> = line.split(',').map(|v| v.trim().parse::<f64>()).collect();
        let vals = vals.map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))?;
        if vals.len() != cols {
            return Err(Error::Parse(format!("line {}: expected {cols} fields", lineno + 2)));
        }
        atoms.push(space.from_coords(&vals[..cols - 1])?);
        weights.push(vals[cols - 1]);
    }
    Measure::new(atoms, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{Euclidean, HyperbolicPlane};

    #[test]
    fn moment_examples() {
        let e = Euclidean::new(2).unwrap();
        let mu = Measure::new(vec![vec![2.0, 0.0]], vec![1.0]).unwrap();
        assert_eq!(moment(&e, &mu, &vec![0.0, 0.0], 2.0).unwrap(), 4.0);
        let mu = Measure::new(vec![vec![1.0, 1.0], vec![3.0, -2.0]], vec![0.25, 2.0]).unwrap();
        assert_eq!(moment(&e, &mu, &vec![0.0, 0.0], 0.0).unwrap(), mu.total_mass());
        assert!(moment(&e, &mu, &vec![0.0, 0.0], -1.0).is_err());
    }

    #[test]
    fn uniform_interval_first_moment() {
        let line = Euclidean::new(1).unwrap();
        let fam = Family::UniformBox { lo: vec![0.0], hi: vec![1.0] };
        let mu = sample_family(&line, &vec![0.0], &fam, 10_000, 3).unwrap();
        let m = moment(&line, &mu, &vec![0.0], 1.0).unwrap();
        assert!((m - 0.5).abs() < 0.01, "{m}");
    }

    #[test]
    fn uniform_disk_mean_radius() {
        let e = Euclidean::new(2).unwrap();
        let mu = sample_family(&e, &vec![0.0, 0.0], &Family::UniformBall { radius: 1.0 }, 100_000, 1).unwrap();
        let m = moment(&e, &mu, &vec![0.0, 0.0], 1.0).unwrap();
        assert!((m - 2.0 / 3.0).abs() < 0.01, "{m}");
        assert!((mu.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hyperbolic_uniform_ball_matches_volume_cdf() {
        // P(r < 1) = (cosh 1 − 1)/(cosh 2 − 1) for the uniform law on B_2.
        let h = HyperbolicPlane::new();
        let mu = sample_family(&h, &[0.0, 0.0], &Family::UniformBall { radius: 2.0 }, 40_000, 9).unwrap();
        let radial = radial_pushforward(&h, &mu, &[0.0, 0.0]).unwrap();
        let frac = radial.radii.iter().filter(|r| **r < 1.0).count() as f64 / radial.len() as f64;
        let exact = (1f64.cosh() - 1.0) / (2f64.cosh() - 1.0);
        assert!((frac - exact).abs() < 3.0 / 200.0, "{frac} vs {exact}");
    }

    #[test]
    fn single_atom_sample() {
        let h = HyperbolicPlane::new();
        let mu = sample_family(&h, &[0.0, 0.0], &Family::RadialExp { lambda: 3.0 }, 1, 0).unwrap();
        assert_eq!(mu.len(), 1);
        assert_eq!(mu.total_mass(), 1.0);
    }

    #[test]
    fn family_parameter_errors() {
        let e = Euclidean::new(2).unwrap();
        let x0 = vec![0.0, 0.0];
        assert!(matches!(sample_family(&e, &x0, &Family::RadialPareto { gamma: 1.0 }, 10, 0), Err(Error::Config(_))));
        let h = HyperbolicPlane::new();
        assert!(matches!(sample_family(&h, &[0.0, 0.0], &Family::RadialExp { lambda: 0.9 }, 10, 0), Err(Error::Config(_))));
        assert!(matches!(sample_family(&e, &x0, &Family::Grid { lo: vec![0.0; 2], hi: vec![1.0; 2] }, 10, 0), Err(Error::Config(_))));
    }

    #[test]
    fn sampler_is_deterministic() {
        let e = Euclidean::new(3).unwrap();
        let fam = Family::RadialExp { lambda: 1.0 };
        let a = sample_family(&e, &vec![0.0; 3], &fam, 9000, 42).unwrap();
        let b = sample_family(&e, &vec![0.0; 3], &fam, 9000, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_family(&e, &vec![0.0; 3], &fam, 9000, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn flat_exponential_radius_mean() {
        // In ℝ² the radial law is r e^{−λr}: a Gamma(2, 1/λ) variable.
        let e = Euclidean::new(2).unwrap();
        let mu = sample_family(&e, &vec![0.0, 0.0], &Family::RadialExp { lambda: 2.0 }, 50_000, 5).unwrap();
        let m = moment(&e, &mu, &vec![0.0, 0.0], 1.0).unwrap();
        assert!((m - 1.0).abs() < 3.0 * (0.5f64).sqrt() / (50_000f64).sqrt() * 1.5, "{m}");
    }

    #[test]
    fn pushforward_examples() {
        let e = Euclidean::new(2).unwrap();
        let c = vec![1.0, -1.0];
        let atoms: Vec<Vec<f64>> = (0..12)
            .map(|j| {
                let t = j as f64 * 0.5;
                vec![1.0 + 2.5 * t.cos(), -1.0 + 2.5 * t.sin()]
            })
            .collect();
        let radial = radial_pushforward(&e, &Measure::uniform(atoms), &c).unwrap();
        assert!(radial.radii.iter().all(|r| (r - 2.5).abs() < 1e-14));
        let empty = radial_pushforward(&e, &Measure::<Vec<f64>>::empty(), &c).unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn truncation_examples() {
        let e = Euclidean::new(2).unwrap();
        let x0 = vec![0.0, 0.0];
        let mu = sample_family(&e, &x0, &Family::UniformBall { radius: 1.0 }, 1000, 2).unwrap();
        let t = truncate(&e, &mu, &x0, 5.0, 2.0, 1.0, &|r| r).unwrap();
        assert_eq!(t.tail_mass, 0.0);
        assert_eq!(t.inside.len(), 1000);
        let t = truncate(&e, &mu, &x0, 1e-300, 2.0, 1.0, &|r| r).unwrap();
        assert!(t.inside.is_empty());
        assert_eq!(t.inside.total_mass() + t.tail_mass, mu.total_mass());
    }

    #[test]
    fn csv_round_trip() {
        let e = Euclidean::new(2).unwrap();
        let mu = sample_family(&e, &vec![0.0, 0.0], &Family::UniformBall { radius: 1.0 }, 50, 2).unwrap();
        let text = to_csv(&e, &mu);
        assert!(text.starts_with("x1,x2,weight\n"));
        let back = from_csv(&e, &text).unwrap();
        assert_eq!(back.atoms, mu.atoms);
        assert_eq!(back.weights, mu.weights);
    }
}
