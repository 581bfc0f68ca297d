//! Certified covering and packing estimates on finite point sets.
//!
//! Exact covering numbers are out of reach, so every quantity comes as a
//! pair of certificates: a feasible cover bounds from above and a valid
//! packing bounds from below.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::unit_ball_volume;
use crate::spaces::{MetricSpace, SphereSampling, VolumeMeasure};

/// Greedy maximal packing in input order: indices of points with pairwise
/// distances ≥ 2r, such that every other point lies within 2r of one of
/// them.
pub fn max_packing<S: MetricSpace>(space: &S, a: &[S::Point], r: f64) -> Result<Vec<usize>> {
    if !(r > 0.0) {
        return Err(Error::Argument(format!("packing radius must be positive, got {r}")));
    }
    let mut nearest = vec![f64::INFINITY; a.len()];
    let mut kept = Vec::new();
    for i in 0..a.len() {
        if nearest[i] >= 2.0 * r {
            kept.push(i);
            let d = space.distances_from(&a[i], a);
            nearest.iter_mut().zip(d).for_each(|(n, di)| *n = n.min(di));
        }
    }
    Ok(kept)
}

/// Smallest pairwise distance among the selected points (∞ for fewer than two).
pub fn min_pairwise<S: MetricSpace>(space: &S, a: &[S::Point], idx: &[usize]) -> f64 {
    let pts: Vec<S::Point> = idx.iter().map(|&i| a[i].clone()).collect();
    (0..pts.len())
        .map(|i| space.distances_from(&pts[i], &pts[i + 1..]).into_iter().fold(f64::INFINITY, f64::min))
        .fold(f64::INFINITY, f64::min)
}

/// Certified bracket on the covering number N(A; r).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverBounds {
    pub r: f64,
    /// Size of a 2r-separated set: no open r-ball holds two of its points.
    pub lower: usize,
    /// Size of an r-separated maximal set, which is an open r-cover.
    pub upper: usize,
    pub packing: Vec<usize>,
    pub cover: Vec<usize>,
}

pub fn covering_number_bounds<S: MetricSpace>(space: &S, a: &[S::Point], r: f64) -> Result<CoverBounds> {
    let packing = max_packing(space, a, r)?;
    let cover = max_packing(space, a, 0.5 * r)?;
    Ok(CoverBounds { r, lower: packing.len(), upper: cover.len(), packing, cover })
}

/// Certified bracket on the covering radius r_N(A).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusBounds {
    pub n: usize,
    /// Max distance from A to the farthest-point centers.
    pub upper: f64,
    /// Half the separation of N + 1 farthest-point traversal points.
    pub lower: f64,
    pub centers: Vec<usize>,
}

/// Farthest-point traversal from index 0 with ties to the lowest index.
/// Returns the centers and the distance of every point to them.
pub fn farthest_point_centers<S: MetricSpace>(space: &S, a: &[S::Point], n: usize) -> (Vec<usize>, Vec<f64>) {
    let mut nearest = vec![f64::INFINITY; a.len()];
    let mut centers = Vec::with_capacity(n.min(a.len()));
    if a.is_empty() || n == 0 {
        return (centers, nearest);
    }
    let mut next = 0;
    while centers.len() < n.min(a.len()) {
        centers.push(next);
        let d = space.distances_from(&a[next], a);
        nearest.par_iter_mut().zip(d).for_each(|(m, di)| *m = m.min(di));
        next = argmax(&nearest);
    }
    (centers, nearest)
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

pub fn covering_radius<S: MetricSpace>(space: &S, a: &[S::Point], n: usize) -> Result<RadiusBounds> {
    if n == 0 {
        return Err(Error::Argument("covering radius needs N >= 1".into()));
    }
    if a.is_empty() {
        return Err(Error::Argument("covering radius of an empty set".into()));
    }
    if n >= a.len() {
        return Ok(RadiusBounds { n, upper: 0.0, lower: 0.0, centers: (0..a.len()).collect() });
    }
    let (centers, nearest) = farthest_point_centers(space, a, n);
    let upper = nearest.iter().copied().fold(0.0, f64::max);
    // The next traversal point is at distance `upper` from all N centers and
    // traversal distances never increase, so N + 1 points are upper-separated.
    Ok(RadiusBounds { n, upper, lower: 0.5 * upper, centers })
}

/// One row of a covering-growth curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    #[serde(rename = "R")]
    pub radius: f64,
    pub k: usize,
    /// k · (covering-radius upper certificate + sample fill distance).
    pub value: f64,
    /// k · packing lower bound on the covering radius of the sample.
    pub lower: f64,
    pub fill: f64,
    pub sample_size: usize,
    /// False when the sample has no more points than the center budget, so
    /// the row only reflects the discretization.
    pub resolved: bool,
    pub centers: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthCurve {
    pub rows: Vec<GrowthRow>,
}

impl GrowthCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("R,k,value,lower\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{}\n", r.radius, r.k, r.value, r.lower));
        }
        out
    }

    /// Least-squares slope of log(value) against R.
    pub fn log_slope(&self) -> f64 {
        let pts: Vec<(f64, f64)> = self.rows.iter().filter(|r| r.value > 0.0).map(|r| (r.radius, r.value.ln())).collect();
        least_squares_slope(&pts)
    }
}

pub fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// k · r_{k^{d−1}}(∂B_R(x₀)) certificates for each R.
pub fn growth_curve<S: SphereSampling>(
    space: &S,
    x0: &S::Point,
    radii: &[f64],
    k: usize,
    d: usize,
    sphere_n: usize,
    band: Option<f64>,
) -> Result<GrowthCurve> {
    if k < 2 {
        return Err(Error::Argument(format!("growth curve needs k >= 2, got {k}")));
    }
    if d == 0 {
        return Err(Error::Argument("growth curve needs d >= 1".into()));
    }
    let budget = k.pow(d as u32 - 1);
    let band = band.unwrap_or_else(|| space.default_band());
    let rows: Result<Vec<GrowthRow>> = radii
        .par_iter()
        .map(|&radius| {
            let sample = space.sample_sphere(x0, radius, sphere_n, band)?;
            if radius == 0.0 {
                return Ok(GrowthRow {
                    radius,
                    k,
                    value: 0.0,
                    lower: 0.0,
                    fill: 0.0,
                    sample_size: sample.len(),
                    resolved: true,
                    centers: vec![0],
                });
            }
            let rb = covering_radius(space, &sample.points, budget)?;
            Ok(GrowthRow {
                radius,
                k,
                value: k as f64 * (rb.upper + sample.fill),
                lower: k as f64 * rb.lower,
                fill: sample.fill,
                sample_size: sample.len(),
                resolved: sample.len() > budget,
                centers: rb.centers,
            })
        })
        .collect();
    Ok(GrowthCurve { rows: rows? })
}

/// Geometric grid from `r_min` to `r_max` with ratio 2^{1/4}; `r_max` is
/// always the last entry.
pub fn geometric_grid(r_min: f64, r_max: f64) -> Result<Vec<f64>> {
    if !(r_min > 0.0) || !(r_max >= r_min) {
        return Err(Error::Argument(format!("grid needs 0 < r_min <= r_max, got [{r_min}, {r_max}]")));
    }
    let ratio = 2f64.powf(0.25);
    let mut grid = Vec::new();
    let mut r = r_min;
    while r < r_max * (1.0 - 1e-12) {
        grid.push(r);
        r *= ratio;
    }
    grid.push(r_max);
    Ok(grid)
}

/// Largest distance between two points of the set.
pub fn diameter<S: MetricSpace>(space: &S, a: &[S::Point]) -> f64 {
    (0..a.len()).into_par_iter().map(|i| space.distances_from(&a[i], &a[i + 1..]).into_iter().fold(0.0, f64::max)).reduce(|| 0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmRow {
    pub r: f64,
    pub lower_count: usize,
    pub upper_count: usize,
}

/// Grid estimate of C_m(A; r₀) = sup_{r ≤ r₀} N(A; r) rᵐ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmEstimate {
    pub m: f64,
    /// sup over the grid of the upper cover count times rᵐ.
    pub upper: f64,
    /// sup over the grid of the packing count times rᵐ; a lower bound on C_m.
    pub lower: f64,
    pub rows: Vec<CmRow>,
}

pub fn cm_estimate<S: MetricSpace>(space: &S, a: &[S::Point], m: f64, r_grid: &[f64]) -> Result<CmEstimate> {
    if !(m > 0.0) {
        return Err(Error::Argument(format!("C_m needs m > 0, got {m}")));
    }
    let rows: Result<Vec<CmRow>> = r_grid
        .iter()
        .map(|&r| {
            let b = covering_number_bounds(space, a, r)?;
            Ok(CmRow { r, lower_count: b.lower, upper_count: b.upper })
        })
        .collect();
    let rows = rows?;
    let sup = |f: &dyn Fn(&CmRow) -> usize| rows.iter().map(|row| f(row) as f64 * row.r.powf(m)).fold(0.0, f64::max);
    Ok(CmEstimate { m, upper: sup(&|r| r.upper_count), lower: sup(&|r| r.lower_count), rows })
}

/// inf over x ∈ A and r in the grid of ν(B_r(x)) / rᵐ.
pub fn theta_estimate<S: VolumeMeasure>(space: &S, a: &[S::Point], m: f64, r_grid: &[f64]) -> Result<f64> {
    if a.is_empty() || r_grid.is_empty() {
        return Err(Error::Argument("theta estimate needs points and radii".into()));
    }
    let mut best = f64::INFINITY;
    for x in a {
        for &r in r_grid {
            best = best.min(space.ball_volume(x, r)? / r.powf(m));
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinkowskiRow {
    pub r: f64,
    /// ν(A^r) from the quadrature cells.
    pub volume: f64,
    /// ν(A^r) / (ω_{d−m} r^{d−m}).
    pub value: f64,
}

/// Minkowski-content curve of A computed on quadrature cells that must
/// cover A^{max r}. A cell belongs to A^r when its representative point is
/// within distance < r of some point of A.
pub fn minkowski_content<S: MetricSpace>(
    space: &S,
    a: &[S::Point],
    m: usize,
    r_grid: &[f64],
    cells: &[(S::Point, f64)],
) -> Result<Vec<MinkowskiRow>> {
    let d = space.dim();
    if m > d || a.is_empty() {
        return Err(Error::Argument(format!("Minkowski content needs a nonempty set and m <= d, got m={m}, d={d}")));
    }
    let cell_points: Vec<S::Point> = cells.iter().map(|c| c.0.clone()).collect();
    let mut dist = vec![f64::INFINITY; cells.len()];
    for x in a {
        let dx = space.distances_from(x, &cell_points);
        dist.par_iter_mut().zip(dx).for_each(|(m, v)| *m = m.min(v));
    }
    let norm = unit_ball_volume(d - m);
    Ok(r_grid
        .iter()
        .map(|&r| {
            let volume: f64 = dist.iter().zip(cells).filter(|(dd, _)| **dd < r).map(|(_, c)| c.1).sum();
            MinkowskiRow { r, volume, value: volume / (norm * r.powi((d - m) as i32)) }
        })
        .collect())
}
