//! Quantization costs, solvers and asymptotic coefficient tables.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::bounds::LedgerEntry;
use crate::covering::covering_radius;
use crate::error::{Error, Result};
use crate::measures::{radial_pushforward, Measure, RadialMeasure};
use crate::numeric::stable_sum_by;
use crate::spaces::{MetricSpace, SphereSampling};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    LocalSearch,
    Exact1d,
    Shell,
    FloorPareto,
    Manual,
}

/// A finite ordered point set with its construction record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantizer<P> {
    pub points: Vec<P>,
    pub construction: Construction,
    pub params: serde_json::Value,
}

impl<P: Clone + PartialEq> Quantizer<P> {
    pub fn manual(points: Vec<P>) -> Self {
        Self { points, construction: Construction::Manual, params: serde_json::Value::Null }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Union with another quantizer, dropping repeated points.
    pub fn union(&self, other: &Self) -> Self {
        let mut points = self.points.clone();
        for q in &other.points {
            if !points.contains(q) {
                points.push(q.clone());
            }
        }
        Self { points, construction: Construction::Manual, params: serde_json::Value::Null }
    }
}

fn check_order(p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::Argument(format!("quantization order must lie in [1, inf), got {p}")));
    }
    Ok(())
}

/// Nearest point of `centers` for every atom, ties to the lowest index.
pub fn assign<S: MetricSpace>(space: &S, atoms: &[S::Point], centers: &[S::Point]) -> (Vec<usize>, Vec<f64>) {
    let mut idx = vec![0usize; atoms.len()];
    let mut dist = vec![f64::INFINITY; atoms.len()];
    for (j, c) in centers.iter().enumerate() {
        let d = space.distances_from(c, atoms);
        idx.par_iter_mut().zip(dist.par_iter_mut()).zip(d).for_each(|((i, m), dj)| {
            if dj < *m {
                *m = dj;
                *i = j;
            }
        });
    }
    (idx, dist)
}

fn weighted_power_sum(weights: &[f64], dist: &[f64], p: f64) -> f64 {
    stable_sum_by(weights.len(), |i| weights[i] * dist[i].powf(p))
}

/// V_p(μ; S) = Σᵢ wᵢ minⱼ d(xᵢ, sⱼ)^p.
pub fn cost<S: MetricSpace>(space: &S, mu: &Measure<S::Point>, points: &[S::Point], p: f64) -> Result<f64> {
    check_order(p)?;
    if points.is_empty() {
        return Err(Error::Argument("quantizer must be nonempty".into()));
    }
    let (_, dist) = assign(space, &mu.atoms, points);
    Ok(weighted_power_sum(&mu.weights, &dist, p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalSearchOptions {
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for LocalSearchOptions {
    fn default() -> Self {
        Self { restarts: 4, max_iter: 200, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverResult<P> {
    pub quantizer: Quantizer<P>,
    pub cost: f64,
    /// Cost after each assignment step of the winning run.
    pub history: Vec<f64>,
}

/// D^p seeding: each new point is an atom drawn with probability ∝ w·d(x, S)^p.
fn seed_points<S: MetricSpace>(space: &S, mu: &Measure<S::Point>, n: usize, p: f64, rng: &mut ChaCha8Rng) -> Vec<S::Point> {
    let mut chosen: Vec<S::Point> = Vec::with_capacity(n);
    let mut dist = vec![f64::INFINITY; mu.len()];
    while chosen.len() < n {
        let scores: Vec<f64> =
            if chosen.is_empty() { mu.weights.clone() } else { mu.weights.iter().zip(&dist).map(|(w, d)| w * d.powf(p)).collect() };
        let total: f64 = scores.iter().sum();
        if !(total > 0.0) {
            break;
        }
        let mut t = rng.random::<f64>() * total;
        let mut pick = scores.iter().rposition(|s| *s > 0.0).expect("positive total");
        for (i, s) in scores.iter().enumerate() {
            if *s > 0.0 && t < *s {
                pick = i;
                break;
            }
            t -= s;
        }
        let c = mu.atoms[pick].clone();
        let d = space.distances_from(&c, &mu.atoms);
        dist.iter_mut().zip(d).for_each(|(m, di)| *m = m.min(di));
        chosen.push(c);
    }
    chosen
}

fn cell_cost<S: MetricSpace>(space: &S, c: &S::Point, pts: &[S::Point], w: &[f64], p: f64) -> f64 {
    space.distances_from(c, pts).iter().zip(w).map(|(d, wi)| wi * d.powf(p)).sum()
}

/// Best replacement for a cell center: the backend's power mean when it has
/// one, otherwise a weighted medoid (exact for small cells, over strided
/// candidates for large ones).
fn cell_update<S: MetricSpace>(space: &S, current: &S::Point, pts: &[S::Point], w: &[f64], p: f64) -> Option<(S::Point, f64)> {
    let base = cell_cost(space, current, pts, w, p);
    let refs: Vec<&S::Point> = pts.iter().collect();
    let candidates: Vec<S::Point> = match space.power_mean(&refs, w, p, current) {
        Some(c) => vec![c],
        None if pts.len() <= 400 => pts.to_vec(),
        None => {
            let stride = pts.len().div_ceil(64);
            pts.iter().step_by(stride).cloned().collect()
        }
    };
    let mut best: Option<(S::Point, f64)> = None;
    for c in candidates {
        let v = cell_cost(space, &c, pts, w, p);
        if v < base && best.as_ref().is_none_or(|b| v < b.1) {
            best = Some((c, v));
        }
    }
    best
}

/// Lloyd-type alternation from the given starting points.
pub fn improve<S: MetricSpace>(
    space: &S,
    mu: &Measure<S::Point>,
    start: Vec<S::Point>,
    p: f64,
    max_iter: usize,
) -> Result<SolverResult<S::Point>> {
    check_order(p)?;
    if start.is_empty() {
        return Err(Error::Argument("local search needs at least one starting point".into()));
    }
    let mut centers = start;
    let mut history = Vec::new();
    for _ in 0..max_iter.max(1) {
        let (idx, dist) = assign(space, &mu.atoms, &centers);
        history.push(weighted_power_sum(&mu.weights, &dist, p));
        let mut cells: Vec<(Vec<S::Point>, Vec<f64>)> = vec![(Vec::new(), Vec::new()); centers.len()];
        for (i, &j) in idx.iter().enumerate() {
            if mu.weights[i] > 0.0 {
                cells[j].0.push(mu.atoms[i].clone());
                cells[j].1.push(mu.weights[i]);
            }
        }
        let updates: Vec<Option<(S::Point, f64)>> = cells
            .par_iter()
            .zip(centers.par_iter())
            .map(|((pts, w), c)| if pts.is_empty() { None } else { cell_update(space, c, pts, w, p) })
            .collect();
        let mut changed = false;
        for (j, u) in updates.into_iter().enumerate() {
            if let Some((c, _)) = u {
                if !centers.contains(&c) {
                    centers[j] = c;
                    changed = true;
                }
            }
        }
        // Farthest-point repair of empty cells.
        let mut dist = dist;
        for j in 0..centers.len() {
            if cells[j].0.is_empty() {
                let far = (0..mu.len()).filter(|&i| mu.weights[i] > 0.0).fold(None::<usize>, |b, i| match b {
                    Some(b) if dist[b] >= dist[i] => Some(b),
                    _ => Some(i),
                });
                if let Some(i) = far.filter(|&i| dist[i] > 0.0) {
                    centers[j] = mu.atoms[i].clone();
                    let d = space.distances_from(&centers[j], &mu.atoms);
                    dist.iter_mut().zip(d).for_each(|(m, di)| *m = m.min(di));
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let (_, dist) = assign(space, &mu.atoms, &centers);
    let final_cost = weighted_power_sum(&mu.weights, &dist, p);
    if history.last() != Some(&final_cost) {
        history.push(final_cost);
    }
    Ok(SolverResult {
        quantizer: Quantizer { points: centers, construction: Construction::LocalSearch, params: serde_json::Value::Null },
        cost: final_cost,
        history,
    })
}

/// Best of `restarts` seeded runs of [`improve`].
pub fn local_search<S: MetricSpace>(
    space: &S,
    mu: &Measure<S::Point>,
    n: usize,
    p: f64,
    opts: LocalSearchOptions,
) -> Result<SolverResult<S::Point>> {
    check_order(p)?;
    if n == 0 || n > mu.len() {
        return Err(Error::Argument(format!("local search needs 1 <= N <= #atoms = {}, got {n}", mu.len())));
    }
    let runs: Result<Vec<SolverResult<S::Point>>> = (0..opts.restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(r as u64);
            let start = seed_points(space, mu, n, p, &mut rng);
            improve(space, mu, start, p, opts.max_iter)
        })
        .collect();
    let mut best = runs?.into_iter().reduce(|a, b| if b.cost < a.cost { b } else { a }).expect("at least one run");
    best.quantizer.params = serde_json::json!({"N": n, "p": p, "restarts": opts.restarts, "seed": opts.seed});
    Ok(best)
}

/// Optimal quantizer of a measure on the real line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exact1d {
    pub centers: Vec<f64>,
    pub cost: f64,
    /// Index ranges of the sorted atoms served by each center.
    pub cells: Vec<(usize, usize)>,
}

struct LineCells {
    x: Vec<f64>,
    w: Vec<f64>,
    cw: Vec<f64>,
    cwx: Vec<f64>,
    cwxx: Vec<f64>,
    p: f64,
}

impl LineCells {
    fn new(mut pts: Vec<(f64, f64)>, p: f64) -> Self {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let x: Vec<f64> = pts.iter().map(|q| q.0).collect();
        let w: Vec<f64> = pts.iter().map(|q| q.1).collect();
        let mut cw = vec![0.0];
        let mut cwx = vec![0.0];
        let mut cwxx = vec![0.0];
        for (xi, wi) in x.iter().zip(&w) {
            cw.push(cw.last().unwrap() + wi);
            cwx.push(cwx.last().unwrap() + wi * xi);
            cwxx.push(cwxx.last().unwrap() + wi * xi * xi);
        }
        Self { x, w, cw, cwx, cwxx, p }
    }

    /// Optimal center and cost of the atoms with sorted indices in [i, j).
    fn cell(&self, i: usize, j: usize) -> (f64, f64) {
        let m = self.cw[j] - self.cw[i];
        if !(m > 0.0) {
            return (self.x[i], 0.0);
        }
        if self.p == 2.0 {
            let sx = self.cwx[j] - self.cwx[i];
            let c = sx / m;
            // Shifted second moment about the first atom for stability.
            let x0 = self.x[i];
            let sxx = self.cwxx[j] - self.cwxx[i];
            let raw = sxx - 2.0 * x0 * sx + x0 * x0 * m;
            let mean_shift = c - x0;
            return (c, (raw - m * mean_shift * mean_shift).max(0.0));
        }
        if self.p == 1.0 {
            let half = self.cw[i] + 0.5 * m;
            let k = (i + self.cw[i + 1..=j].partition_point(|c| *c < half)).min(j - 1);
            let c = self.x[k];
            let left_w = self.cw[k] - self.cw[i];
            let left = c * left_w - (self.cwx[k] - self.cwx[i]);
            let right_w = self.cw[j] - self.cw[k];
            let right = (self.cwx[j] - self.cwx[k]) - c * right_w;
            return (c, (left + right).max(0.0));
        }
        let f = |c: f64| (i..j).map(|t| self.w[t] * (self.x[t] - c).abs().powf(self.p)).sum::<f64>();
        let (mut a, mut b) = (self.x[i], self.x[j - 1]);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut c1 = b - g * (b - a);
        let mut c2 = a + g * (b - a);
        let (mut f1, mut f2) = (f(c1), f(c2));
        for _ in 0..100 {
            if b - a <= 1e-14 * (1.0 + a.abs().max(b.abs())) {
                break;
            }
            if f1 <= f2 {
                b = c2;
                c2 = c1;
                f2 = f1;
                c1 = b - g * (b - a);
                f1 = f(c1);
            } else {
                a = c1;
                c1 = c2;
                f1 = f2;
                c2 = a + g * (b - a);
                f2 = f(c2);
            }
        }
        let c = 0.5 * (a + b);
        (c, f(c))
    }
}

/// Optimal quantizers for every N in 1..=n_max by dynamic programming over
/// sorted atoms: O(n_max · n²) cell evaluations.
pub fn exact_1d_sweep(points: &[(f64, f64)], n_max: usize, p: f64) -> Result<Vec<Exact1d>> {
    check_order(p)?;
    let n = points.len();
    if n_max == 0 || n_max > n {
        return Err(Error::Argument(format!("exact 1-D solver needs 1 <= N <= #atoms = {n}, got {n_max}")));
    }
    let lc = LineCells::new(points.to_vec(), p);
    // best[k][j]: optimal cost of the first j atoms with k + 1 cells.
    let mut best: Vec<Vec<f64>> = Vec::with_capacity(n_max);
    let mut split: Vec<Vec<usize>> = Vec::with_capacity(n_max);
    best.push((0..=n).map(|j| if j == 0 { 0.0 } else { lc.cell(0, j).1 }).collect());
    split.push(vec![0; n + 1]);
    for k in 1..n_max {
        let prev = &best[k - 1];
        let row: Vec<(f64, usize)> = (0..=n)
            .into_par_iter()
            .map(|j| {
                if j <= k {
                    return (0.0, j.saturating_sub(1));
                }
                let mut b = (f64::INFINITY, k);
                #[allow(clippy::needless_range_loop)]
                for i in k..j {
                    let v = prev[i] + lc.cell(i, j).1;
                    if v < b.0 {
                        b = (v, i);
                    }
                }
                b
            })
            .collect();
        best.push(row.iter().map(|r| r.0).collect());
        split.push(row.iter().map(|r| r.1).collect());
    }
    Ok((0..n_max)
        .map(|k| {
            let mut cells = Vec::with_capacity(k + 1);
            let mut j = n;
            for level in (0..=k).rev() {
                let i = if level == 0 { 0 } else { split[level][j] };
                cells.push((i, j));
                j = i;
            }
            cells.reverse();
            let mut centers: Vec<f64> = Vec::with_capacity(cells.len());
            let mut total = 0.0;
            let mut kept_cells = Vec::with_capacity(cells.len());
            for &(i, j) in &cells {
                if i == j {
                    continue;
                }
                let (c, v) = lc.cell(i, j);
                total += v;
                if centers.last() != Some(&c) {
                    centers.push(c);
                    kept_cells.push((i, j));
                } else if let Some(last) = kept_cells.last_mut() {
                    last.1 = j;
                }
            }
            Exact1d { centers, cost: total, cells: kept_cells }
        })
        .collect())
}

pub fn exact_1d(points: &[(f64, f64)], n: usize, p: f64) -> Result<Exact1d> {
    Ok(exact_1d_sweep(points, n, p)?.pop().expect("nonempty sweep"))
}

/// Atoms of a one-dimensional measure as (coordinate, weight) pairs.
pub fn line_points<S: MetricSpace>(space: &S, mu: &Measure<S::Point>) -> Result<Vec<(f64, f64)>> {
    if space.dim() != 1 {
        return Err(Error::Unsupported(format!("exact 1-D solver on a {}-dimensional space", space.dim())));
    }
    Ok(mu.atoms.iter().zip(&mu.weights).map(|(a, w)| (space.coords(a)[0], *w)).collect())
}

pub fn radial_points(mu1: &RadialMeasure) -> Vec<(f64, f64)> {
    mu1.radii.iter().copied().zip(mu1.weights.iter().copied()).collect()
}

/// Strictly increasing positive radii 0 < r₁ < … < r_N.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloorQuantizer {
    radii: Vec<f64>,
}

impl FloorQuantizer {
    pub fn new(radii: Vec<f64>) -> Result<Self> {
        if radii.first().is_some_and(|r| !(*r > 0.0)) || radii.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Argument("floor quantizer radii must be positive and strictly increasing".into()));
        }
        if radii.iter().any(|r| !r.is_finite()) {
            return Err(Error::Argument("floor quantizer radii must be finite".into()));
        }
        Ok(Self { radii })
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// F_S(r): the largest radius ≤ r, or 0 below r₁.
    pub fn floor(&self, r: f64) -> f64 {
        let k = self.radii.partition_point(|s| *s <= r);
        if k == 0 {
            0.0
        } else {
            self.radii[k - 1]
        }
    }

    pub fn scaled(&self, t: f64) -> Result<Self> {
        Self::new(self.radii.iter().map(|r| r * t).collect())
    }
}

/// V^F_p(μ₁; S) = Σ wᵢ (rᵢ − F_S(rᵢ))^p.
pub fn floor_cost(mu1: &RadialMeasure, s: &FloorQuantizer, p: f64) -> f64 {
    stable_sum_by(mu1.len(), |i| mu1.weights[i] * (mu1.radii[i] - s.floor(mu1.radii[i])).powf(p))
}

/// Inverse of G(y) = 1 − (y + 1)^{−β}.
pub fn pareto_inverse_cdf(u: f64, beta: f64) -> f64 {
    (1.0 - u).powf(-1.0 / beta) - 1.0
}

/// N i.i.d. Pareto draws with tail index β = δ/p, sorted; ties are pulled
/// apart by 10⁻¹² (relative for radii above 1).
pub fn pareto_floor_quantizer(n: usize, p: f64, delta: f64, seed: u64) -> Result<FloorQuantizer> {
    if n == 0 || !(p >= 1.0) || !(delta > 0.0) {
        return Err(Error::Argument(format!("Pareto quantizer needs N >= 1, p >= 1, delta > 0; got N={n}, p={p}, delta={delta}")));
    }
    let beta = delta / p;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut radii = Vec::with_capacity(n);
    while radii.len() < n {
        let y = pareto_inverse_cdf(rng.random::<f64>(), beta);
        if y > 0.0 && y.is_finite() {
            radii.push(y);
        }
    }
    radii.sort_by(|a, b| a.total_cmp(b));
    for i in 1..n {
        if radii[i] <= radii[i - 1] {
            radii[i] = radii[i - 1] + 1e-12 * radii[i - 1].max(1.0);
        }
    }
    FloorQuantizer::new(radii)
}

/// C(p, δ) = 2^{p+δ−1} Γ(p+1) p^{p+1} δ^{−p}.
pub fn pierce_constant(p: f64, delta: f64) -> Result<f64> {
    if !(p >= 1.0) || !(delta > 0.0) {
        return Err(Error::Argument(format!("Pierce constant needs p >= 1 and delta > 0, got p={p}, delta={delta}")));
    }
    Ok(2f64.powf(p + delta - 1.0) * gamma(p + 1.0) * p.powf(p + 1.0) * delta.powf(-p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellOptions {
    pub delta: f64,
    /// Pareto radius sets tried; the one with the lowest floor cost wins.
    pub seeds: usize,
    pub seed: u64,
    /// Points per analytic sphere sample.
    pub sphere_n: usize,
    pub band: Option<f64>,
}

impl Default for ShellOptions {
    fn default() -> Self {
        Self { delta: 1.0, seeds: 20, seed: 0, sphere_n: 512, band: None }
    }
}

/// Per-annulus record of the shell construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellRecord {
    pub radius: f64,
    /// Points placed on this sphere (0 when skipped).
    pub budget: usize,
    /// Covering-radius certificate of the placed points plus sample fill.
    pub cover_radius: f64,
    /// μ-mass of the annulus served by this shell.
    pub mass: f64,
    /// Cost of the annulus against this shell's points alone.
    pub own_cost: f64,
    /// ∫ [(r − Rᵢ) + cover_radius]^p over the annulus.
    pub annulus_bound: f64,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellResult<P> {
    pub quantizer: Quantizer<P>,
    pub cost: f64,
    /// Σ own costs, an upper bound on `cost` by the union construction.
    pub decomposition: f64,
    pub floor_cost: f64,
    pub radii: Vec<f64>,
    /// Cost of the inner ball against x₀ alone.
    pub center_cost: f64,
    pub shells: Vec<ShellRecord>,
}

/// Quantizer {x₀} ∪ covers of k concentric spheres with k^{d−1} points each.
pub fn shell_quantizer<S: SphereSampling>(
    space: &S,
    mu: &Measure<S::Point>,
    x0: &S::Point,
    k: usize,
    p: f64,
    d: usize,
    opts: ShellOptions,
) -> Result<ShellResult<S::Point>> {
    check_order(p)?;
    if k == 0 || d == 0 {
        return Err(Error::Argument("shell quantizer needs k >= 1 and d >= 1".into()));
    }
    let mu1 = radial_pushforward(space, mu, x0)?;
    let r_max = mu1.radii.iter().copied().fold(0.0, f64::max);
    let params = serde_json::json!({"k": k, "p": p, "d": d, "delta": opts.delta, "seed": opts.seed});
    if r_max == 0.0 {
        return Ok(ShellResult {
            quantizer: Quantizer { points: vec![x0.clone()], construction: Construction::Shell, params },
            cost: 0.0,
            decomposition: 0.0,
            floor_cost: 0.0,
            radii: Vec::new(),
            center_cost: 0.0,
            shells: Vec::new(),
        });
    }
    let median = mu1.quantile(0.5).unwrap_or(0.0);
    let scale = if median > 0.0 { median } else { r_max };

    let mut best: Option<(FloorQuantizer, f64)> = None;
    for s in 0..opts.seeds.max(1) {
        let fq = pareto_floor_quantizer(k, p, opts.delta, opts.seed.wrapping_mul(1_000_003).wrapping_add(s as u64))?.scaled(scale)?;
        let v = floor_cost(&mu1, &fq, p);
        if best.as_ref().is_none_or(|b| v < b.1) {
            best = Some((fq, v));
        }
    }
    let (fq, fcost) = best.expect("at least one seed");
    let radii = fq.radii().to_vec();

    let budget = k.pow(d as u32 - 1);
    let band = opts.band.unwrap_or_else(|| space.default_band());
    let mut points = vec![x0.clone()];
    let mut covers: Vec<Option<(Vec<S::Point>, f64)>> = Vec::with_capacity(k);
    let mut reasons: Vec<Option<String>> = Vec::with_capacity(k);
    for &radius in &radii {
        if radius > r_max {
            covers.push(None);
            reasons.push(Some(format!("radius beyond the support (max {r_max})")));
            continue;
        }
        match space.sample_sphere(x0, radius, opts.sphere_n, band) {
            Ok(sample) => {
                let rb = covering_radius(space, &sample.points, budget)?;
                let pts: Vec<S::Point> = rb.centers.iter().map(|&i| sample.points[i].clone()).collect();
                for q in &pts {
                    if !points.contains(q) {
                        points.push(q.clone());
                    }
                }
                covers.push(Some((pts, rb.upper + sample.fill)));
                reasons.push(None);
            }
            Err(Error::EmptySphere { max_distance, .. }) => {
                covers.push(None);
                reasons.push(Some(format!("empty sphere (max distance {max_distance})")));
            }
            Err(e) => return Err(e),
        }
    }

    // Annulus of atom i: the largest shell radius ≤ rᵢ (index 0 is x₀).
    let shell_of = |r: f64| radii.partition_point(|s| *s <= r);
    let mut shells = Vec::with_capacity(k);
    let mut decomposition = 0.0;
    let inner: Vec<usize> = (0..mu.len()).filter(|&i| shell_of(mu1.radii[i]) == 0).collect();
    let center_cost: f64 = inner.iter().map(|&i| mu.weights[i] * mu1.radii[i].powf(p)).sum();
    decomposition += center_cost;
    for (s, &radius) in radii.iter().enumerate() {
        let members: Vec<usize> = (0..mu.len()).filter(|&i| shell_of(mu1.radii[i]) == s + 1).collect();
        let mass: f64 = members.iter().map(|&i| mu.weights[i]).sum();
        let record = match &covers[s] {
            Some((pts, rho)) => {
                let atoms: Vec<S::Point> = members.iter().map(|&i| mu.atoms[i].clone()).collect();
                let (_, dist) = assign(space, &atoms, pts);
                let own: f64 = members.iter().zip(&dist).map(|(&i, d)| mu.weights[i] * d.powf(p)).sum();
                let bound: f64 = members.iter().map(|&i| mu.weights[i] * (mu1.radii[i] - radius + rho).powf(p)).sum();
                decomposition += own;
                ShellRecord { radius, budget: pts.len(), cover_radius: *rho, mass, own_cost: own, annulus_bound: bound, skipped: None }
            }
            None => {
                // No points on this sphere: the annulus is still served by
                // the union, so its cost against all points enters the sum.
                let atoms: Vec<S::Point> = members.iter().map(|&i| mu.atoms[i].clone()).collect();
                let own = if atoms.is_empty() {
                    0.0
                } else {
                    let (_, dist) = assign(space, &atoms, &points);
                    members.iter().zip(&dist).map(|(&i, d)| mu.weights[i] * d.powf(p)).sum()
                };
                decomposition += own;
                ShellRecord {
                    radius,
                    budget: 0,
                    cover_radius: f64::INFINITY,
                    mass,
                    own_cost: own,
                    annulus_bound: f64::INFINITY,
                    skipped: reasons[s].clone(),
                }
            }
        };
        shells.push(record);
    }
    let total = cost(space, mu, &points, p)?;
    Ok(ShellResult {
        quantizer: Quantizer { points, construction: Construction::Shell, params },
        cost: total,
        decomposition,
        floor_cost: fcost,
        radii,
        center_cost,
        shells,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Solver {
    /// Dynamic programming on a one-dimensional measure.
    Exact1d,
    LocalSearch {
        restarts: usize,
        max_iter: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoeffRow {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "V")]
    pub v: f64,
    pub scaled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffTable {
    pub p: f64,
    pub d: usize,
    pub rows: Vec<CoeffRow>,
}

impl CoeffTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,V,scaled\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.n, r.v, r.scaled));
        }
        out
    }
}

/// Solves for every N in `ns`, returning the quantizer points alongside the
/// table. Local-search rows keep the better of a warm start (previous
/// solution plus farthest atoms) and a fresh seeded search.
pub fn coeff_table_with_points<S: MetricSpace>(
    space: &S,
    mu: &Measure<S::Point>,
    p: f64,
    d: usize,
    ns: &[usize],
    solver: Solver,
) -> Result<(CoeffTable, Vec<Vec<S::Point>>)> {
    check_order(p)?;
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Argument("Ns must be strictly ascending".into()));
    }
    let scale = |n: usize, v: f64| (n as f64).powf(p / d as f64) * v;
    let mut rows = Vec::with_capacity(ns.len());
    let mut sols = Vec::with_capacity(ns.len());
    match solver {
        Solver::Exact1d => {
            let pts = line_points(space, mu)?;
            let n_max = *ns.last().ok_or_else(|| Error::Argument("empty N list".into()))?;
            let sweep = exact_1d_sweep(&pts, n_max, p)?;
            for &n in ns {
                let e = &sweep[n - 1];
                rows.push(CoeffRow { n, v: e.cost, scaled: scale(n, e.cost) });
                sols.push(e.centers.iter().map(|c| space.from_coords(&[*c])).collect::<Result<Vec<_>>>()?);
            }
        }
        Solver::LocalSearch { restarts, max_iter, seed } => {
            let mut prev: Option<Vec<S::Point>> = None;
            for &n in ns {
                let fresh = local_search(space, mu, n, p, LocalSearchOptions { restarts, max_iter, seed })?;
                let mut best = fresh;
                if let Some(mut start) = prev.take() {
                    while start.len() < n {
                        let (_, dist) = assign(space, &mu.atoms, &start);
                        let far = (0..mu.len()).fold(0, |b, i| if dist[i] > dist[b] { i } else { b });
                        if dist[far] == 0.0 {
                            break;
                        }
                        start.push(mu.atoms[far].clone());
                    }
                    let warm = improve(space, mu, start, p, max_iter)?;
                    if warm.cost <= best.cost {
                        best = warm;
                    }
                }
                rows.push(CoeffRow { n, v: best.cost, scaled: scale(n, best.cost) });
                prev = Some(best.quantizer.points.clone());
                sols.push(best.quantizer.points);
            }
        }
    }
    Ok((CoeffTable { p, d, rows }, sols))
}

pub fn coeff_table<S: MetricSpace>(
    space: &S,
    mu: &Measure<S::Point>,
    p: f64,
    d: usize,
    ns: &[usize],
    solver: Solver,
) -> Result<CoeffTable> {
    Ok(coeff_table_with_points(space, mu, p, d, ns, solver)?.0)
}

fn solve_points<S: MetricSpace>(space: &S, mu: &Measure<S::Point>, n: usize, p: f64, solver: Solver) -> Result<Vec<S::Point>> {
    if n == 0 || mu.is_empty() {
        return Ok(Vec::new());
    }
    let n = n.min(mu.len());
    Ok(coeff_table_with_points(space, mu, p, space.dim(), &[n], solver)?.1.pop().expect("one row"))
}

/// Union certificates V_{N₁+N₂}(μ₁ + μ₂) ≤ V_{N₁}(μ₁) + V_{N₂}(μ₂).
///
/// The left side is the cost of μ₁ + μ₂ against the union of the two
/// returned quantizers; each atom's distance to the union is at most its
/// distance to its own quantizer and both sides are summed in the same
/// order, so the inequality is exact in floating point.
pub fn subadditivity_check<S: MetricSpace>(
    space: &S,
    mu1: &Measure<S::Point>,
    mu2: &Measure<S::Point>,
    p: f64,
    ns: &[(usize, usize)],
    solver: Solver,
) -> Result<Vec<LedgerEntry>> {
    check_order(p)?;
    let part = |mu: &Measure<S::Point>, pts: &[S::Point]| -> f64 {
        if mu.is_empty() {
            return 0.0;
        }
        if pts.is_empty() {
            return f64::INFINITY;
        }
        let (_, dist) = assign(space, &mu.atoms, pts);
        weighted_power_sum(&mu.weights, &dist, p)
    };
    ns.iter()
        .map(|&(n1, n2)| {
            let s1 = solve_points(space, mu1, n1, p, solver)?;
            let s2 = solve_points(space, mu2, n2, p, solver)?;
            let v1 = part(mu1, &s1);
            let v2 = part(mu2, &s2);
            let mut union = s1.clone();
            for q in s2 {
                if !union.contains(&q) {
                    union.push(q);
                }
            }
            let lhs = part(mu1, &union) + part(mu2, &union);
            Ok(LedgerEntry::new(
                "quantization_subadditivity",
                "cost of mu1 + mu2 at the union of both quantizers vs V_N1(mu1) + V_N2(mu2)",
                lhs,
                v1 + v2,
                serde_json::json!({"N1": n1, "N2": n2, "p": p, "V1": v1, "V2": v2}),
            ))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{sample_family, Family};
    use crate::spaces::{Euclidean, HyperbolicPlane};

    fn line() -> Euclidean {
        Euclidean::new(1).unwrap()
    }

    fn uniform_interval(n: usize, seed: u64) -> Measure<Vec<f64>> {
        sample_family(&line(), &vec![0.0], &Family::UniformBox { lo: vec![0.0], hi: vec![1.0] }, n, seed).unwrap()
    }

    #[test]
    fn cost_examples() {
        let e = line();
        let mu = Measure::new(vec![vec![1.0], vec![4.0]], vec![0.5, 0.5]).unwrap();
        assert_eq!(cost(&e, &mu, &[vec![1.0]], 1.0).unwrap(), 1.5);
        assert_eq!(cost(&e, &mu, &mu.atoms, 2.0).unwrap(), 0.0);
        assert!(cost(&e, &mu, &[], 2.0).is_err());
        assert!(cost(&e, &mu, &[vec![0.0]], 0.5).is_err());
        let u = uniform_interval(100_000, 1);
        let v = cost(&e, &u, &[vec![0.5]], 2.0).unwrap();
        assert!((v - 1.0 / 12.0).abs() < 0.002);
    }

    #[test]
    fn local_search_examples() {
        let e = line();
        let u = uniform_interval(2000, 2);
        let res = local_search(&e, &u, 2, 2.0, LocalSearchOptions::default()).unwrap();
        let mut pts: Vec<f64> = res.quantizer.points.iter().map(|x| x[0]).collect();
        pts.sort_by(f64::total_cmp);
        let oracle = exact_1d(&line_points(&e, &u).unwrap(), 2, 2.0).unwrap();
        assert!((pts[0] - oracle.centers[0]).abs() < 0.01 && (pts[1] - oracle.centers[1]).abs() < 0.01);
        assert!((res.cost - oracle.cost).abs() < 1e-3 * oracle.cost);
        assert!((res.cost - 1.0 / 48.0).abs() < 0.002);
        for w in res.history.windows(2) {
            assert!(w[1] <= w[0]);
        }

        let small = uniform_interval(10, 3);
        let all = local_search(&e, &small, 10, 2.0, LocalSearchOptions::default()).unwrap();
        assert_eq!(all.cost, 0.0);

        let e2 = Euclidean::new(2).unwrap();
        let mu = Measure::new(vec![vec![0.0, 0.0], vec![3.0, 0.0], vec![0.0, 6.0]], vec![1.0, 1.0, 1.0]).unwrap();
        let one = local_search(&e2, &mu, 1, 2.0, LocalSearchOptions::default()).unwrap();
        assert!((one.quantizer.points[0][0] - 1.0).abs() < 1e-12 && (one.quantizer.points[0][1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn exact_1d_examples() {
        let pts: Vec<(f64, f64)> = (0..5000).map(|i| ((i as f64 + 0.5) / 5000.0, 1.0 / 5000.0)).collect();
        let e = exact_1d(&pts, 8, 2.0).unwrap();
        let target = 1.0 / (12.0 * 64.0);
        assert!((e.cost - target).abs() < 0.02 * target);

        let pts = vec![(1.0, 1.0), (2.0, 1.0), (6.0, 1.0)];
        let e = exact_1d(&pts, 1, 2.0).unwrap();
        assert!((e.centers[0] - 3.0).abs() < 1e-12);
        assert!((e.cost - 14.0).abs() < 1e-12);

        let clusters = vec![(0.0, 1.0), (0.1, 1.0), (0.2, 1.0), (10.0, 1.0), (10.3, 1.0)];
        let e = exact_1d(&clusters, 2, 1.0).unwrap();
        assert_eq!(e.centers, vec![0.1, 10.0]);
        let e3 = exact_1d(&clusters, 2, 3.0).unwrap();
        assert!(e3.centers[0] < 1.0 && e3.centers[1] > 9.0);
    }

    #[test]
    fn floor_cost_examples() {
        let mu1 = RadialMeasure::new(vec![0.1, 0.2, 0.3], vec![1.0, 2.0, 1.0]).unwrap();
        let s = FloorQuantizer::new(vec![1.0, 2.0]).unwrap();
        assert!((floor_cost(&mu1, &s, 1.0) - mu1.moment(1.0)).abs() < 1e-15);
        let at = FloorQuantizer::new(vec![0.1, 0.2, 0.3]).unwrap();
        assert_eq!(floor_cost(&mu1, &at, 2.0), 0.0);
        let u = uniform_interval(100_000, 4);
        let radial = radial_pushforward(&line(), &u, &vec![0.0]).unwrap();
        let half = FloorQuantizer::new(vec![0.5]).unwrap();
        assert!((floor_cost(&radial, &half, 1.0) - 0.25).abs() < 0.005);
        assert!(FloorQuantizer::new(vec![1.0, 1.0]).is_err());
        assert!(FloorQuantizer::new(vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn pareto_examples() {
        assert_eq!(pareto_inverse_cdf(0.5, 1.0), 1.0);
        let q = pareto_floor_quantizer(100_000, 1.0, 2.0, 11).unwrap();
        let mean: f64 = q.radii().iter().map(|y| 1.0 / (y + 1.0)).sum::<f64>() / 100_000.0;
        assert!((mean - 2.0 / 3.0).abs() < 0.01);
        let a = pareto_floor_quantizer(50, 2.0, 1.0, 3).unwrap();
        let b = pareto_floor_quantizer(50, 2.0, 1.0, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pierce_constant_examples() {
        assert!((pierce_constant(1.0, 1.0).unwrap() - 2.0).abs() < 1e-12);
        assert!((pierce_constant(1.0, 2.0).unwrap() - 2.0).abs() < 1e-12);
        assert!((pierce_constant(2.0, 2.0).unwrap() - 32.0).abs() < 1e-12);
        assert!(pierce_constant(0.5, 1.0).is_err());
    }

    #[test]
    fn shell_examples() {
        let e = Euclidean::new(2).unwrap();
        let x0 = vec![0.0, 0.0];
        let mu = sample_family(&e, &x0, &Family::UniformBall { radius: 1.0 }, 4000, 7).unwrap();
        let one = shell_quantizer(&e, &mu, &x0, 1, 2.0, 2, ShellOptions::default()).unwrap();
        assert_eq!(one.quantizer.len(), 2);
        assert!(one.cost <= crate::measures::moment(&e, &mu, &x0, 2.0).unwrap());

        let five = shell_quantizer(&e, &mu, &x0, 5, 2.0, 2, ShellOptions::default()).unwrap();
        assert!(five.quantizer.len() <= 26);
        assert!(five.cost <= five.decomposition * (1.0 + 1e-12));
        let ls = local_search(&e, &mu, 26, 2.0, LocalSearchOptions::default()).unwrap();
        assert!(five.cost <= 10.0 * ls.cost);

        let point = Measure::new(vec![x0.clone(); 3], vec![1.0; 3]).unwrap();
        let z = shell_quantizer(&e, &point, &x0, 4, 2.0, 2, ShellOptions::default()).unwrap();
        assert_eq!(z.cost, 0.0);
    }

    #[test]
    fn shell_annulus_bounds_hold_on_h2() {
        let h = HyperbolicPlane::new();
        let x0 = [0.0, 0.0];
        let mu = sample_family(&h, &x0, &Family::RadialExp { lambda: 3.0 }, 3000, 1).unwrap();
        let res = shell_quantizer(&h, &mu, &x0, 4, 2.0, 2, ShellOptions::default()).unwrap();
        for s in res.shells.iter().filter(|s| s.skipped.is_none()) {
            assert!(s.own_cost <= s.annulus_bound * (1.0 + 1e-12), "{s:?}");
        }
        assert!(res.cost <= res.decomposition * (1.0 + 1e-12));
    }

    #[test]
    fn coeff_table_examples() {
        let e = line();
        let pts: Vec<Vec<f64>> = (0..2000).map(|i| vec![(i as f64 + 0.5) / 2000.0]).collect();
        let mu = Measure::uniform(pts);
        let t = coeff_table(&e, &mu, 2.0, 1, &[4, 16, 64], Solver::Exact1d).unwrap();
        let last = t.rows.last().unwrap().scaled;
        assert!((last - 1.0 / 12.0).abs() < 0.02 / 12.0);
        assert!(t.to_csv().starts_with("N,V,scaled\n4,"));

        let point = Measure::new(vec![vec![0.3]; 5], vec![0.2; 5]).unwrap();
        let t = coeff_table(&e, &point, 2.0, 1, &[1, 2], Solver::LocalSearch { restarts: 2, max_iter: 20, seed: 0 }).unwrap();
        assert!(t.rows.iter().all(|r| r.v == 0.0));
    }

    #[test]
    fn warm_started_sweep_is_monotone() {
        let e = Euclidean::new(2).unwrap();
        let mu = sample_family(&e, &vec![0.0, 0.0], &Family::UniformBall { radius: 1.0 }, 3000, 5).unwrap();
        let t = coeff_table(&e, &mu, 2.0, 2, &[1, 2, 4, 8, 16, 32], Solver::LocalSearch { restarts: 2, max_iter: 50, seed: 1 }).unwrap();
        for w in t.rows.windows(2) {
            assert!(w[1].v <= w[0].v);
        }
    }

    #[test]
    fn subadditivity_examples() {
        let e = Euclidean::new(2).unwrap();
        let solver = Solver::LocalSearch { restarts: 2, max_iter: 50, seed: 0 };
        let a = sample_family(&e, &vec![0.0, 0.0], &Family::UniformBall { radius: 1.0 }, 1000, 1).unwrap();
        let b = sample_family(&e, &vec![5.0, 0.0], &Family::UniformBall { radius: 1.0 }, 1000, 2).unwrap();
        let rows = subadditivity_check(&e, &a, &b, 2.0, &[(8, 8)], solver).unwrap();
        assert!(rows[0].margin >= 0.0);
        let zero = subadditivity_check(&e, &a, &Measure::empty(), 2.0, &[(8, 0)], solver).unwrap();
        assert_eq!(zero[0].lhs, zero[0].rhs);
        let dup = subadditivity_check(&e, &a, &a, 2.0, &[(8, 8)], solver).unwrap();
        assert!(dup[0].lhs <= dup[0].rhs);
    }
}
