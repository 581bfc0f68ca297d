use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, VecDeque};
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use super::{check_sphere_args, MetricSpace, SphereSample, SphereSampling, VolumeMeasure};
use crate::error::{Error, Result};

// Edge weights are rounded to multiples of 2^-36 so that every path length
// is an exact dyadic sum: d(x, y) and d(y, x) agree bit for bit.
const WEIGHT_QUANTUM: f64 = 1.0 / (1u64 << 36) as f64;
const MEMO_CAPACITY: usize = 64;

fn quantize_weight(w: f64) -> f64 {
    (w / WEIGHT_QUANTUM).round() * WEIGHT_QUANTUM
}

/// Layout of a mesh built on a square grid over [−W, W]².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    /// Vertices per side.
    pub n: usize,
    pub step: f64,
    pub half_width: f64,
    pub amplitude: f64,
    pub frequency: f64,
    /// Period 2π/ω of the height function.
    pub period: f64,
    /// Grid steps per period.
    pub steps_per_period: usize,
}

/// Indexed vertex/edge list used for mesh import and export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshJson {
    pub vertices: Vec<[f64; 3]>,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertex_area: Option<Vec<f64>>,
}

/// Embedded surface discretized as a chord-weighted graph.
///
/// Distances are shortest-path lengths; the volume measure is the lumped
/// per-vertex triangle area.
#[derive(Debug)]
pub struct MeshSurface {
    vertices: Vec<[f64; 3]>,
    adjacency: Vec<Vec<(usize, f64)>>,
    vertex_area: Option<Vec<f64>>,
    boundary: Vec<usize>,
    max_edge: f64,
    grid: Option<GridInfo>,
    fields: RwLock<HashMap<usize, Arc<Vec<f64>>>>,
}

fn chord(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn triangle_area(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let x = u[1] * v[2] - u[2] * v[1];
    let y = u[2] * v[0] - u[0] * v[2];
    let z = u[0] * v[1] - u[1] * v[0];
    0.5 * (x * x + y * y + z * z).sqrt()
}

fn integral_ratio(x: f64, what: &str) -> Result<usize> {
    let n = x.round();
    if n < 1.0 || (x - n).abs() > 1e-9 * x.abs().max(1.0) {
        return Err(Error::Config(format!("{what} must be a positive integer, got {x}")));
    }
    Ok(n as usize)
}

/// Graph of f(x, y) = A sin(ωx) sin(ωy) over [−W, W]², sampled with
/// `resolution` grid steps per unit length and 8-neighbor connectivity.
pub fn build_sinusoidal_surface(amplitude: f64, frequency: f64, half_width: f64, resolution: usize) -> Result<MeshSurface> {
    if resolution < 16 {
        return Err(Error::Config(format!("resolution must be >= 16 steps per unit, got {resolution}")));
    }
    if !(frequency > 0.0) || !(half_width > 0.0) || !amplitude.is_finite() {
        return Err(Error::Config("sinusoidal surface needs frequency > 0, half_width > 0, finite amplitude".into()));
    }
    let period = std::f64::consts::TAU / frequency;
    integral_ratio(half_width / period, "half_width / period")?;
    let steps_per_period = integral_ratio(period * resolution as f64, "period * resolution")?;
    let half_steps = integral_ratio(half_width * resolution as f64, "half_width * resolution")?;
    let n = 2 * half_steps + 1;
    let step = 1.0 / resolution as f64;
    let coord = |i: usize| -half_width + i as f64 * step;

    let mut vertices = Vec::with_capacity(n * n);
    for i in 0..n {
        let x = coord(i);
        for j in 0..n {
            let y = coord(j);
            vertices.push([x, y, amplitude * (frequency * x).sin() * (frequency * y).sin()]);
        }
    }
    let idx = |i: usize, j: usize| i * n + j;

    let mut adjacency = vec![Vec::with_capacity(8); n * n];
    let mut max_edge: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let a = idx(i, j);
            for (di, dj) in [(1i64, 0i64), (0, 1), (1, 1), (1, -1)] {
                let (ni, nj) = (i as i64 + di, j as i64 + dj);
                if ni < 0 || nj < 0 || ni >= n as i64 || nj >= n as i64 {
                    continue;
                }
                let b = idx(ni as usize, nj as usize);
                let w = quantize_weight(chord(&vertices[a], &vertices[b]));
                max_edge = max_edge.max(w);
                adjacency[a].push((b, w));
                adjacency[b].push((a, w));
            }
        }
    }

    let mut area = vec![0.0; n * n];
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            for tri in [[a, b, c], [a, c, d]] {
                let t = triangle_area(&vertices[tri[0]], &vertices[tri[1]], &vertices[tri[2]]) / 3.0;
                for v in tri {
                    area[v] += t;
                }
            }
        }
    }

    let boundary = (0..n * n)
        .filter(|v| {
            let (i, j) = (v / n, v % n);
            i == 0 || j == 0 || i == n - 1 || j == n - 1
        })
        .collect();

    Ok(MeshSurface {
        vertices,
        adjacency,
        vertex_area: Some(area),
        boundary,
        max_edge,
        grid: Some(GridInfo { n, step, half_width, amplitude, frequency, period, steps_per_period }),
        fields: RwLock::new(HashMap::new()),
    })
}

impl MeshSurface {
    /// Imports an indexed mesh; edge weights are chord lengths. Boundary
    /// detection is unavailable for imported meshes.
    pub fn from_json(mesh: MeshJson) -> Result<Self> {
        let nv = mesh.vertices.len();
        if nv == 0 {
            return Err(Error::Config("mesh has no vertices".into()));
        }
        if let Some(a) = &mesh.vertex_area {
            if a.len() != nv || a.iter().any(|x| !(*x >= 0.0)) {
                return Err(Error::Config("vertex_area must hold one nonnegative value per vertex".into()));
            }
        }
        let mut adjacency = vec![Vec::new(); nv];
        let mut max_edge: f64 = 0.0;
        for &[a, b] in &mesh.edges {
            if a >= nv || b >= nv || a == b {
                return Err(Error::Config(format!("invalid edge [{a}, {b}]")));
            }
            let w = quantize_weight(chord(&mesh.vertices[a], &mesh.vertices[b]));
            if !(w > 0.0) {
                return Err(Error::Config(format!("edge [{a}, {b}] has zero length")));
            }
            max_edge = max_edge.max(w);
            adjacency[a].push((b, w));
            adjacency[b].push((a, w));
        }
        let mut seen = vec![false; nv];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &(u, _) in &adjacency[v] {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Config("mesh graph is not connected".into()));
        }
        Ok(Self {
            vertices: mesh.vertices,
            adjacency,
            vertex_area: mesh.vertex_area,
            boundary: Vec::new(),
            max_edge,
            grid: None,
            fields: RwLock::new(HashMap::new()),
        })
    }

    pub fn to_json(&self) -> MeshJson {
        let edges = self
            .adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, nb)| nb.iter().filter(move |(b, _)| *b > a).map(move |(b, _)| [a, *b]))
            .collect();
        MeshJson { vertices: self.vertices.clone(), edges, vertex_area: self.vertex_area.clone() }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn vertex_area(&self) -> Option<&[f64]> {
        self.vertex_area.as_deref()
    }

    pub fn total_area(&self) -> Option<f64> {
        self.vertex_area.as_ref().map(|a| a.iter().sum())
    }

    pub fn max_edge(&self) -> f64 {
        self.max_edge
    }

    pub fn grid(&self) -> Option<&GridInfo> {
        self.grid.as_ref()
    }

    /// Grid vertex closest to the planar point (x, y).
    pub fn nearest_vertex(&self, x: f64, y: f64) -> Result<usize> {
        let g = self.grid.as_ref().ok_or_else(|| Error::Unsupported("nearest_vertex needs a grid mesh".into()))?;
        let to_index = |c: f64| ((c + g.half_width) / g.step).round();
        let (i, j) = (to_index(x), to_index(y));
        if i < 0.0 || j < 0.0 || i >= g.n as f64 || j >= g.n as f64 {
            return Err(Error::Domain(format!("({x}, {y}) lies outside the mesh")));
        }
        Ok(i as usize * g.n + j as usize)
    }

    /// Image of vertex `v` under translation by (a, b) periods, if it stays
    /// on the grid.
    pub fn translate(&self, v: usize, a: i64, b: i64) -> Option<usize> {
        let g = self.grid.as_ref()?;
        let s = g.steps_per_period as i64;
        let i = (v / g.n) as i64 + a * s;
        let j = (v % g.n) as i64 + b * s;
        let n = g.n as i64;
        (i >= 0 && j >= 0 && i < n && j < n).then(|| (i * n + j) as usize)
    }

    /// Shortest-path distances from `src` to every vertex, memoized.
    pub fn distance_field(&self, src: usize) -> Arc<Vec<f64>> {
        if let Some(f) = self.fields.read().expect("memo lock").get(&src) {
            return Arc::clone(f);
        }
        let field = Arc::new(self.dijkstra(src));
        let mut memo = self.fields.write().expect("memo lock");
        if memo.len() >= MEMO_CAPACITY {
            memo.clear();
        }
        Arc::clone(memo.entry(src).or_insert(field))
    }

    fn cached_field(&self, v: usize) -> Option<Arc<Vec<f64>>> {
        self.fields.read().expect("memo lock").get(&v).cloned()
    }

    fn dijkstra(&self, src: usize) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.vertices.len()];
        let mut heap = BinaryHeap::new();
        dist[src] = 0.0;
        // Nonnegative floats order like their bit patterns.
        heap.push(Reverse((0u64, src)));
        while let Some(Reverse((bits, v))) = heap.pop() {
            let dv = f64::from_bits(bits);
            if dv > dist[v] {
                continue;
            }
            for &(u, w) in &self.adjacency[v] {
                let cand = dv + w;
                if cand < dist[u] {
                    dist[u] = cand;
                    heap.push(Reverse((cand.to_bits(), u)));
                }
            }
        }
        dist
    }

    /// Distance from `x` to the mesh boundary (∞ for imported meshes).
    pub fn boundary_distance(&self, x: usize) -> f64 {
        let field = self.distance_field(x);
        self.boundary.iter().map(|&b| field[b]).fold(f64::INFINITY, f64::min)
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.vertices.len() {
            return Err(Error::Domain(format!("vertex {v} out of range (mesh has {})", self.vertices.len())));
        }
        Ok(())
    }

    fn areas(&self) -> Result<&[f64]> {
        self.vertex_area.as_deref().ok_or_else(|| Error::Unsupported("mesh carries no vertex areas".into()))
    }
}

impl MetricSpace for MeshSurface {
    type Point = usize;

    fn dim(&self) -> usize {
        2
    }

    fn name(&self) -> String {
        match &self.grid {
            Some(g) => format!(
                "sinusoidal_mesh(amplitude={}, frequency={}, half_width={}, step={})",
                g.amplitude, g.frequency, g.half_width, g.step
            ),
            None => format!("mesh(vertices={})", self.vertices.len()),
        }
    }

    fn validate(&self, x: &usize) -> Result<()> {
        self.check_vertex(*x)
    }

    fn distance(&self, x: &usize, y: &usize) -> f64 {
        if x == y {
            return 0.0;
        }
        if let Some(f) = self.cached_field(*x) {
            return f[*y];
        }
        if let Some(f) = self.cached_field(*y) {
            return f[*x];
        }
        self.distance_field(*x.min(y))[*x.max(y)]
    }

    fn distances_from(&self, x: &usize, ys: &[usize]) -> Vec<f64> {
        let field = self.distance_field(*x);
        ys.iter().map(|y| field[*y]).collect()
    }

    fn coords(&self, x: &usize) -> Vec<f64> {
        self.vertices[*x].to_vec()
    }

    fn from_coords(&self, c: &[f64]) -> Result<usize> {
        if c.len() != 3 {
            return Err(Error::Domain(format!("mesh points have 3 coordinates, got {}", c.len())));
        }
        let v = match self.grid {
            Some(_) => self.nearest_vertex(c[0], c[1])?,
            None => (0..self.vertices.len())
                .min_by(|&a, &b| {
                    let da = chord(&self.vertices[a], &[c[0], c[1], c[2]]);
                    let db = chord(&self.vertices[b], &[c[0], c[1], c[2]]);
                    da.total_cmp(&db)
                })
                .expect("mesh is nonempty"),
        };
        if chord(&self.vertices[v], &[c[0], c[1], c[2]]) > 1e-9 {
            return Err(Error::Domain(format!("{c:?} is not a mesh vertex")));
        }
        Ok(v)
    }
}

impl SphereSampling for MeshSurface {
    /// Vertex band `|d(v, center) − R| ≤ band`; `n` is ignored.
    fn sample_sphere(&self, center: &usize, radius: f64, n: usize, band: f64) -> Result<SphereSample<usize>> {
        check_sphere_args(radius, n.max(1), band)?;
        self.check_vertex(*center)?;
        if band < self.max_edge {
            return Err(Error::Argument(format!("mesh band {band} is below the max edge length {}", self.max_edge)));
        }
        let field = self.distance_field(*center);
        let boundary_distance = self.boundary.iter().map(|&b| field[b]).fold(f64::INFINITY, f64::min);
        if boundary_distance <= radius + band {
            return Err(Error::Boundary { radius, band, boundary_distance });
        }
        let points: Vec<usize> = (0..self.vertices.len()).filter(|&v| (field[v] - radius).abs() <= band).collect();
        if points.is_empty() {
            let max_distance = field.iter().copied().fold(0.0, f64::max);
            return Err(Error::EmptySphere { radius, max_distance });
        }
        Ok(SphereSample { center: *center, radius, points, band, fill: self.max_edge })
    }

    fn default_band(&self) -> f64 {
        1.5 * self.max_edge
    }
}

impl VolumeMeasure for MeshSurface {
    fn ball_volume(&self, x: &usize, r: f64) -> Result<f64> {
        let areas = self.areas()?;
        self.check_vertex(*x)?;
        let field = self.distance_field(*x);
        Ok(field.iter().zip(areas).filter(|(d, _)| **d < r).map(|(_, a)| a).sum())
    }

    /// Vertices of the annulus with their lumped areas; `resolution` is
    /// fixed by the mesh.
    fn annulus_quadrature(&self, center: &usize, r_in: f64, r_out: f64, _resolution: f64) -> Result<Vec<(usize, f64)>> {
        let areas = self.areas()?;
        self.check_vertex(*center)?;
        let field = self.distance_field(*center);
        Ok((0..self.vertices.len()).filter(|&v| field[v] >= r_in && field[v] < r_out).map(|v| (v, areas[v])).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn flat_mesh_octile_distortion() {
        let m = build_sinusoidal_surface(0.0, TAU, 2.0, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let nv = m.vertex_count();
        for _ in 0..100 {
            let a = rng.random_range(0..nv);
            let b = rng.random_range(0..nv);
            if a == b {
                continue;
            }
            let (p, q) = (m.vertices()[a], m.vertices()[b]);
            let planar = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
            let ratio = m.distance(&a, &b) / planar;
            assert!((1.0 - 1e-9..=1.083).contains(&ratio), "ratio {ratio}");
        }
        assert!((m.total_area().unwrap() - 16.0).abs() < 1e-9);
    }

    #[test]
    fn distances_are_exactly_symmetric() {
        let m = build_sinusoidal_surface(1.0, TAU, 1.0, 16).unwrap();
        let (a, b) = (7, 900);
        let ab = m.distance_field(a)[b];
        let ba = m.distance_field(b)[a];
        assert_eq!(ab.to_bits(), ba.to_bits());
    }

    #[test]
    fn graph_surface_dominates_its_shadow() {
        let m = build_sinusoidal_surface(1.0, TAU, 3.0, 60).unwrap();
        assert!(m.total_area().unwrap() > 36.0);
    }

    #[test]
    fn period_translation_preserves_vertex_set() {
        let m = build_sinusoidal_surface(1.0, TAU, 2.0, 16).unwrap();
        let g = *m.grid().unwrap();
        let mut hits = 0;
        for v in 0..m.vertex_count() {
            if let Some(u) = m.translate(v, 1, -1) {
                let (p, q) = (m.vertices()[v], m.vertices()[u]);
                assert!((q[0] - p[0] - g.period).abs() < 1e-12);
                assert!((q[1] - p[1] + g.period).abs() < 1e-12);
                assert!((q[2] - p[2]).abs() < 1e-12);
                hits += 1;
            }
        }
        assert!(hits > 0);
    }

    #[test]
    fn rejects_incommensurate_width() {
        assert!(matches!(build_sinusoidal_surface(1.0, TAU, 2.5, 16), Err(Error::Config(_))));
        assert!(matches!(build_sinusoidal_surface(1.0, TAU, 2.0, 8), Err(Error::Config(_))));
    }

    #[test]
    fn sinusoid_sphere_band_is_nonempty() {
        let m = build_sinusoidal_surface(1.0, TAU, 5.0, 20).unwrap();
        let x0 = m.nearest_vertex(0.0, 0.0).unwrap();
        let s = m.sample_sphere(&x0, 3.0, 1, m.max_edge()).unwrap();
        assert!(!s.is_empty());
        let field = m.distance_field(x0);
        for v in &s.points {
            assert!((field[*v] - 3.0).abs() <= s.band);
        }
        assert!(matches!(m.sample_sphere(&x0, 4.9, 1, m.default_band()), Err(Error::Boundary { .. })));
        assert!(matches!(m.sample_sphere(&x0, 3.0, 1, 0.5 * m.max_edge()), Err(Error::Argument(_))));
    }

    #[test]
    fn flat_vertex_ball_density() {
        let m = build_sinusoidal_surface(0.0, TAU, 2.0, 20).unwrap();
        let r = 10.0 * m.grid().unwrap().step;
        for &(x, y) in &[(0.0, 0.0), (0.55, -0.3), (-1.0, 1.0)] {
            let v = m.nearest_vertex(x, y).unwrap();
            let ratio = m.ball_volume(&v, r).unwrap() / (PI * r * r);
            assert!((0.8..=1.25).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn json_round_trip() {
        let m = build_sinusoidal_surface(0.5, TAU, 1.0, 16).unwrap();
        let json = serde_json::to_string(&m.to_json()).unwrap();
        let back = MeshSurface::from_json(serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back.vertex_count(), m.vertex_count());
        assert_eq!(back.distance(&0, &500), m.distance(&0, &500));
        let broken = MeshJson { vertices: vec![[0.0; 3], [1.0, 0.0, 0.0]], edges: vec![], vertex_area: None };
        assert!(matches!(MeshSurface::from_json(broken), Err(Error::Config(_))));
    }
}
