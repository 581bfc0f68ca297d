use std::f64::consts::TAU;

use anyhow::{anyhow, bail, Result};
use rayon::prelude::*;
use serde_json::{json, Value};

use quantgrowth::bounds::{
    bishop_gromov_check, bishop_gromov_ratios, euclid_growth_check, exp_map_growth_check, minkowski_consistency, periodic_cover_check,
    pkbd_grid_check, BoundLedger, LedgerEntry, ROUNDING_TOL,
};
use quantgrowth::covering::{
    cm_estimate, geometric_grid, growth_curve, least_squares_slope, minkowski_content, theta_estimate, GrowthCurve,
};
use quantgrowth::measures::{radial_pushforward, sample_family};
use quantgrowth::numeric::unit_ball_volume;
use quantgrowth::quantize::{coeff_table, floor_cost, pareto_floor_quantizer, pierce_constant, shell_quantizer, ShellOptions, Solver};
use quantgrowth::spaces::{
    build_sinusoidal_surface, Euclidean, FlatTorus, HyperbolicPlane, MeshSurface, MetricSpace, RadialGeometry, SphereSampling,
    VolumeMeasure,
};

use crate::config::{ExperimentConfig, MeasureSpec, SolverSpec, SpaceSpec};

/// A named experiment: its schema and what it measures.
#[derive(Debug)]
pub struct Experiment {
    pub name: &'static str,
    pub summary: &'static str,
    /// What the experiment checks, in plain words.
    pub checks: &'static str,
    /// Accepted `space.kind` values; empty means no space section.
    pub spaces: &'static [&'static str],
    pub measure: bool,
    pub solver: bool,
    pub required: &'static [&'static str],
    pub optional: &'static [&'static str],
    /// Files written besides ledger.csv, ledger.json, summary.json and manifest.json.
    pub outputs: &'static [&'static str],
    pub example: &'static str,
}

pub const EXPERIMENTS: [Experiment; 11] = [
    Experiment {
        name: "zador1d",
        summary: "Optimal quantization coefficients N^p V_N of a one-dimensional measure",
        checks: "Convergence of N^p V_{N,p} for the uniform law on an interval to the asymptotic quantization constant 1/(2^p (p+1)), which is 1/12 for p = 2. The summary reports the last scaled value next to that constant.",
        spaces: &["euclidean"],
        measure: true,
        solver: true,
        required: &["ns", "p"],
        optional: &[],
        outputs: &["coeff_table.csv (N,V,scaled)"],
        example: include_str!("../experiments/zador1d.toml"),
    },
    Experiment {
        name: "zador2d_square",
        summary: "Quantization coefficients N^{p/d} V_N on the unit square",
        checks: "Plateau of N^{p/d} V_{N,p} for the uniform law on [0,1]^2 as N grows; the summary reports the relative change between the last two rows.",
        spaces: &["euclidean"],
        measure: true,
        solver: true,
        required: &["ns", "p"],
        optional: &[],
        outputs: &["coeff_table.csv (N,V,scaled)"],
        example: include_str!("../experiments/zador2d_square.toml"),
    },
    Experiment {
        name: "pierce_floor",
        summary: "Floor-quantizer cost of Pareto radius sets against the explicit moment bound",
        checks: "For radius sets drawn from a Pareto law with exponent delta/p, the best floor cost over `seeds` draws satisfies N^p V^F_{N,p}(mu) <= C(p, delta) (mass + (p+delta)-th moment) with C(p, delta) = 2^{p+delta-1} Gamma(p+1) p^{p+1} delta^{-p}.",
        spaces: &["euclidean", "hyperbolic_plane", "flat_torus"],
        measure: true,
        solver: false,
        required: &["ns", "p", "delta"],
        optional: &["seeds"],
        outputs: &["floor_table.csv (N,best_seed,floor_cost,scaled,bound)"],
        example: include_str!("../experiments/pierce_floor.toml"),
    },
    Experiment {
        name: "shell_h2",
        summary: "Shell quantizers built from k covered geodesic spheres plus the center",
        checks: "Boundedness of k^p V_{k^d+1,p}(mu) over k for measures with finite sinh-moment: the union cost never exceeds the sum of per-annulus costs, each annulus cost stays below its radial-plus-cover bound, and the largest normalized cost is within 10 times the median.",
        spaces: &["hyperbolic_plane", "euclidean", "flat_torus"],
        measure: true,
        solver: false,
        required: &["ks", "p"],
        optional: &["delta", "seeds", "sphere_n"],
        outputs: &["shell_table.csv (k,N,cost,scaled,decomposition,floor_cost,center_cost)", "shells.csv (k,radius,budget,cover_radius,mass,own_cost,annulus_bound,skipped)"],
        example: include_str!("../experiments/shell_h2.toml"),
    },
    Experiment {
        name: "growth_euclidean",
        summary: "Covering growth k r_{k^{d-1}} of Euclidean spheres",
        checks: "Measured k r_{k^{d-1}}(sphere of radius R) against the nonnegative-curvature bounds (5^d d)^{1/(d-1)} R and (3^d d omega_d / vartheta)^{1/(d-1)} R, plus the antipodal lower bound 2R in the plane.",
        spaces: &["euclidean"],
        measure: false,
        solver: false,
        required: &["rs", "k"],
        optional: &["sphere_n", "vartheta"],
        outputs: &["growth_curve.csv (R,k,value,lower)"],
        example: include_str!("../experiments/growth_euclidean.toml"),
    },
    Experiment {
        name: "growth_h2",
        summary: "Covering growth of geodesic circles in the hyperbolic plane",
        checks: "Measured k r_k(circle of radius R) against the exponential-map bound (2^{2d-1} d sinh(R)^{d-1})^{1/(d-1)}, and the log-slope of the growth curve in R, which tracks the sinh circumference (about 1).",
        spaces: &["hyperbolic_plane"],
        measure: false,
        solver: false,
        required: &["rs", "k"],
        optional: &["sphere_n"],
        outputs: &["growth_curve.csv (R,k,value,lower)"],
        example: include_str!("../experiments/growth_h2.toml"),
    },
    Experiment {
        name: "growth_sinusoid",
        summary: "Covering growth of geodesic spheres on the periodic sinusoidal surface",
        checks: "Measured k r_k(geodesic circle of radius R) on the mesh. The surface is quasi-isometric to the plane, so value/R levels off at large R; the summary reports value/R and the log-log slope over the grid.",
        spaces: &["sinusoid"],
        measure: false,
        solver: false,
        required: &["rs", "k"],
        optional: &[],
        outputs: &["growth_curve.csv (R,k,value,lower)"],
        example: include_str!("../experiments/growth_sinusoid.toml"),
    },
    Experiment {
        name: "bishop_gromov",
        summary: "Ball-volume ratios against a constant-curvature model",
        checks: "The ratio vol(B_r(x0)) / vol_kappa(r) is nonincreasing in r whenever kappa bounds the Ricci curvature from below; each consecutive pair is checked up to the multiplicative `slack`.",
        spaces: &["euclidean", "hyperbolic_plane", "flat_torus", "sinusoid"],
        measure: false,
        solver: false,
        required: &["rs", "kappa"],
        optional: &["slack"],
        outputs: &["bishop_gromov.csv (r,ratio)"],
        example: include_str!("../experiments/bishop_gromov.toml"),
    },
    Experiment {
        name: "group_cover_torus",
        summary: "Translate counts and sphere growth under the period-lattice action on the sinusoidal surface",
        checks: "For the Z^2 action by period translations, the measured quasi-isometry constants give ball-translate counts at most beta(floor(lambda (R + r0 + eps))), and the sphere growth satisfies value <= C R^3 with C calibrated at the smallest R.",
        spaces: &["sinusoid"],
        measure: false,
        solver: false,
        required: &["rs", "k"],
        optional: &[],
        outputs: &["translate_counts.csv (R,cell_translates,ball_translates,bound)", "growth_curve.csv (R,k,value,lower)"],
        example: include_str!("../experiments/group_cover_torus.toml"),
    },
    Experiment {
        name: "pkbd_grid",
        summary: "Model-space perimeter and sphere-to-ball bounds over a (kappa, d, R, r) grid",
        checks: "On model spaces of curvature kappa: the annulus perimeter (vol B_{R+r} - vol B_{R-r})/(2r) is at most d omega_d sin_kappa(R+r)^{d-1}, and the sphere-to-ball ratio is at most (C1 + C2 sqrt(-kappa) s)/s with constants depending on d and r0.",
        spaces: &[],
        measure: false,
        solver: false,
        required: &["kappas", "ds", "r0"],
        optional: &["cells", "reach"],
        outputs: &[],
        example: include_str!("../experiments/pkbd_grid.toml"),
    },
    Experiment {
        name: "minkowski_circle",
        summary: "Covering counts N(A;r) r^m against the Minkowski content of the unit circle",
        checks: "Two-sided comparison of covering certificates with tubular-volume ratios: sup N r^m <= 2^m omega_{d-m} / vartheta sup curve, inf curve <= 2^d omega_d / omega_{d-m} inf N r^m, and the coarser 2^d / omega_{d-m} factor on the upper side.",
        spaces: &["euclidean"],
        measure: false,
        solver: false,
        required: &["points", "r0"],
        optional: &["r_min", "quadrature"],
        outputs: &["cm_table.csv (r,lower_count,upper_count)", "minkowski_curve.csv (r,volume,value)"],
        example: include_str!("../experiments/minkowski_circle.toml"),
    },
];

pub fn find(name: &str) -> Result<&'static Experiment> {
    EXPERIMENTS.iter().find(|e| e.name == name).ok_or_else(|| {
        let names: Vec<&str> = EXPERIMENTS.iter().map(|e| e.name).collect();
        anyhow!("unknown experiment {name:?}; known experiments: {}", names.join(", "))
    })
}

/// Schema text shared by every experiment.
pub const SCHEMA: &str = "\
top level:
  experiment = <name>            required
  seed = <u64>                   required; --seed overrides
  output = <dir>                 optional; --out overrides, default out/<experiment>
[space] kind = one of
  euclidean         dim = <usize>
  hyperbolic_plane  curvature = <f64 < 0>, optional, default -1
  flat_torus        dim = <usize>, side = <f64>
  sinusoid          amplitude, period, half_width = <f64>, resolution = <usize> steps per unit length
[measure] atoms = <usize>
[measure.law] family = one of
  uniform_ball  radius       radial_exp  lambda       radial_pareto  gamma
  uniform_box   lo, hi       grid        lo, hi (atoms must be a perfect d-th power)
[solver] kind = exact_1d | local_search (restarts, max_iter)
[grids]
  ns, ks, ds = [usize]   rs, kappas = [f64]   k, seeds, sphere_n, cells, points = usize
  p, delta, vartheta, kappa, slack, r0, reach, r_min, quadrature = f64";

/// Files produced by an experiment, in write order.
pub struct Outputs {
    pub files: Vec<(String, String)>,
    pub ledger: BoundLedger,
    pub summary: Value,
}

impl Outputs {
    fn new(summary: Value) -> Self {
        Self { files: Vec::new(), ledger: BoundLedger::new(), summary }
    }

    fn file(mut self, name: &str, body: String) -> Self {
        self.files.push((name.to_string(), body));
        self
    }
}

enum Space {
    Euclidean(Euclidean),
    Hyperbolic(HyperbolicPlane),
    Torus(FlatTorus),
    Mesh(Box<MeshSurface>),
}

fn build_space(spec: &SpaceSpec) -> Result<Space> {
    Ok(match *spec {
        SpaceSpec::Euclidean { dim } => Space::Euclidean(Euclidean::new(dim)?),
        SpaceSpec::HyperbolicPlane { curvature: None } => Space::Hyperbolic(HyperbolicPlane::new()),
        SpaceSpec::HyperbolicPlane { curvature: Some(k) } => Space::Hyperbolic(HyperbolicPlane::with_curvature(k)?),
        SpaceSpec::FlatTorus { dim, side } => Space::Torus(FlatTorus::new(dim, side)?),
        SpaceSpec::Sinusoid { amplitude, period, half_width, resolution } => {
            if !(period > 0.0) {
                bail!("field space.period: must be positive, got {period}");
            }
            Space::Mesh(Box::new(build_sinusoidal_surface(amplitude, TAU / period, half_width, resolution)?))
        }
    })
}

/// Runs a validated config.
pub fn run(cfg: &ExperimentConfig) -> Result<Outputs> {
    let space = cfg.space.as_ref().map(build_space).transpose()?;
    let g = &cfg.grids;
    let wrong = || anyhow!("experiment {} does not support this space", cfg.experiment);
    let measure = || cfg.measure.as_ref().ok_or_else(|| anyhow!("field measure: missing"));
    let out = match (cfg.experiment.as_str(), space.as_ref()) {
        ("zador1d" | "zador2d_square", Some(Space::Euclidean(s))) => {
            let solver = match cfg.solver.ok_or_else(|| anyhow!("field solver: missing"))? {
                SolverSpec::Exact1d => Solver::Exact1d,
                SolverSpec::LocalSearch { restarts, max_iter } => Solver::LocalSearch { restarts, max_iter, seed: cfg.seed },
            };
            coefficients(s, &vec![0.0; s.dim()], measure()?, g.p.unwrap(), g.ns.as_ref().unwrap(), solver, cfg)?
        }
        ("pierce_floor", Some(sp)) => {
            let (p, delta, seeds) = (g.p.unwrap(), g.delta.unwrap(), g.seeds.unwrap_or(200));
            let ns = g.ns.as_ref().unwrap();
            match sp {
                Space::Euclidean(s) => pierce(s, &vec![0.0; s.dim()], measure()?, ns, p, delta, seeds, cfg.seed)?,
                Space::Hyperbolic(s) => pierce(s, &[0.0, 0.0], measure()?, ns, p, delta, seeds, cfg.seed)?,
                Space::Torus(s) => pierce(s, &vec![0.0; s.dim()], measure()?, ns, p, delta, seeds, cfg.seed)?,
                Space::Mesh(_) => return Err(wrong()),
            }
        }
        ("shell_h2", Some(sp)) => {
            let d = ShellOptions::default();
            let opts = ShellOptions {
                delta: g.delta.unwrap_or(d.delta),
                seeds: g.seeds.unwrap_or(d.seeds),
                seed: cfg.seed,
                sphere_n: g.sphere_n.unwrap_or(d.sphere_n),
                band: None,
            };
            let (ks, p) = (g.ks.as_ref().unwrap(), g.p.unwrap());
            match sp {
                Space::Hyperbolic(s) => shells(s, &[0.0, 0.0], measure()?, ks, p, opts, cfg.seed)?,
                Space::Euclidean(s) => shells(s, &vec![0.0; s.dim()], measure()?, ks, p, opts, cfg.seed)?,
                Space::Torus(s) => shells(s, &vec![0.0; s.dim()], measure()?, ks, p, opts, cfg.seed)?,
                Space::Mesh(_) => return Err(wrong()),
            }
        }
        ("growth_euclidean", Some(Space::Euclidean(s))) => {
            let d = s.dim();
            let vartheta = g.vartheta.unwrap_or_else(|| unit_ball_volume(d));
            let rs = g.rs.as_ref().unwrap();
            let (ledger, curve) = euclid_growth_check(s, &vec![0.0; d], rs, g.k.unwrap(), d, vartheta, g.sphere_n.unwrap_or(1024))?;
            let ratios: Vec<f64> = curve.rows.iter().map(|r| r.value / r.radius).collect();
            let mut out = Outputs::new(json!({"value_over_R": ratios, "vartheta": vartheta}));
            out.ledger = ledger;
            out.file("growth_curve.csv", curve.to_csv())
        }
        ("growth_h2", Some(Space::Hyperbolic(s))) => {
            let (ledger, curve) =
                exp_map_growth_check(s, &[0.0, 0.0], g.rs.as_ref().unwrap(), g.k.unwrap(), 2, g.sphere_n.unwrap_or(4096))?;
            let mut out = Outputs::new(json!({
                "log_slope": curve.log_slope(),
                "all_resolved": curve.rows.iter().all(|r| r.resolved),
            }));
            out.ledger = ledger;
            out.file("growth_curve.csv", curve.to_csv())
        }
        ("growth_sinusoid", Some(Space::Mesh(m))) => {
            let m: &MeshSurface = m;
            let x0 = m.nearest_vertex(0.0, 0.0)?;
            // Graph spheres are vertex bands; the sample size argument is unused.
            let curve = growth_curve(m, &x0, g.rs.as_ref().unwrap(), g.k.unwrap(), 2, 1, None)?;
            Outputs::new(growth_summary(&curve)).file("growth_curve.csv", curve.to_csv())
        }
        ("bishop_gromov", Some(sp)) => {
            let (rs, kappa, slack) = (g.rs.as_ref().unwrap(), g.kappa.unwrap(), g.slack.unwrap_or(1.0 + 1e-9));
            match sp {
                Space::Euclidean(s) => volume_ratios(s, &vec![0.0; s.dim()], kappa, rs, slack)?,
                Space::Hyperbolic(s) => volume_ratios(s, &[0.0, 0.0], kappa, rs, slack)?,
                Space::Torus(s) => volume_ratios(s, &vec![0.0; s.dim()], kappa, rs, slack)?,
                Space::Mesh(m) => volume_ratios(m.as_ref(), &m.nearest_vertex(0.0, 0.0)?, kappa, rs, slack)?,
            }
        }
        ("group_cover_torus", Some(Space::Mesh(m))) => {
            let m: &MeshSurface = m;
            let x0 = m.nearest_vertex(0.0, 0.0)?;
            let (ledger, report) = periodic_cover_check(m, x0, g.rs.as_ref().unwrap(), g.k.unwrap())?;
            let mut counts = String::from("R,cell_translates,ball_translates,bound\n");
            for c in &report.counts {
                counts.push_str(&format!("{},{},{},{}\n", c.radius, c.cell_translates, c.ball_translates, c.bound));
            }
            let mut out = Outputs::new(json!({
                "lambda": report.lambda,
                "eps": report.eps,
                "delta": report.delta,
                "cell_radius": report.cell_radius,
                "r0": report.r0,
                "growth_constant": report.growth_constant,
            }));
            out.ledger = ledger;
            out.file("translate_counts.csv", counts).file("growth_curve.csv", report.growth.to_csv())
        }
        ("pkbd_grid", None) => {
            let ledger = pkbd_grid_check(
                g.kappas.as_ref().unwrap(),
                g.ds.as_ref().unwrap(),
                g.r0.unwrap(),
                g.cells.unwrap_or(20),
                g.reach.unwrap_or(20.0),
            )?;
            let mut out = Outputs::new(json!({
                "raw_negative_margins": ledger.negative_margins(),
                "min_margin": ledger.min_margin(),
                "rounding_tol": ROUNDING_TOL,
            }));
            out.ledger = ledger;
            out
        }
        ("minkowski_circle", Some(Space::Euclidean(s))) => {
            if s.dim() != 2 {
                bail!("field space.dim: minkowski_circle needs dim = 2");
            }
            minkowski(s, g.points.unwrap(), g.r0.unwrap(), g.r_min.unwrap_or(0.02), g.quadrature.unwrap_or(200.0))?
        }
        _ => return Err(wrong()),
    };
    Ok(out)
}

fn coefficients<S: RadialGeometry>(
    space: &S,
    x0: &S::Point,
    m: &MeasureSpec,
    p: f64,
    ns: &[usize],
    solver: Solver,
    cfg: &ExperimentConfig,
) -> Result<Outputs> {
    let mu = sample_family(space, x0, &m.law, m.atoms, cfg.seed)?;
    let d = space.dim();
    let t = coeff_table(space, &mu, p, d, ns, solver)?;
    let last = t.rows.last().map(|r| r.scaled).unwrap_or(f64::NAN);
    let mut summary = json!({"p": p, "d": d, "last_scaled": last});
    if let [.., a, b] = t.rows.as_slice() {
        summary["relative_change"] = json!((b.scaled - a.scaled).abs() / a.scaled);
    }
    if cfg.experiment == "zador1d" {
        summary["uniform_interval_constant"] = json!(1.0 / (2f64.powf(p) * (p + 1.0)));
    }
    Ok(Outputs::new(summary).file("coeff_table.csv", t.to_csv()))
}

#[allow(clippy::too_many_arguments)]
fn pierce<S: RadialGeometry>(
    space: &S,
    x0: &S::Point,
    m: &MeasureSpec,
    ns: &[usize],
    p: f64,
    delta: f64,
    seeds: usize,
    seed: u64,
) -> Result<Outputs> {
    let mu = sample_family(space, x0, &m.law, m.atoms, seed)?;
    let mu1 = radial_pushforward(space, &mu, x0)?;
    let c = pierce_constant(p, delta)?;
    let bound = c * (mu1.total_mass() + mu1.moment(p + delta));
    let mut csv = String::from("N,best_seed,floor_cost,scaled,bound\n");
    let mut out = Outputs::new(json!({"pierce_constant": c, "bound": bound}));
    for &n in ns {
        let costs: Result<Vec<(f64, u64)>> = (0..seeds as u64)
            .into_par_iter()
            .map(|i| {
                let s = seed.wrapping_add(i);
                Ok((floor_cost(&mu1, &pareto_floor_quantizer(n, p, delta, s)?, p), s))
            })
            .collect();
        let (best, best_seed) = costs?
            .into_iter()
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .ok_or_else(|| anyhow!("field grids.seeds: must be >= 1"))?;
        let scaled = (n as f64).powf(p) * best;
        csv.push_str(&format!("{n},{best_seed},{best},{scaled},{bound}\n"));
        out.ledger.push(LedgerEntry::new(
            "floor_quantizer_bound",
            "N^p V^F_N <= C(p, delta) (mass + (p+delta)-th moment)",
            scaled,
            bound,
            json!({"N": n, "p": p, "delta": delta, "best_seed": best_seed}),
        ));
    }
    Ok(out.file("floor_table.csv", csv))
}

fn shells<S: SphereSampling + RadialGeometry>(
    space: &S,
    x0: &S::Point,
    m: &MeasureSpec,
    ks: &[usize],
    p: f64,
    opts: ShellOptions,
    seed: u64,
) -> Result<Outputs> {
    let mu = sample_family(space, x0, &m.law, m.atoms, seed)?;
    let d = space.dim();
    let mut table = String::from("k,N,cost,scaled,decomposition,floor_cost,center_cost\n");
    let mut per_shell = String::from("k,radius,budget,cover_radius,mass,own_cost,annulus_bound,skipped\n");
    let mut ledger = BoundLedger::new();
    let mut scaled_seq = Vec::new();
    for &k in ks {
        let res = shell_quantizer(space, &mu, x0, k, p, d, opts)?;
        let scaled = (k as f64).powf(p) * res.cost;
        scaled_seq.push(scaled);
        table.push_str(&format!(
            "{k},{},{},{scaled},{},{},{}\n",
            res.quantizer.len(),
            res.cost,
            res.decomposition,
            res.floor_cost,
            res.center_cost
        ));
        ledger.push(
            LedgerEntry::new(
                "shell_union_cost",
                "V(union of shells) <= sum of per-annulus costs",
                res.cost,
                res.decomposition,
                json!({"k": k}),
            )
            .with_tol(ROUNDING_TOL),
        );
        for s in &res.shells {
            per_shell.push_str(&format!(
                "{k},{},{},{},{},{},{},{}\n",
                s.radius,
                s.budget,
                s.cover_radius,
                s.mass,
                s.own_cost,
                s.annulus_bound,
                s.skipped.as_deref().unwrap_or("")
            ));
            if s.skipped.is_none() {
                ledger.push(
                    LedgerEntry::new(
                        "shell_annulus",
                        "annulus cost <= integral of ((r - R_i) + cover radius)^p",
                        s.own_cost,
                        s.annulus_bound,
                        json!({"k": k, "radius": s.radius}),
                    )
                    .with_tol(ROUNDING_TOL),
                );
            }
        }
    }
    let mut sorted = scaled_seq.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let max = sorted[sorted.len() - 1];
    ledger.push(LedgerEntry::new("shell_spread", "max_k k^p V <= 10 median_k k^p V", max, 10.0 * median, json!({"ks": ks, "p": p})));
    let mut out = Outputs::new(json!({"max_scaled": max, "median_scaled": median, "ratio": max / median}));
    out.ledger = ledger;
    Ok(out.file("shell_table.csv", table).file("shells.csv", per_shell))
}

fn growth_summary(curve: &GrowthCurve) -> Value {
    let pts: Vec<(f64, f64)> = curve.rows.iter().filter(|r| r.value > 0.0).map(|r| (r.radius.ln(), r.value.ln())).collect();
    json!({
        "value_over_R": curve.rows.iter().map(|r| r.value / r.radius).collect::<Vec<_>>(),
        "log_log_slope": if pts.len() >= 2 { least_squares_slope(&pts) } else { f64::NAN },
        "all_resolved": curve.rows.iter().all(|r| r.resolved),
    })
}

fn volume_ratios<S: VolumeMeasure>(space: &S, x0: &S::Point, kappa: f64, rs: &[f64], slack: f64) -> Result<Outputs> {
    let ratios = bishop_gromov_ratios(space, x0, kappa, rs)?;
    let ledger = bishop_gromov_check(space, x0, kappa, rs, slack)?;
    let mut csv = String::from("r,ratio\n");
    for (r, q) in rs.iter().zip(&ratios) {
        csv.push_str(&format!("{r},{q}\n"));
    }
    let mut out = Outputs::new(json!({"space": space.name(), "kappa": kappa, "slack": slack}));
    out.ledger = ledger;
    Ok(out.file("bishop_gromov.csv", csv))
}

fn minkowski(plane: &Euclidean, points: usize, r0: f64, r_min: f64, quadrature: f64) -> Result<Outputs> {
    if r_min >= r0 {
        bail!("field grids.r_min: must be below r0");
    }
    let circle: Vec<Vec<f64>> = (0..points)
        .map(|j| {
            let t = TAU * j as f64 / points as f64;
            vec![t.cos(), t.sin()]
        })
        .collect();
    let cm = cm_estimate(plane, &circle, 1.0, &geometric_grid(r_min, 2.0 * r0)?)?;
    let curve_grid = geometric_grid(r_min, r0)?;
    let origin = vec![0.0, 0.0];
    let cells = plane.annulus_quadrature(&origin, (1.0 - r0 - 0.01).max(0.0), 1.0 + r0 + 0.01, quadrature)?;
    let curve = minkowski_content(plane, &circle, 1, &curve_grid, &cells)?;
    let theta = theta_estimate(plane, &circle, 2.0, &curve_grid)?;
    // Lebesgue measure: ν(B_r(x)) = ω_d r^d exactly.
    let ledger = minkowski_consistency(&cm, &curve, 2, 1, theta, 1.0)?;
    let mut cm_csv = String::from("r,lower_count,upper_count\n");
    for row in &cm.rows {
        cm_csv.push_str(&format!("{},{},{}\n", row.r, row.lower_count, row.upper_count));
    }
    let mut curve_csv = String::from("r,volume,value\n");
    for row in &curve {
        curve_csv.push_str(&format!("{},{},{}\n", row.r, row.volume, row.value));
    }
    let mut out = Outputs::new(json!({"cm_upper": cm.upper, "cm_lower": cm.lower, "theta": theta}));
    out.ledger = ledger;
    Ok(out.file("cm_table.csv", cm_csv).file("minkowski_curve.csv", curve_csv))
}
