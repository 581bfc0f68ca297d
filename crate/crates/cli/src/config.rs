use std::path::PathBuf;

use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};

use quantgrowth::measures::Family;

use crate::experiments::{self, Experiment};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub seed: u64,
    /// Overridden by `--out`; defaults to `out/<experiment>`.
    pub output: Option<PathBuf>,
    pub space: Option<SpaceSpec>,
    pub measure: Option<MeasureSpec>,
    pub solver: Option<SolverSpec>,
    #[serde(default)]
    pub grids: Grids,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceSpec {
    Euclidean {
        dim: usize,
    },
    HyperbolicPlane {
        #[serde(default)]
        curvature: Option<f64>,
    },
    FlatTorus {
        dim: usize,
        side: f64,
    },
    /// Graph of z = A sin(2πx/period) sin(2πy/period) over [−W, W]².
    Sinusoid {
        amplitude: f64,
        period: f64,
        half_width: f64,
        resolution: usize,
    },
}

impl SpaceSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            SpaceSpec::Euclidean { .. } => "euclidean",
            SpaceSpec::HyperbolicPlane { .. } => "hyperbolic_plane",
            SpaceSpec::FlatTorus { .. } => "flat_torus",
            SpaceSpec::Sinusoid { .. } => "sinusoid",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    pub atoms: usize,
    pub law: Family,
}

/// Quantizer solver; local-search restarts draw from the config seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SolverSpec {
    #[serde(rename = "exact_1d")]
    Exact1d,
    LocalSearch {
        restarts: usize,
        max_iter: usize,
    },
}

/// Numeric grids and scalars; each experiment declares which keys it
/// requires and which it accepts.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    pub ns: Option<Vec<usize>>,
    pub ks: Option<Vec<usize>>,
    pub k: Option<usize>,
    pub rs: Option<Vec<f64>>,
    pub p: Option<f64>,
    pub delta: Option<f64>,
    pub seeds: Option<usize>,
    pub sphere_n: Option<usize>,
    pub vartheta: Option<f64>,
    pub kappa: Option<f64>,
    pub slack: Option<f64>,
    pub kappas: Option<Vec<f64>>,
    pub ds: Option<Vec<usize>>,
    pub r0: Option<f64>,
    pub cells: Option<usize>,
    pub reach: Option<f64>,
    pub points: Option<usize>,
    pub r_min: Option<f64>,
    pub quadrature: Option<f64>,
}

impl Grids {
    pub fn present(&self) -> Vec<String> {
        let v = serde_json::to_value(self).expect("grids serialize");
        v.as_object().map(|m| m.iter().filter(|(_, v)| !v.is_null()).map(|(k, _)| k.clone()).collect()).unwrap_or_default()
    }
}

/// Parses TOML text; syntax and schema errors carry line and column.
pub fn parse(text: &str) -> Result<ExperimentConfig> {
    Ok(toml::from_str(text)?)
}

fn positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        bail!("field grids.{name}: must be positive and finite, got {x}");
    }
    Ok(())
}

fn increasing(name: &str, xs: &[f64]) -> Result<()> {
    if xs.is_empty() {
        bail!("field grids.{name}: must be nonempty");
    }
    if xs.windows(2).any(|w| !(w[0] < w[1])) {
        bail!("field grids.{name}: must be strictly increasing");
    }
    xs.iter().try_for_each(|&x| positive(name, x))
}

/// Checks the config against the schema of its experiment.
pub fn validate(cfg: &ExperimentConfig) -> Result<&'static Experiment> {
    let exp = experiments::find(&cfg.experiment)?;
    match (&cfg.space, exp.spaces.is_empty()) {
        (Some(s), true) => bail!("field space: experiment {} takes no space, found kind {}", exp.name, s.kind()),
        (None, false) => bail!("field space: required by experiment {} (one of {})", exp.name, exp.spaces.join(", ")),
        (Some(s), false) if !exp.spaces.contains(&s.kind()) => {
            bail!("field space.kind: experiment {} supports {}, found {}", exp.name, exp.spaces.join(", "), s.kind())
        }
        _ => {}
    }
    match (&cfg.measure, exp.measure) {
        (Some(_), false) => bail!("field measure: not used by experiment {}", exp.name),
        (None, true) => bail!("field measure: required by experiment {}", exp.name),
        (Some(m), true) if m.atoms == 0 => bail!("field measure.atoms: must be >= 1"),
        _ => {}
    }
    match (&cfg.solver, exp.solver) {
        (Some(_), false) => bail!("field solver: not used by experiment {}", exp.name),
        (None, true) => bail!("field solver: required by experiment {}", exp.name),
        (Some(SolverSpec::Exact1d), true) if cfg.space.as_ref().is_some_and(|s| *s != (SpaceSpec::Euclidean { dim: 1 })) => {
            bail!("field solver.kind: exact_1d needs space euclidean with dim = 1")
        }
        (Some(SolverSpec::LocalSearch { restarts, max_iter }), true) if *restarts == 0 || *max_iter == 0 => {
            bail!("field solver: restarts and max_iter must be >= 1")
        }
        _ => {}
    }
    let present = cfg.grids.present();
    for key in &present {
        if !exp.required.contains(&key.as_str()) && !exp.optional.contains(&key.as_str()) {
            bail!("field grids.{key}: not used by experiment {}", exp.name);
        }
    }
    for key in exp.required {
        if !present.iter().any(|p| p == key) {
            bail!("field grids.{key}: required by experiment {}", exp.name);
        }
    }
    let g = &cfg.grids;
    if let Some(rs) = &g.rs {
        increasing("rs", rs)?;
    }
    for (name, list) in [("ns", &g.ns), ("ks", &g.ks), ("ds", &g.ds)] {
        if let Some(xs) = list {
            if xs.is_empty() || xs.contains(&0) {
                bail!("field grids.{name}: must be nonempty with entries >= 1");
            }
        }
    }
    if let Some(p) = g.p {
        if !(p >= 1.0) || !p.is_finite() {
            bail!("field grids.p: must be >= 1, got {p}");
        }
    }
    for (name, x) in [
        ("delta", g.delta),
        ("vartheta", g.vartheta),
        ("slack", g.slack),
        ("r0", g.r0),
        ("reach", g.reach),
        ("r_min", g.r_min),
        ("quadrature", g.quadrature),
    ] {
        if let Some(x) = x {
            positive(name, x)?;
        }
    }
    if let Some(k) = g.kappa {
        if !(k <= 0.0) {
            bail!("field grids.kappa: must be <= 0, got {k}");
        }
    }
    if let Some(ks) = &g.kappas {
        if ks.is_empty() || ks.iter().any(|k| !(*k <= 0.0)) {
            bail!("field grids.kappas: must be nonempty with entries <= 0");
        }
    }
    for (name, x) in [("seeds", g.seeds), ("sphere_n", g.sphere_n), ("cells", g.cells), ("points", g.points)] {
        if x == Some(0) {
            bail!("field grids.{name}: must be >= 1");
        }
    }
    if matches!(g.k, Some(k) if k < 2) {
        bail!("field grids.k: must be >= 2");
    }
    Ok(exp)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ZADOR: &str = r#"
experiment = "zador1d"
seed = 1

[space]
kind = "euclidean"
dim = 1

[measure]
atoms = 100

[measure.law]
family = "grid"
lo = [0.0]
hi = [1.0]

[solver]
kind = "exact_1d"

[grids]
ns = [4, 8]
p = 2.0
"#;

    #[test]
    fn parses_and_validates() {
        let cfg = parse(ZADOR).unwrap();
        assert_eq!(cfg.seed, 1);
        assert_eq!(cfg.grids.present(), vec!["ns".to_string(), "p".to_string()]);
        assert_eq!(validate(&cfg).unwrap().name, "zador1d");
    }

    #[test]
    fn unknown_keys_are_errors_with_position() {
        let text = ZADOR.replace("p = 2.0", "p = 2.0\nq = 3");
        let err = format!("{:#}", parse(&text).unwrap_err());
        assert!(err.contains("unknown field `q`"), "{err}");
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn seed_is_mandatory() {
        let err = format!("{:#}", parse(&ZADOR.replace("seed = 1\n", "")).unwrap_err());
        assert!(err.contains("seed"), "{err}");
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let msg = |text: &str| format!("{:#}", validate(&parse(text).unwrap()).unwrap_err());
        assert!(msg(&ZADOR.replace("ns = [4, 8]\n", "")).contains("grids.ns"));
        assert!(msg(&ZADOR.replace("p = 2.0", "p = 2.0\nslack = 1.1")).contains("grids.slack"));
        assert!(msg(&ZADOR.replace("dim = 1", "dim = 2")).contains("solver.kind"));
        assert!(msg(&ZADOR.replace("zador1d", "nope")).contains("unknown experiment"));
        assert!(msg(&ZADOR.replace("p = 2.0", "p = 0.5")).contains("grids.p"));
    }
}
