//! Versioned JSON run configuration.

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context};
use palais_core::{LaurentSeries, PairParams};
use serde::{Deserialize, Serialize};

pub const CONFIG_VERSION: u32 = 1;

/// Admissible range for every tolerance in the config.
pub const TOL_RANGE: (f64, f64) = (1e-13, 1e-4);

/// One Laurent coefficient as `[index, re, im]`.
pub type Term = (i32, f64, f64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub a: u32,
    pub b: u32,
    pub m: u32,
    pub n: u32,
    #[serde(default)]
    pub f: Vec<Term>,
    pub g: Vec<Term>,
}

impl ParamsConfig {
    pub fn to_params(&self) -> PairParams {
        PairParams::new(
            self.a,
            self.b,
            self.m,
            self.n,
            LaurentSeries::from_triples(&self.f),
            LaurentSeries::from_triples(&self.g),
        )
    }
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self { a: 2, b: 1, m: 1, n: 1, f: vec![(0, 1.0, 0.0), (1, 0.2, 0.0)], g: vec![(0, 1.0, 0.0)] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Local error tolerance of the path-lifting integrator.
    pub ode_tol: f64,
    /// Residual allowed when a return map is fitted through sample images.
    pub fit_tol: f64,
    /// Agreement required between numeric and closed-form results.
    pub report_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { ode_tol: 1e-12, fit_tol: 1e-8, report_tol: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LoopRadii {
    /// Radius of the generator loops and of the axis loops.
    pub generator: f64,
    /// Radius of the loop generating the holonomy of `D`.
    pub holonomy: f64,
}

impl Default for LoopRadii {
    fn default() -> Self {
        Self { generator: 1.0, holonomy: 0.5 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputPaths {
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Generator {
    #[default]
    Sigma1,
    Sigma2,
    Sy,
    Sx,
    #[serde(rename = "holonomy_D")]
    #[value(name = "holonomy_D")]
    HolonomyD,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonodromyOptions {
    pub generator: Generator,
    /// Fiber points the lift starts from, each `[re, im]`.
    pub starts: Vec<(f64, f64)>,
}

impl Default for MonodromyOptions {
    fn default() -> Self {
        Self { generator: Generator::Sigma1, starts: vec![(0.0, 0.0), (0.5, 0.1), (-0.2, 0.6), (0.3, -0.4)] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WitnessOptions {
    pub epsilon: f64,
    pub deltas: Vec<f64>,
    /// Report only the invariant-disc part.
    pub u1_mode: bool,
}

impl Default for WitnessOptions {
    fn default() -> Self {
        Self { epsilon: 0.5, deltas: vec![0.1, 0.05, 0.01], u1_mode: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyOptions {
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: palais_core::verify::DEFAULT_SEED }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub params: ParamsConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub loop_radii: LoopRadii,
    #[serde(default)]
    pub output: OutputPaths,
    #[serde(default)]
    pub monodromy: MonodromyOptions,
    #[serde(default)]
    pub witness: WitnessOptions,
    #[serde(default)]
    pub verify: VerifyOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            version: CONFIG_VERSION,
            params: ParamsConfig::default(),
            tolerances: Tolerances::default(),
            loop_radii: LoopRadii::default(),
            output: OutputPaths::default(),
            monodromy: MonodromyOptions::default(),
            witness: WitnessOptions::default(),
            verify: VerifyOptions::default(),
        }
    }
}

impl RunConfig {
    /// Parses and checks the structural invariants. Family constraints on
    /// the parameters are left to the commands, which report them.
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let config: RunConfig = serde_json::from_str(text).context("malformed config")?;
        config.check()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn check(&self) -> anyhow::Result<()> {
        ensure!(self.version == CONFIG_VERSION, "unsupported config version {} (expected {CONFIG_VERSION})", self.version);
        let t = &self.tolerances;
        for (name, v) in [("ode_tol", t.ode_tol), ("fit_tol", t.fit_tol), ("report_tol", t.report_tol)] {
            check_tol(name, v)?;
        }
        for (name, r) in [("generator", self.loop_radii.generator), ("holonomy", self.loop_radii.holonomy)] {
            ensure!(r.is_finite() && r > 0.0, "loop radius {name} = {r} must be positive");
        }
        let terms = self.params.f.iter().chain(&self.params.g);
        if let Some(t) = terms.into_iter().find(|(_, re, im)| !re.is_finite() || !im.is_finite()) {
            bail!("non-finite coefficient {t:?}");
        }
        ensure!(
            self.monodromy.starts.iter().all(|(re, im)| re.is_finite() && im.is_finite()),
            "non-finite monodromy start"
        );
        Ok(())
    }
}

pub fn check_tol(name: &str, v: f64) -> anyhow::Result<()> {
    ensure!((TOL_RANGE.0..=TOL_RANGE.1).contains(&v), "{name} = {v:e} outside [{:e}, {:e}]", TOL_RANGE.0, TOL_RANGE.1);
    Ok(())
}
