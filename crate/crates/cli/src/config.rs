//! Scenario files.
//!
//! A file holds either one scenario at the top level or a list of
//! `[[scenario]]` tables. Every block rejects unknown keys, and parsing
//! resolves all defaults so the echoed scenario is complete.

use std::path::Path;

use nonlocal_core::operator::Quadrature;
use nonlocal_core::reaction::Scheme;
use nonlocal_core::{
    AssemblyOptions, CoefficientA, DispersalG, Domain, Geometry, KernelJ, KernelShape,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SEED_ENV: &str = "NONLOCAL_SPECTRA_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Eigen,
    Ladder,
    Mp,
    Kpp,
    Evolve,
    Exhaustion,
    Rankone,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Eigen => "eigen",
            Self::Ladder => "ladder",
            Self::Mp => "mp",
            Self::Kpp => "kpp",
            Self::Evolve => "evolve",
            Self::Exhaustion => "exhaustion",
            Self::Rankone => "rankone",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeometryKind {
    Box,
    Torus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainBlock {
    #[serde(default = "one")]
    pub dim: usize,
    /// `[lo, hi]` along every axis.
    pub bounds: [f64; 2],
    #[serde(default = "default_geometry")]
    pub geometry: GeometryKind,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ladder: Option<Vec<usize>>,
    /// Fixed spacing for exhaustion runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    /// Truncation radii for exhaustion runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeKind {
    Uniform,
    Triangular,
    CosineBump,
}

impl From<ShapeKind> for KernelShape {
    fn from(s: ShapeKind) -> Self {
        match s {
            ShapeKind::Uniform => KernelShape::Uniform,
            ShapeKind::Triangular => KernelShape::Triangular,
            ShapeKind::CosineBump => KernelShape::CosineBump,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelBlock {
    pub shape: ShapeKind,
    pub support: f64,
    #[serde(default = "unit")]
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DispersalBlock {
    Constant {
        value: f64,
    },
    Affine {
        base: f64,
        slope: Vec<f64>,
    },
    PowerDegenerate {
        exponent: f64,
        #[serde(default)]
        center: Vec<f64>,
        #[serde(default = "unit")]
        cap: f64,
    },
}

impl Default for DispersalBlock {
    fn default() -> Self {
        Self::Constant { value: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CoefficientBlock {
    Constant {
        value: f64,
    },
    QuadraticWell {
        sigma: f64,
        c: f64,
        #[serde(default)]
        center: Vec<f64>,
    },
    PowerContact {
        sigma: f64,
        c: f64,
        gamma: f64,
        #[serde(default)]
        center: Vec<f64>,
    },
    LorentzianWell {
        sigma: f64,
        c: f64,
        #[serde(default)]
        center: Vec<f64>,
    },
    Plateau {
        sigma: f64,
        c: f64,
        gamma: f64,
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NonlinearityBlock {
    /// `f(x, u) = u (μ(x) − u)`.
    Logistic { mu: CoefficientBlock },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurrogateBlock {
    pub rho: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureKind {
    Nodal,
    Cell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default = "default_t_final", alias = "T")]
    pub t_final: f64,
    /// Resolvent shift of the monotone iteration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    #[serde(default = "default_checkpoints")]
    pub checkpoints: usize,
    /// Constant initial datum for evolution.
    #[serde(default = "default_initial")]
    pub initial: f64,
    /// Sup-distance below which an evolution counts as converged.
    #[serde(default = "default_classify_tol")]
    pub classify_tol: f64,
    #[serde(default = "default_battery")]
    pub battery: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub renormalize: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadratureKind>,
    #[serde(default = "default_g_floor")]
    pub g_floor: f64,
}

impl Default for SolverBlock {
    fn default() -> Self {
        toml::from_str("").expect("solver defaults")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    /// Output directory; `--out` takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    pub kind: ExperimentKind,
    pub domain: DomainBlock,
    #[serde(default)]
    pub grid: GridBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelBlock>,
    #[serde(default)]
    pub dispersal: DispersalBlock,
    pub coefficient: CoefficientBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonlinearity: Option<NonlinearityBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surrogate: Option<SurrogateBlock>,
    #[serde(default)]
    pub solver: SolverBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioList {
    scenario: Vec<ScenarioConfig>,
}

fn one() -> usize {
    1
}
fn unit() -> f64 {
    1.0
}
fn default_geometry() -> GeometryKind {
    GeometryKind::Box
}
fn default_tol() -> f64 {
    1e-10
}
fn default_max_iter() -> usize {
    100_000
}
fn default_t_final() -> f64 {
    200.0
}
fn default_scheme() -> Scheme {
    Scheme::Explicit
}
fn default_checkpoints() -> usize {
    10
}
fn default_initial() -> f64 {
    0.1
}
fn default_classify_tol() -> f64 {
    1e-6
}
fn default_battery() -> usize {
    32
}
fn default_g_floor() -> f64 {
    nonlocal_core::operator::DEFAULT_G_FLOOR
}

/// Reads and validates a scenario file.
pub fn parse_config(path: &Path) -> Result<Vec<ScenarioConfig>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<Vec<ScenarioConfig>> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::Parse(e.to_string()))?;
    let mut scenarios = if table.contains_key("scenario") {
        let list: ScenarioList =
            toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        if list.scenario.is_empty() {
            return Err(CliError::Config("scenario list is empty".into()));
        }
        list.scenario
    } else {
        vec![toml::from_str::<ScenarioConfig>(text).map_err(|e| CliError::Parse(e.to_string()))?]
    };
    let many = scenarios.len() > 1;
    for (i, s) in scenarios.iter_mut().enumerate() {
        if s.name.is_empty() {
            s.name = if many {
                format!("{}-{}", s.kind.as_str(), i + 1)
            } else {
                s.kind.as_str().to_string()
            };
        }
        s.resolve();
        s.validate()
            .map_err(|e| CliError::Config(format!("scenario '{}': {e}", s.name)))?;
    }
    let mut names: Vec<&str> = scenarios.iter().map(|s| s.name.as_str()).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(CliError::Config(format!(
            "duplicate scenario name '{}'",
            w[0]
        )));
    }
    Ok(scenarios)
}

/// Applies `NONLOCAL_SPECTRA_SEED` when set.
pub fn apply_seed_override(scenarios: &mut [ScenarioConfig]) -> Result<()> {
    match std::env::var(SEED_ENV) {
        Ok(v) => {
            let seed: u64 = v
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("{SEED_ENV}={v:?} is not a u64")))?;
            for s in scenarios {
                s.solver.seed = seed;
            }
            Ok(())
        }
        Err(_) => Ok(()),
    }
}

/// Serializes scenarios back to TOML in the list form.
pub fn echo(scenarios: &[ScenarioConfig]) -> Result<String> {
    toml::to_string(&ScenarioList {
        scenario: scenarios.to_vec(),
    })
    .map_err(|e| CliError::Config(e.to_string()))
}

fn fill_center(center: &mut Vec<f64>, dim: usize) {
    if center.is_empty() {
        *center = vec![0.0; dim];
    }
}

fn resolve_coefficient(c: &mut CoefficientBlock, dim: usize) {
    match c {
        CoefficientBlock::QuadraticWell { center, .. }
        | CoefficientBlock::PowerContact { center, .. }
        | CoefficientBlock::LorentzianWell { center, .. } => fill_center(center, dim),
        CoefficientBlock::Constant { .. } | CoefficientBlock::Plateau { .. } => {}
    }
}

fn coefficient_values(c: &CoefficientBlock) -> Vec<f64> {
    match c {
        CoefficientBlock::Constant { value } => vec![*value],
        CoefficientBlock::QuadraticWell { sigma, c, center }
        | CoefficientBlock::LorentzianWell { sigma, c, center } => {
            [vec![*sigma, *c], center.clone()].concat()
        }
        CoefficientBlock::PowerContact {
            sigma,
            c,
            gamma,
            center,
        } => [vec![*sigma, *c, *gamma], center.clone()].concat(),
        CoefficientBlock::Plateau {
            sigma,
            c,
            gamma,
            lower,
            upper,
        } => [vec![*sigma, *c, *gamma], lower.clone(), upper.clone()].concat(),
    }
}

fn coefficient_dims(c: &CoefficientBlock) -> Vec<usize> {
    match c {
        CoefficientBlock::Constant { .. } => vec![],
        CoefficientBlock::QuadraticWell { center, .. }
        | CoefficientBlock::PowerContact { center, .. }
        | CoefficientBlock::LorentzianWell { center, .. } => vec![center.len()],
        CoefficientBlock::Plateau { lower, upper, .. } => vec![lower.len(), upper.len()],
    }
}

impl ScenarioConfig {
    fn resolve(&mut self) {
        let dim = self.domain.dim;
        resolve_coefficient(&mut self.coefficient, dim);
        if let Some(NonlinearityBlock::Logistic { mu }) = &mut self.nonlinearity {
            resolve_coefficient(mu, dim);
        }
        if let DispersalBlock::PowerDegenerate { center, .. } = &mut self.dispersal {
            fill_center(center, dim);
        }
    }

    /// Checks finiteness, dimensions and the blocks each kind requires.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let dim = self.domain.dim;
        if !(1..=2).contains(&dim) {
            return Err(format!("domain.dim must be 1 or 2, got {dim}"));
        }
        let [lo, hi] = self.domain.bounds;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(format!(
                "domain.bounds must be finite with lo < hi, got [{lo}, {hi}]"
            ));
        }
        let torus = self.domain.geometry == GeometryKind::Torus;

        let mut numbers = coefficient_values(&self.coefficient);
        let mut dims = coefficient_dims(&self.coefficient);
        if let Some(NonlinearityBlock::Logistic { mu }) = &self.nonlinearity {
            numbers.extend(coefficient_values(mu));
            dims.extend(coefficient_dims(mu));
        }
        match &self.dispersal {
            DispersalBlock::Constant { value } => numbers.push(*value),
            DispersalBlock::Affine { base, slope } => {
                numbers.push(*base);
                numbers.extend(slope);
                dims.push(slope.len());
            }
            DispersalBlock::PowerDegenerate {
                exponent,
                center,
                cap,
            } => {
                numbers.extend([*exponent, *cap]);
                numbers.extend(center);
                dims.push(center.len());
            }
        }
        if let Some(k) = &self.kernel {
            numbers.extend([k.support, k.mass]);
        }
        if let Some(s) = &self.surrogate {
            numbers.push(s.rho);
        }
        let sv = &self.solver;
        numbers.extend([sv.tol, sv.t_final, sv.initial, sv.classify_tol, sv.g_floor]);
        numbers.extend(sv.dt);
        numbers.extend(sv.k);
        numbers.extend(self.grid.h);
        numbers.extend(self.grid.radii.iter().flatten());
        if numbers.iter().any(|v| !v.is_finite()) {
            return Err("numeric fields must be finite".into());
        }
        if let Some(d) = dims.iter().find(|&&d| d != dim) {
            return Err(format!(
                "profile point has {d} coordinates but the domain has dimension {dim}"
            ));
        }
        if !(sv.tol > 0.0) || sv.max_iter == 0 {
            return Err("solver.tol must be positive and solver.max_iter at least 1".into());
        }

        let need_n = || {
            self.grid
                .n
                .map(|_| ())
                .ok_or_else(|| format!("kind '{}' needs grid.n", self.kind.as_str()))
        };
        let need_kernel = || {
            self.kernel
                .as_ref()
                .map(|_| ())
                .ok_or_else(|| format!("missing [kernel] block for kind '{}'", self.kind.as_str()))
        };
        match self.kind {
            ExperimentKind::Eigen => {
                need_n()?;
                need_kernel()?;
            }
            ExperimentKind::Ladder => {
                need_kernel()?;
                self.need_ladder()?;
            }
            ExperimentKind::Rankone => {
                if self.surrogate.is_none() {
                    return Err("missing [surrogate] block for kind 'rankone'".into());
                }
                if dim != 1 || torus {
                    return Err("kind 'rankone' runs on a bounded interval".into());
                }
                self.need_ladder()?;
            }
            ExperimentKind::Mp => {
                if torus {
                    return Err("kind 'mp' needs a boundary; geometry 'torus' has none".into());
                }
                need_n()?;
                need_kernel()?;
            }
            ExperimentKind::Kpp | ExperimentKind::Evolve => {
                if self.nonlinearity.is_none() {
                    return Err(
                        "missing nonlinearity: kind 'kpp' and 'evolve' need [nonlinearity]".into(),
                    );
                }
                need_n()?;
                need_kernel()?;
                if sv.checkpoints == 0 || !(sv.t_final > 0.0) {
                    return Err("solver.checkpoints and solver.t_final must be positive".into());
                }
            }
            ExperimentKind::Exhaustion => {
                need_kernel()?;
                if dim != 1 || torus {
                    return Err("kind 'exhaustion' runs on a bounded interval core".into());
                }
                match (&self.grid.h, &self.grid.radii) {
                    (Some(h), Some(r)) if *h > 0.0 && r.len() >= 2 => {}
                    _ => {
                        return Err(
                            "kind 'exhaustion' needs grid.h > 0 and at least two grid.radii".into(),
                        )
                    }
                }
            }
        }
        Ok(())
    }

    fn need_ladder(&self) -> std::result::Result<(), String> {
        match &self.grid.ladder {
            Some(l) if l.len() >= 4 => Ok(()),
            _ => Err(format!(
                "kind '{}' needs grid.ladder with at least four levels",
                self.kind.as_str()
            )),
        }
    }

    pub fn domain(&self) -> Result<Domain> {
        let geometry = match self.domain.geometry {
            GeometryKind::Box => Geometry::Bounded,
            GeometryKind::Torus => Geometry::Torus,
        };
        let [lo, hi] = self.domain.bounds;
        let dim = self.domain.dim;
        Ok(Domain::new(vec![lo; dim], vec![hi; dim], geometry)?)
    }

    pub fn kernel(&self) -> Result<KernelJ> {
        let k = self
            .kernel
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [kernel] block".into()))?;
        Ok(KernelJ::new(
            k.shape.into(),
            k.support,
            k.mass,
            self.domain.dim,
        )?)
    }

    pub fn dispersal(&self) -> Result<DispersalG> {
        Ok(match &self.dispersal {
            DispersalBlock::Constant { value } => DispersalG::constant(*value)?,
            DispersalBlock::Affine { base, slope } => {
                DispersalG::affine(*base, slope.clone(), &self.domain()?)?
            }
            DispersalBlock::PowerDegenerate {
                exponent,
                center,
                cap,
            } => DispersalG::power_degenerate(*exponent, center.clone(), *cap)?,
        })
    }

    pub fn coefficient(&self) -> CoefficientA {
        build_coefficient(&self.coefficient)
    }

    pub fn assembly(&self) -> AssemblyOptions {
        AssemblyOptions {
            renormalize: self.solver.renormalize,
            g_floor: self.solver.g_floor,
            quadrature: self.solver.quadrature.map(|q| match q {
                QuadratureKind::Nodal => Quadrature::Nodal,
                QuadratureKind::Cell => Quadrature::Cell,
            }),
            ..AssemblyOptions::default()
        }
    }
}

pub fn build_coefficient(c: &CoefficientBlock) -> CoefficientA {
    match c.clone() {
        CoefficientBlock::Constant { value } => CoefficientA::constant(value),
        CoefficientBlock::QuadraticWell { sigma, c, center } => {
            CoefficientA::quadratic_well(sigma, c, center)
        }
        CoefficientBlock::PowerContact {
            sigma,
            c,
            gamma,
            center,
        } => CoefficientA::power_contact(sigma, c, gamma, center),
        CoefficientBlock::LorentzianWell { sigma, c, center } => {
            CoefficientA::lorentzian_well(sigma, c, center)
        }
        CoefficientBlock::Plateau {
            sigma,
            c,
            gamma,
            lower,
            upper,
        } => CoefficientA::plateau(sigma, c, gamma, lower, upper),
    }
}
