//! JSON run configuration: model, grid, parameter sweep, experiment
//! selection, tolerances and output directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ConeModel, ParameterGrid, Warp};
use crate::radial::RadialGrid;
use crate::seeley::{build_contour, build_radial_contour, Contour};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("line {line}, column {column}, field `{field}`: {message}")]
    Parse {
        line: usize,
        column: usize,
        field: String,
        message: String,
    },
    #[error("field `{field}`: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub nodes: usize,
    #[serde(default = "one")]
    pub grading: f64,
    /// Replaces the model's x_max for the experiment using this grid.
    #[serde(default)]
    pub x_max: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            nodes: 512,
            grading: 2.0,
            x_max: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub eigenvalue: f64,
    pub power_defect: f64,
    pub continuation: f64,
    pub kendall_tau: f64,
    pub spread: f64,
    pub tau_resolution: f64,
    pub slope: f64,
    pub singular_value_slack: f64,
    pub localization_rate: f64,
    pub commutator: f64,
    pub hardy_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eigenvalue: 5e-3,
            power_defect: 1e-5,
            continuation: 1e-8,
            kendall_tau: 0.5,
            spread: 3.0,
            tau_resolution: 1e-2,
            slope: 0.02,
            singular_value_slack: 0.1,
            localization_rate: 0.9,
            commutator: 1e-8,
            hardy_slack: 0.05,
        }
    }
}

impl Tolerances {
    fn validate(&self) -> Result<(), ConfigError> {
        let all = [
            ("eigenvalue", self.eigenvalue),
            ("power_defect", self.power_defect),
            ("continuation", self.continuation),
            ("kendall_tau", self.kendall_tau),
            ("spread", self.spread),
            ("tau_resolution", self.tau_resolution),
            ("slope", self.slope),
            ("singular_value_slack", self.singular_value_slack),
            ("localization_rate", self.localization_rate),
            ("commutator", self.commutator),
            ("hardy_slack", self.hardy_slack),
        ];
        for (name, v) in all {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(&format!("tolerances.{name}"), format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContourSpec {
    pub epsilon: f64,
    pub r_max: f64,
    pub nodes_per_decade: usize,
    /// Use the radial deformation at angle ±(π − δ) instead of horizontal rays.
    pub radial_delta: Option<f64>,
}

impl Default for ContourSpec {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            r_max: 1e16,
            nodes_per_decade: 24,
            radial_delta: None,
        }
    }
}

impl ContourSpec {
    pub fn build(&self) -> Result<Contour, crate::seeley::SeeleyError> {
        match self.radial_delta {
            None => build_contour(self.epsilon, self.r_max, self.nodes_per_decade),
            Some(d) => build_radial_contour(self.epsilon, d, self.r_max, self.nodes_per_decade),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BesselSettings {
    pub grid: Option<GridSpec>,
    pub count: usize,
}

impl Default for BesselSettings {
    fn default() -> Self {
        Self {
            grid: Some(GridSpec {
                nodes: 2000,
                grading: 2.0,
                x_max: None,
            }),
            count: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeeleySettings {
    pub grid: Option<GridSpec>,
    pub w_samples: Vec<[f64; 2]>,
}

impl Default for SeeleySettings {
    fn default() -> Self {
        Self {
            grid: Some(GridSpec {
                nodes: 64,
                grading: 1.0,
                x_max: None,
            }),
            w_samples: vec![
                [-2.0, 0.0],
                [-1.0, 0.0],
                [-0.5, 0.0],
                [-0.5, 1.0],
                [0.0, 0.0],
                [0.5, 0.0],
                [1.0, 0.0],
                [2.0, 0.0],
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DomainSettings {
    pub grid: Option<GridSpec>,
    pub w_samples: Vec<[f64; 2]>,
    pub eigs_per_mode: usize,
}

impl Default for DomainSettings {
    fn default() -> Self {
        Self {
            grid: None,
            w_samples: vec![[-1.0, 0.0], [-0.5, 0.0], [0.0, 0.0], [0.5, 0.0], [1.0, 0.0]],
            eigs_per_mode: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelSettings {
    pub grid: Option<GridSpec>,
    pub h: f64,
    pub w: [f64; 2],
    /// Mode indices to fit; all model modes when absent.
    pub modes: Option<Vec<usize>>,
    pub source: f64,
    pub window: [f64; 2],
}

impl Default for KernelSettings {
    fn default() -> Self {
        Self {
            grid: Some(GridSpec {
                nodes: 2000,
                grading: 2.0,
                x_max: None,
            }),
            h: 1.0,
            w: [-1.0, 0.0],
            modes: None,
            source: 0.5,
            window: [400.0, 40.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DscSettings {
    pub grid: Option<GridSpec>,
    pub h_values: Option<Vec<f64>>,
    pub omegas: Vec<[f64; 2]>,
}

impl Default for DscSettings {
    fn default() -> Self {
        let t = std::f64::consts::PI / 6.0;
        Self {
            grid: None,
            h_values: None,
            omegas: vec![[-1.0, 0.0], [-t.cos(), -t.sin()]],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EllipticitySettings {
    /// Weights to check; the configured alpha when absent.
    pub alphas: Option<Vec<f64>>,
    pub omega: [f64; 2],
}

impl Default for EllipticitySettings {
    fn default() -> Self {
        Self {
            alphas: None,
            omega: [-1.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WavefrontSettings {
    pub grid: Option<GridSpec>,
    pub h_values: Option<Vec<f64>>,
    pub l_values: Vec<f64>,
    pub x0: f64,
    pub xi0: f64,
    pub kappa: f64,
    pub box_factor: f64,
    pub check_contour: bool,
}

impl Default for WavefrontSettings {
    fn default() -> Self {
        Self {
            grid: Some(GridSpec {
                nodes: 2000,
                grading: 1.0,
                x_max: Some(2.0),
            }),
            h_values: Some((3..=8).map(|k| 2f64.powi(-k)).collect()),
            l_values: vec![0.5, -0.5],
            x0: 1.0,
            xi0: 1.0,
            kappa: 0.5,
            box_factor: 1.5,
            check_contour: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HardySettings {
    pub dims: Vec<usize>,
    pub node_counts: Vec<usize>,
    pub grading: f64,
}

impl Default for HardySettings {
    fn default() -> Self {
        Self {
            dims: vec![3, 4],
            node_counts: vec![250, 500, 1000, 2000],
            grading: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IndexSettings {
    pub samples: usize,
    pub re_cutoff: f64,
}

impl Default for IndexSettings {
    fn default() -> Self {
        Self {
            samples: 20,
            re_cutoff: 6.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSettings {
    pub bessel_oracle: BesselSettings,
    pub seeley_equivalence: SeeleySettings,
    pub domain_equivalence: DomainSettings,
    pub kernel_decay: KernelSettings,
    pub dsc_invertibility: DscSettings,
    pub full_ellipticity: EllipticitySettings,
    pub wavefront_preservation: WavefrontSettings,
    pub hardy: HardySettings,
    pub index_family: IndexSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    pub x_max: f64,
    #[serde(default)]
    pub modes: Option<Vec<f64>>,
    #[serde(default)]
    pub sphere_l_max: Option<usize>,
    #[serde(default)]
    pub warp: Option<Vec<f64>>,
    pub h_values: Vec<f64>,
    #[serde(default)]
    pub htilde_values: Option<Vec<f64>>,
    pub alpha: f64,
    pub tau: f64,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub experiments: Vec<String>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub contour: ContourSpec,
    #[serde(default)]
    pub settings: ExperimentSettings,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    7
}

/// Parse and validate; errors name the line, column and field path.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        ConfigError::Parse {
            line: inner.line(),
            column: inner.column(),
            field,
            message: inner.to_string(),
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Reads a config file; a relative `output_dir` is taken relative to the
/// file's directory.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let mut cfg = parse_config(&text)?;
    if let Some(out) = &cfg.output_dir {
        if out.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.output_dir = Some(dir.join(out));
            }
        }
    }
    Ok(cfg)
}

fn check_grid(field: &str, g: &GridSpec) -> Result<(), ConfigError> {
    if g.nodes < 16 {
        return Err(invalid(&format!("{field}.nodes"), format!("need at least 16 nodes, got {}", g.nodes)));
    }
    if !(g.grading >= 1.0 && g.grading.is_finite()) {
        return Err(invalid(&format!("{field}.grading"), format!("must be at least 1, got {}", g.grading)));
    }
    if let Some(x) = g.x_max {
        if !(x > 0.0 && x.is_finite()) {
            return Err(invalid(&format!("{field}.x_max"), format!("must be positive, got {x}")));
        }
    }
    Ok(())
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n < 3 {
            return Err(invalid("n", format!("dimension must be at least 3, got {}", self.n)));
        }
        if !(self.x_max > 0.0 && self.x_max.is_finite()) {
            return Err(invalid("x_max", format!("must be positive, got {}", self.x_max)));
        }
        match (&self.modes, self.sphere_l_max) {
            (Some(_), Some(_)) => return Err(invalid("modes", "give either `modes` or `sphere_l_max`, not both")),
            (None, None) => return Err(invalid("modes", "one of `modes` or `sphere_l_max` is required")),
            (Some(m), None) if m.is_empty() => return Err(invalid("modes", "mode list is empty")),
            _ => {}
        }
        self.parameters()
            .validate((-(self.n as f64) + 2.0, 0.0))
            .map_err(|e| invalid("h_values", e.to_string()))?;
        check_grid("grid", &self.grid)?;
        let s = &self.settings;
        for (name, g) in [
            ("settings.bessel_oracle.grid", &s.bessel_oracle.grid),
            ("settings.seeley_equivalence.grid", &s.seeley_equivalence.grid),
            ("settings.domain_equivalence.grid", &s.domain_equivalence.grid),
            ("settings.kernel_decay.grid", &s.kernel_decay.grid),
            ("settings.dsc_invertibility.grid", &s.dsc_invertibility.grid),
            ("settings.wavefront_preservation.grid", &s.wavefront_preservation.grid),
        ] {
            if let Some(g) = g {
                check_grid(name, g)?;
            }
        }
        self.tolerances.validate()?;
        for name in &self.experiments {
            if !crate::run::EXPERIMENTS.contains(&name.as_str()) {
                return Err(invalid(
                    "experiments",
                    format!("unknown experiment `{name}`; known: {}", crate::run::EXPERIMENTS.join(", ")),
                ));
            }
        }
        if let Some(dir) = &self.output_dir {
            if dir.exists() && !dir.is_dir() {
                return Err(invalid("output_dir", format!("{} is not a directory", dir.display())));
            }
        }
        let m = self.model().map_err(|e| invalid("modes", e.to_string()))?;
        m.validate().map_err(|e| invalid("warp", e.to_string()))?;
        Ok(())
    }

    pub fn model(&self) -> Result<ConeModel, crate::model::ModelError> {
        let mut m = match (&self.modes, self.sphere_l_max) {
            (Some(l), _) => ConeModel::with_modes(self.n, self.x_max, l),
            (None, l) => ConeModel::round(self.n, self.x_max, l.unwrap_or(0))?,
        };
        m.warp = self.warp.clone().map(Warp::new);
        Ok(m)
    }

    /// Model and grid for an experiment, honouring a per-experiment grid
    /// override (which may also move x_max).
    pub fn model_and_grid(
        &self,
        spec: Option<&GridSpec>,
    ) -> Result<(ConeModel, RadialGrid), crate::experiments::ExperimentError> {
        let g = spec.unwrap_or(&self.grid);
        let mut m = self.model()?;
        if let Some(x) = g.x_max {
            m.x_max = x;
        }
        let grid = RadialGrid::graded(m.x_max, g.nodes, g.grading)?;
        Ok((m, grid))
    }

    pub fn parameters(&self) -> ParameterGrid {
        ParameterGrid {
            h_values: self.h_values.clone(),
            htilde_values: self.htilde_values.clone(),
            alpha: self.alpha,
            tau: self.tau,
        }
    }
}
