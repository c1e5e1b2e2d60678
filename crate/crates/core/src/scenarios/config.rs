use std::path::Path;

use serde::{Deserialize, Serialize};

use super::builtin::builtin_config;
use super::wong::Polynomial;
use crate::error::{Error, Result};

/// Version of the config and report schemas.
pub const SCHEMA_VERSION: u32 = 1;

/// A scenario description. With `scenario` set, the named built-in supplies
/// every field the document leaves out.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<ChartSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dynamics: Option<DynamicsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control_space: Option<ControlSpaceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<CostSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_init: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<HorizonSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z0: Option<Z0Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pipeline: Option<Pipeline>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control_signal: Option<ControlSignalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shoot: Option<ShootSpec>,
    #[serde(default)]
    pub solver: SolverSpec,
}

/// Local chart of the algebroid. Numeric tables are row-major;
/// `structure_constants[(i * m + j) * m + k]` is `c^i_jk`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ChartSpec {
    So3,
    LieAlgebra {
        dim: usize,
        structure_constants: Vec<f64>,
    },
    TangentBundle {
        dim: usize,
    },
    /// `TM x g` over `R^base_dim` with connection `A^i_b` (row-major
    /// `algebra_dim x base_dim`) and metric `g_ab` (row-major).
    Atiyah {
        base_dim: usize,
        algebra_dim: usize,
        structure_constants: Vec<f64>,
        connection: Vec<Polynomial>,
        metric: Vec<Polynomial>,
        /// Control box half-width.
        #[serde(default = "default_velocity_bound")]
        velocity_bound: f64,
    },
}

fn default_velocity_bound() -> f64 {
    100.0
}

/// `f(x, u) = drift + linear x + sum_k u_k inputs[k]`; `linear` (row-major
/// `m x n`) needs a base.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSpec {
    pub drift: Vec<f64>,
    pub inputs: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ControlSpaceSpec {
    Finite { values: Vec<Vec<f64>> },
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

/// `L = constant + sum_k r_k u_k^2 / 2 + sum_a q_a x_a^2 / 2`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostSpec {
    #[serde(default)]
    pub constant: f64,
    #[serde(default)]
    pub control_weights: Vec<f64>,
    #[serde(default)]
    pub state_weights: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HorizonSpec {
    pub t0: f64,
    pub t1: f64,
    #[serde(default)]
    pub free_time: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Z0Mode {
    /// `z0 = -1`.
    Normal,
    /// `z0 = 0`.
    Abnormal,
}

impl Z0Mode {
    pub fn value(self) -> f64 {
        match self {
            Z0Mode::Normal => -1.0,
            Z0Mode::Abnormal => 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    /// Integrate the extremal flow from `(x0, z_init)` and audit it.
    Extremal,
    /// Audit the candidate given by `control_signal`, with the costate
    /// transported from `z_init`.
    Simulate,
    /// Shoot for the group endpoint `shoot.target`, then audit the extremal.
    Shoot,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSignalSpec {
    pub breakpoints: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RepresentationSpec {
    So3,
    Su2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShootSpec {
    pub representation: RepresentationSpec,
    /// Row-major target matrix.
    pub target: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_evaluations: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Random needle variations sampled for the cone check; 0 disables it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub needle_samples: Option<usize>,
    /// Points sampled for the algebroid axiom checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axiom_samples: Option<usize>,
}

impl SolverSpec {
    pub fn step(&self) -> f64 {
        self.step.unwrap_or(crate::numerics::DEFAULT_STEP)
    }

    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or(1e-5)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn needle_samples(&self) -> usize {
        self.needle_samples.unwrap_or(0)
    }

    pub fn axiom_samples(&self) -> usize {
        self.axiom_samples.unwrap_or(100)
    }

    fn overlay(self, top: SolverSpec) -> SolverSpec {
        SolverSpec {
            step: top.step.or(self.step),
            tol: top.tol.or(self.tol),
            seed: top.seed.or(self.seed),
            needle_samples: top.needle_samples.or(self.needle_samples),
            axiom_samples: top.axiom_samples.or(self.axiom_samples),
        }
    }
}

impl ScenarioConfig {
    /// Parses a JSON document. Errors carry the path of the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(
                if path == "." { "<root>".to_string() } else { path },
                e.into_inner().to_string(),
            )
        })?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Error::config(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", cfg.schema_version),
            ));
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Fills the fields left out from the named built-in, if any.
    pub fn resolve(self) -> Result<Self> {
        let Some(name) = self.scenario.clone() else {
            return Ok(self);
        };
        let base =
            builtin_config(&name).ok_or_else(|| Error::config("scenario", format!("unknown built-in `{name}`")))?;
        Ok(ScenarioConfig {
            schema_version: self.schema_version,
            scenario: Some(name),
            chart: self.chart.or(base.chart),
            dynamics: self.dynamics.or(base.dynamics),
            control_space: self.control_space.or(base.control_space),
            cost: self.cost.or(base.cost),
            x0: self.x0.or(base.x0),
            z_init: self.z_init.or(base.z_init),
            horizon: self.horizon.or(base.horizon),
            z0: self.z0.or(base.z0),
            pipeline: self.pipeline.or(base.pipeline),
            control_signal: self.control_signal.or(base.control_signal),
            shoot: self.shoot.or(base.shoot),
            solver: base.solver.overlay(self.solver),
        })
    }
}
