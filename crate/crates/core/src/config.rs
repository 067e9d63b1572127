//! Declarative workspace description: object, gripper, robots, table and
//! every planner threshold.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{load_mesh, GeometryError, MeshFormat, TriangleMesh};
use crate::graspplan::{GraspParams, GripperModel};
use crate::kinematics::{IkParams, KinematicsError, RetractionSpec, RobotModel};
use crate::placement::{TableConfig, DEFAULT_STABILITY_THRESHOLD};
use crate::regraspgraph::GraphParams;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("mesh {path}: {source}")]
    Mesh { path: PathBuf, source: GeometryError },
    #[error("robot {path}: {source}")]
    Robot { path: PathBuf, source: KinematicsError },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectConfig {
    pub name: String,
    pub mesh: PathBuf,
    /// Detected from the file when absent.
    #[serde(default)]
    pub format: Option<String>,
    /// Multiplies every vertex, e.g. 0.001 for millimetre files.
    #[serde(default = "one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlacementConfig {
    pub stability_threshold: f64,
}

impl Default for PlacementConfig {
    fn default() -> Self {
        Self { stability_threshold: DEFAULT_STABILITY_THRESHOLD }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkspaceConfig {
    #[serde(default)]
    pub seed: u64,
    /// Store file; relative paths are resolved against the config file.
    #[serde(default)]
    pub store: Option<PathBuf>,
    pub object: ObjectConfig,
    pub gripper: PathBuf,
    pub robots: Vec<PathBuf>,
    #[serde(default)]
    pub table: TableConfig,
    #[serde(default)]
    pub grasp: GraspParams,
    #[serde(default)]
    pub placement: PlacementConfig,
    #[serde(default)]
    pub ik: IkParams,
    #[serde(default)]
    pub retraction: RetractionSpec,
    #[serde(default)]
    pub graph: GraphParams,
}

impl WorkspaceConfig {
    pub fn from_toml_str(s: &str, origin: &Path) -> Result<Self, ConfigError> {
        toml::from_str(s).map_err(|e| ConfigError::Parse { path: origin.into(), message: e.to_string() })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let checks = [
            self.table.validate(),
            self.grasp.validate(),
            self.ik.validate(),
            self.retraction.validate(),
            self.graph.validate(),
        ];
        for c in checks {
            c.map_err(ConfigError::Invalid)?;
        }
        if !(self.object.scale > 0.0 && self.object.scale.is_finite()) {
            return Err(ConfigError::Invalid("object.scale must be positive".into()));
        }
        if self.object.name.trim().is_empty() {
            return Err(ConfigError::Invalid("object.name must not be empty".into()));
        }
        let s = self.placement.stability_threshold;
        if !(s >= 0.0 && s.is_finite()) {
            return Err(ConfigError::Invalid("placement.stability_threshold must be >= 0".into()));
        }
        if self.robots.is_empty() {
            return Err(ConfigError::Invalid("at least one robot is required".into()));
        }
        Ok(())
    }
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|e| ConfigError::Io { path: path.into(), message: e.to_string() })
}

/// A validated config with every referenced file loaded.
#[derive(Clone, Debug)]
pub struct Workspace {
    pub config: WorkspaceConfig,
    pub base_dir: PathBuf,
    pub mesh: TriangleMesh,
    pub gripper: GripperModel,
    pub robots: Vec<RobotModel>,
}

impl Workspace {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let config = WorkspaceConfig::from_toml_str(&read(path)?, path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_config(config, &base)
    }

    pub fn from_config(config: WorkspaceConfig, base_dir: &Path) -> Result<Self, ConfigError> {
        config.validate()?;
        let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base_dir.join(p) };
        let mesh_path = resolve(&config.object.mesh);
        let format = match &config.object.format {
            Some(f) => Some(f.parse::<MeshFormat>().map_err(ConfigError::Invalid)?),
            None => None,
        };
        let mesh = load_mesh(&mesh_path, format)
            .and_then(|m| if config.object.scale == 1.0 { Ok(m) } else { m.scaled(config.object.scale) })
            .map_err(|source| ConfigError::Mesh { path: mesh_path.clone(), source })?;
        let gpath = resolve(&config.gripper);
        let gripper: GripperModel = toml::from_str(&read(&gpath)?)
            .map_err(|e| ConfigError::Parse { path: gpath.clone(), message: e.to_string() })?;
        gripper
            .validate()
            .map_err(|m| ConfigError::Invalid(format!("gripper {}: {m}", gpath.display())))?;
        let mut robots = Vec::new();
        for r in &config.robots {
            let rp = resolve(r);
            let model = RobotModel::from_toml_str(&read(&rp)?)
                .map_err(|source| ConfigError::Robot { path: rp.clone(), source })?;
            if robots.iter().any(|m: &RobotModel| m.name == model.name) {
                return Err(ConfigError::Invalid(format!("duplicate robot name '{}'", model.name)));
            }
            robots.push(model);
        }
        Ok(Self { config, base_dir: base_dir.to_path_buf(), mesh, gripper, robots })
    }

    /// Store path from the config, relative to the config file.
    pub fn store_path(&self) -> Option<PathBuf> {
        self.config.store.as_ref().map(|p| if p.is_absolute() { p.clone() } else { self.base_dir.join(p) })
    }

    pub fn robot(&self, name: &str) -> Option<&RobotModel> {
        self.robots.iter().find(|r| r.name == name)
    }
}
