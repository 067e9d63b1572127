#![allow(dead_code)]

pub mod fixtures;

use std::path::{Path, PathBuf};

use regrasp::config::{Workspace, WorkspaceConfig};

pub fn assets() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../assets")
}

pub fn cube_config() -> WorkspaceConfig {
    let path = assets().join("workspaces/cube.toml");
    WorkspaceConfig::from_toml_str(&std::fs::read_to_string(&path).unwrap(), &path).unwrap()
}

pub fn workspace(config: WorkspaceConfig) -> Workspace {
    Workspace::from_config(config, &assets().join("workspaces")).unwrap()
}

/// The bundled cube workspace shrunk to a 2 x 2 grid, 2 angles and one robot.
pub fn small_cube() -> Workspace {
    let mut c = cube_config();
    c.table.grid = [2, 2];
    c.table.angles = 2;
    c.robots.truncate(1);
    workspace(c)
}

pub fn same_bits(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}
