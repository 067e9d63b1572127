//! Shared fixtures for the benches.

use std::path::{Path, PathBuf};

use regrasp::{Workspace, WorkspaceConfig};

pub fn assets() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../assets")
}

/// The bundled cube workspace, optionally shrunk to a 2 x 2 grid with 2 angles.
pub fn cube_workspace(small: bool) -> Workspace {
    let path = assets().join("workspaces/cube.toml");
    let text = std::fs::read_to_string(&path).expect("cube workspace");
    let mut c = WorkspaceConfig::from_toml_str(&text, &path).expect("cube config");
    if small {
        c.table.grid = [2, 2];
        c.table.angles = 2;
    }
    Workspace::from_config(c, &assets().join("workspaces")).expect("cube assets")
}
