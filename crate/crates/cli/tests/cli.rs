use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const INIT: &str = "1 0 0 0 1 0 0 0 1 0.42 0 0.025";
const FLIPPED: &str = "1 0 0 0 -1 0 0 0 -1 0.42 0 0.025";

fn assets() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../assets").canonicalize().unwrap()
}

/// Writes a reduced cube workspace into a fresh directory.
fn small_workspace(mesh: &Path) -> (TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let a = assets();
    let text = format!(
        r#"seed = 7
store = "cube.sqlite"
gripper = "{}"
robots = ["{}"]

[object]
name = "cube50"
mesh = "{}"

[table]
size = [0.3, 0.4]
center = [0.42, 0.0]
grid = [2, 2]
angles = 2
height = 0.0

[grasp]
density = 40000.0
rotation_samples = 8
"#,
        a.join("grippers/desk.toml").display(),
        a.join("robots/arm6.toml").display(),
        mesh.display(),
    );
    let config = dir.path().join("cube.toml");
    std::fs::write(&config, text).unwrap();
    (dir, config)
}

fn cube_workspace() -> (TempDir, PathBuf) {
    small_workspace(&assets().join("meshes/cube50.obj"))
}

fn regrasp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regrasp"))
        .arg("--quiet-timings")
        .args(args)
        .env_remove("REGRASP_STORE")
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn precomputed() -> (TempDir, PathBuf) {
    let (dir, config) = cube_workspace();
    let o = regrasp(&["precompute", "--config", s(&config)]);
    assert!(o.status.success(), "{}", stderr(&o));
    (dir, config)
}

#[test]
fn missing_mesh_exits_2_without_store() {
    let (dir, config) = small_workspace(Path::new("/nonexistent/mesh.obj"));
    let o = regrasp(&["precompute", "--config", s(&config)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("cube.sqlite").exists());
}

#[test]
fn precompute_then_inspect() {
    let (dir, config) = precomputed();
    assert!(dir.path().join("cube.sqlite").exists());
    let o = regrasp(&["inspect", "--config", s(&config)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l.starts_with("tabletopplacements")));
    assert!(out.ends_with("audit ok\n"));
}

#[test]
fn summary_without_timings_is_repeatable() {
    let (_dir, config) = cube_workspace();
    let a = regrasp(&["precompute", "--config", s(&config)]);
    let b = regrasp(&["precompute", "--config", s(&config)]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("obj"));
}

#[test]
fn same_pose_needs_no_regrasp() {
    let (_dir, config) = precomputed();
    let o = regrasp(&["reorient", "--config", s(&config), "--init", INIT, "--goal", INIT]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).lines().any(|l| l.split_whitespace().eq(["regrasp_count", "0"])));
}

#[test]
fn flip_needs_a_regrasp() {
    let (dir, config) = precomputed();
    let out = dir.path().join("seq.json");
    let o = regrasp(&["reorient", "--config", s(&config), "--init", INIT, "--goal", FLIPPED, "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let count: usize = stderr(&o)
        .lines()
        .find_map(|l| l.strip_prefix("regrasp_count"))
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!(count >= 1);
    assert!(std::fs::read_to_string(&out).unwrap().contains("regrasp_count"));
}

#[test]
fn unreachable_pose_exits_3() {
    let (_dir, config) = precomputed();
    let far = "1 0 0 0 1 0 0 0 1 5 0 0.025";
    let o = regrasp(&["reorient", "--config", s(&config), "--init", far, "--goal", INIT]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn floating_pose_exits_2() {
    let (_dir, config) = precomputed();
    let o = regrasp(&["reorient", "--config", s(&config), "--init", "1 0 0 0 1 0 0 0 1 0.42 0 0.5", "--goal", INIT]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_store_exits_2() {
    let (_dir, config) = cube_workspace();
    let o = regrasp(&["reorient", "--config", s(&config), "--init", INIT, "--goal", INIT]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("precompute"));
}

#[test]
fn corrupt_store_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("junk.sqlite");
    std::fs::write(&path, vec![7u8; 4096]).unwrap();
    let o = regrasp(&["inspect", "--store", s(&path)]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn store_flag_beats_environment() {
    let (dir, config) = cube_workspace();
    let flag = dir.path().join("flag.sqlite");
    let env = dir.path().join("env.sqlite");
    let o = Command::new(env!("CARGO_BIN_EXE_regrasp"))
        .args(["--quiet-timings", "precompute", "--config", s(&config), "--store", s(&flag)])
        .env("REGRASP_STORE", &env)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(flag.exists() && !env.exists());

    let o = Command::new(env!("CARGO_BIN_EXE_regrasp"))
        .args(["--quiet-timings", "precompute", "--config", s(&config)])
        .env("REGRASP_STORE", &env)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(env.exists() && !dir.path().join("cube.sqlite").exists());
}

#[test]
fn csv_export_is_byte_identical_across_runs() {
    let mut dumps = Vec::new();
    for _ in 0..2 {
        let (dir, config) = precomputed();
        let out = dir.path().join("csv");
        let o = regrasp(&["export", "--config", s(&config), "csv", "--out", s(&out)]);
        assert!(o.status.success(), "{}", stderr(&o));
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&out)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().into_string().unwrap(), std::fs::read(e.path()).unwrap())
            })
            .collect();
        files.sort();
        assert_eq!(files.len(), 10);
        dumps.push(files);
    }
    assert_eq!(dumps[0], dumps[1]);
}

#[test]
fn grasp_glyphs_match_row_counts() {
    let (dir, config) = precomputed();
    let csv = dir.path().join("csv");
    assert!(regrasp(&["export", "--config", s(&config), "csv", "--out", s(&csv)]).status.success());
    let rows = |t: &str| std::fs::read_to_string(csv.join(format!("{t}.csv"))).unwrap().lines().count() - 1;

    let obj = dir.path().join("grasps.obj");
    assert!(regrasp(&["export", "--config", s(&config), "grasps", "--out", s(&obj)]).status.success());
    let groups = std::fs::read_to_string(&obj).unwrap().lines().filter(|l| l.starts_with("o ")).count();
    // one group for the object, one per grasp
    assert_eq!(groups, rows("freeairgrip") + 1);

    let o = regrasp(&["export", "--config", s(&config), "placement", "--out", s(&obj)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(regrasp(&["export", "--config", s(&config), "placement", "--placement", "1", "--out", s(&obj)])
        .status
        .success());

    let dot = dir.path().join("g.dot");
    assert!(regrasp(&["export", "--config", s(&config), "graph", "--out", s(&dot)]).status.success());
    assert!(std::fs::read_to_string(&dot).unwrap().starts_with("graph regrasp {"));
}

#[test]
fn facet_and_sample_exports_need_no_store() {
    let (dir, config) = cube_workspace();
    for (kind, file) in [("facets", "f.ply"), ("samples", "s.ply")] {
        let out = dir.path().join(file);
        let o = regrasp(&["export", "--config", s(&config), kind, "--out", s(&out)]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(std::fs::read_to_string(&out).unwrap().starts_with("ply\n"));
    }
    assert!(!dir.path().join("cube.sqlite").exists());
}
