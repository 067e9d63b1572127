use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use regrasp::config::{ConfigError, Workspace};
use regrasp::export::{facets_ply, posed_scene_obj, samples_ply};
use regrasp::geometry::{oversegment, segment_conventional, sample_surface};
use regrasp::graspplan::Segmentation;
use regrasp::kinematics::IkSolver;
use regrasp::pipeline::{precompute, PipelineError};
use regrasp::placement::instance_pose;
use regrasp::pose::decode_numbers;
use regrasp::regraspgraph::{connect_pose, search, Overlay, QueryContext, QueryError, RegraspGraph, Role};
use regrasp::store::{Store, StoreError};
use regrasp::{Pose, RobotModel};

use crate::{Cli, Command, ExportKind};

/// Allowed gap between the lowest vertex and the table at a query pose.
const REST_TOLERANCE: f64 = 2e-3;

pub enum CliError {
    Input(String),
    Infeasible(String),
    Store(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Store(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Infeasible(m) | CliError::Store(m) => f.write_str(m),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<StoreError> for CliError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::UnknownObject(_) | StoreError::UnknownRobot(_) => CliError::Input(e.to_string()),
            _ => CliError::Store(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub fn run(cli: Cli) -> Result<()> {
    let timings = !cli.quiet_timings;
    match cli.command {
        Command::Precompute { config, store, seed } => cmd_precompute(&config, store, seed, timings),
        Command::Reorient { config, store, robot, init, goal, out } => {
            cmd_reorient(&config, store, robot.as_deref(), &init, &goal, out.as_deref(), timings)
        }
        Command::Export { config, store, kind, out, placement, robot } => {
            cmd_export(&config, store, kind, &out, placement, robot.as_deref())
        }
        Command::Inspect { config, store } => cmd_inspect(config.as_deref(), store),
    }
}

/// `--store`, then `REGRASP_STORE`, then the config.
fn store_path(flag: Option<PathBuf>, ws: Option<&Workspace>) -> Result<PathBuf> {
    flag.or_else(|| std::env::var_os("REGRASP_STORE").map(PathBuf::from))
        .or_else(|| ws.and_then(|w| w.store_path()))
        .ok_or_else(|| CliError::Input("no store path: pass --store, set REGRASP_STORE or set `store` in the config".into()))
}

fn open_existing(path: &Path) -> Result<Store> {
    if !path.exists() {
        return Err(CliError::Input(format!("store {} does not exist; run precompute first", path.display())));
    }
    Ok(Store::open_existing(path)?)
}

fn cmd_precompute(config: &Path, store: Option<PathBuf>, seed: Option<u64>, timings: bool) -> Result<()> {
    let mut ws = Workspace::load(config)?;
    if let Some(s) = seed {
        ws.config.seed = s;
    }
    let path = store_path(store, Some(&ws))?;
    let mut pre = precompute(&ws).map_err(|e| CliError::Input(e.to_string()))?;
    let mut st = Store::open(&path)?;
    pre.save(&mut st).map_err(|e| match e {
        PipelineError::Store(s) => CliError::from(s),
        other => CliError::Store(other.to_string()),
    })?;
    let mut out = std::io::stdout().lock();
    for (k, v) in pre.summary(timings) {
        writeln!(out, "{k:<16} {v}")?;
    }
    writeln!(out, "store            {}", path.display())?;
    Ok(())
}

fn parse_pose(spec: &str, store: &Store, object: i64, table_height: f64) -> Result<Pose> {
    let bad = |m: String| CliError::Input(format!("pose '{spec}': {m}"));
    if let Some(rest) = spec.strip_prefix("placement:") {
        let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(bad("expected placement:ID,x,y,yaw".into()));
        }
        let id: i64 = parts[0].parse().map_err(|_| bad(format!("bad placement id '{}'", parts[0])))?;
        let nums: Vec<f64> = parts[1..]
            .iter()
            .map(|p| p.parse::<f64>().map_err(|_| bad(format!("bad number '{p}'"))))
            .collect::<Result<_>>()?;
        let placement = store
            .free_placements(object)?
            .into_iter()
            .find(|p| p.id == id)
            .ok_or_else(|| bad(format!("no placement {id} for this object")))?;
        return Ok(instance_pose(&placement.rotmat, [nums[0], nums[1]], nums[2], table_height));
    }
    let v = decode_numbers(spec).map_err(|e| bad(e.to_string()))?;
    let a: [f64; 12] = v.try_into().map_err(|v: Vec<f64>| bad(format!("expected 12 numbers, got {}", v.len())))?;
    let p = Pose::from_array(&a);
    if p.orthonormality_error() > 1e-6 {
        return Err(bad("rotation part is not orthonormal".into()));
    }
    Ok(p)
}

fn pick_robot<'a>(ws: &'a Workspace, name: Option<&str>) -> Result<&'a RobotModel> {
    match name {
        Some(n) => ws
            .robot(n)
            .ok_or_else(|| CliError::Input(format!("robot '{n}' is not in the config"))),
        None => Ok(&ws.robots[0]),
    }
}

fn cmd_reorient(
    config: &Path,
    store: Option<PathBuf>,
    robot: Option<&str>,
    init: &str,
    goal: &str,
    out: Option<&Path>,
    timings: bool,
) -> Result<()> {
    let ws = Workspace::load(config)?;
    let st = open_existing(&store_path(store, Some(&ws))?)?;
    let robot = pick_robot(&ws, robot)?;
    let object = st.object_id(&ws.config.object.name)?;
    let robot_id = st.robot_id(&robot.name)?;
    let height = ws.config.table.height;
    let poses = [("init", parse_pose(init, &st, object, height)?), ("goal", parse_pose(goal, &st, object, height)?)];
    for (role, p) in &poses {
        let low = ws.mesh.vertices.iter().map(|v| p.transform_point(v).z).fold(f64::INFINITY, f64::min);
        if (low - height).abs() > REST_TOLERANCE {
            return Err(CliError::Input(format!(
                "{role} pose does not rest on the table: lowest vertex at z = {low:.4}, table at {height:.4}"
            )));
        }
    }
    let t0 = Instant::now();
    let graph = RegraspGraph::build(&st, object, robot_id, ws.config.graph.clone())
        .map_err(|e| CliError::Store(e.to_string()))?;
    let free = st.free_air_grips(object)?;
    let solver = IkSolver::new(robot.clone(), ws.config.ik.clone());
    let ctx = QueryContext {
        free_grips: &free,
        gripper: &ws.gripper,
        solver: &solver,
        retraction: ws.config.retraction,
        table_height: height,
    };
    let infeasible = |e: QueryError| CliError::Infeasible(e.to_string());
    let a = connect_pose(&ctx, &poses[0].1, Role::Init).map_err(infeasible)?;
    let b = connect_pose(&ctx, &poses[1].1, Role::Goal).map_err(infeasible)?;
    let seq = search(&Overlay::new(&graph, a, b)).map_err(infeasible)?;
    let elapsed = t0.elapsed();
    let json = seq.to_json();
    match out {
        Some(p) => std::fs::write(p, json + "\n")?,
        None => println!("{json}"),
    }
    eprintln!("nodes            {}", graph.grip_count);
    eprintln!("steps            {}", seq.steps.len());
    eprintln!("regrasp_count    {}", seq.regrasp_count);
    if timings {
        eprintln!("gs               {:.3}", elapsed.as_secs_f64());
    }
    Ok(())
}

fn cmd_export(
    config: &Path,
    store: Option<PathBuf>,
    kind: ExportKind,
    out: &Path,
    placement: Option<i64>,
    robot: Option<&str>,
) -> Result<()> {
    let ws = Workspace::load(config)?;
    let cfg = &ws.config;
    let needs_placement = || placement.ok_or_else(|| CliError::Input("--placement is required for this export".into()));
    match kind {
        ExportKind::Facets | ExportKind::Samples => {
            let p = cfg.grasp.resolve(&ws.mesh, &ws.gripper);
            let facets = match p.segmentation {
                Segmentation::Over => oversegment(&ws.mesh, p.tau),
                Segmentation::Conventional => segment_conventional(&ws.mesh, p.tau),
            };
            let text = if kind == ExportKind::Facets {
                facets_ply(&ws.mesh, &facets)
            } else {
                samples_ply(&sample_surface(&ws.mesh, p.density, p.max_samples, &facets, cfg.seed))
            };
            std::fs::write(out, text)?;
            return Ok(());
        }
        _ => {}
    }
    let st = open_existing(&store_path(store, Some(&ws))?)?;
    let object = st.object_id(&cfg.object.name)?;
    match kind {
        ExportKind::Csv => {
            st.export_all_csv(out)?;
        }
        ExportKind::Graph => {
            let robot = pick_robot(&ws, robot)?;
            let rid = st.robot_id(&robot.name)?;
            let g = RegraspGraph::build(&st, object, rid, cfg.graph.clone()).map_err(|e| CliError::Store(e.to_string()))?;
            std::fs::write(out, g.to_dot())?;
        }
        ExportKind::Grasps => {
            let text = match placement {
                None => {
                    let glyphs: Vec<(i64, Pose, f64)> =
                        st.free_air_grips(object)?.into_iter().map(|g| (g.id, g.rotmat, g.jawwidth)).collect();
                    posed_scene_obj(&ws.mesh, &Pose::identity(), &ws.gripper, &glyphs)
                }
                Some(id) => {
                    let pose = placement_pose(&st, object, id)?;
                    let glyphs: Vec<(i64, Pose, f64)> = st
                        .free_tabletop_grips(object)?
                        .into_iter()
                        .filter(|g| g.idfreetabletopplacement == id)
                        .map(|g| (g.id, g.rotmat, g.jawwidth))
                        .collect();
                    posed_scene_obj(&ws.mesh, &pose, &ws.gripper, &glyphs)
                }
            };
            std::fs::write(out, text)?;
        }
        ExportKind::Placement => {
            let pose = placement_pose(&st, object, needs_placement()?)?;
            std::fs::write(out, posed_scene_obj(&ws.mesh, &pose, &ws.gripper, &[]))?;
        }
        ExportKind::Facets | ExportKind::Samples => unreachable!(),
    }
    Ok(())
}

fn placement_pose(st: &Store, object: i64, id: i64) -> Result<Pose> {
    st.free_placements(object)?
        .into_iter()
        .find(|p| p.id == id)
        .map(|p| p.rotmat)
        .ok_or_else(|| CliError::Input(format!("no placement {id} for this object")))
}

fn cmd_inspect(config: Option<&Path>, store: Option<PathBuf>) -> Result<()> {
    let ws = config.map(Workspace::load).transpose()?;
    let st = open_existing(&store_path(store, ws.as_ref())?)?;
    let mut out = std::io::stdout().lock();
    for (t, n) in st.row_counts()? {
        writeln!(out, "{t:<24} {n}")?;
    }
    let report = st.audit()?;
    for v in report.foreign_key_violations.iter().chain(&report.cardinality_violations) {
        writeln!(out, "violation: {v}")?;
    }
    if !report.is_clean() {
        return Err(CliError::Store("integrity audit failed".into()));
    }
    writeln!(out, "audit ok")?;
    Ok(())
}
