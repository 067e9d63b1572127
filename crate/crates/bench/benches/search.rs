use criterion::{criterion_group, criterion_main, Criterion};
use regrasp::kinematics::IkSolver;
use regrasp::pipeline::precompute;
use regrasp::regraspgraph::{connect_pose, search, Overlay, QueryContext, Role};
use regrasp::{Pose, RegraspGraph, Store};
use regrasp_bench::cube_workspace;

fn flip(c: &mut Criterion) {
    let ws = cube_workspace(false);
    let mut pre = precompute(&ws).unwrap();
    let mut store = Store::open_in_memory().unwrap();
    pre.save(&mut store).unwrap();
    let obj = store.object_id(&ws.config.object.name).unwrap();
    let robot = &ws.robots[0];
    let rid = store.robot_id(&robot.name).unwrap();
    let free = store.free_air_grips(obj).unwrap();
    let solver = IkSolver::new(robot.clone(), ws.config.ik.clone());
    let ctx = QueryContext {
        free_grips: &free,
        gripper: &ws.gripper,
        solver: &solver,
        retraction: ws.config.retraction,
        table_height: ws.config.table.height,
    };
    let init = Pose::from_array(&[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.42, 0.0, 0.025]);
    let goal = Pose::from_array(&[1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0, 0.42, 0.0, 0.025]);

    let mut g = c.benchmark_group("cube flip");
    g.sample_size(10);
    g.bench_function("build graph", |b| {
        b.iter(|| RegraspGraph::build(&store, obj, rid, ws.config.graph.clone()).unwrap())
    });
    let graph = RegraspGraph::build(&store, obj, rid, ws.config.graph.clone()).unwrap();
    g.bench_function("connect and search", |b| {
        b.iter(|| {
            let a = connect_pose(&ctx, &init, Role::Init).unwrap();
            let z = connect_pose(&ctx, &goal, Role::Goal).unwrap();
            search(&Overlay::new(&graph, a, z)).unwrap()
        })
    });
    let a = connect_pose(&ctx, &init, Role::Init).unwrap();
    let z = connect_pose(&ctx, &goal, Role::Goal).unwrap();
    g.bench_function("search only", |b| b.iter(|| search(&Overlay::new(&graph, a.clone(), z.clone())).unwrap()));
    g.finish();
}

criterion_group!(benches, flip);
criterion_main!(benches);
