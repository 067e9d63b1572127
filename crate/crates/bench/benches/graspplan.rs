use criterion::{criterion_group, criterion_main, Criterion};
use regrasp::graspplan::plan_free_grasps;
use regrasp_bench::cube_workspace;

fn free_grasps(c: &mut Criterion) {
    let ws = cube_workspace(true);
    let mut g = c.benchmark_group("plan_free_grasps");
    g.sample_size(10);
    g.bench_function("cube50", |b| b.iter(|| plan_free_grasps(&ws.mesh, &ws.gripper, &ws.config.grasp, 7)));
    g.finish();
}

criterion_group!(benches, free_grasps);
criterion_main!(benches);
