use criterion::{criterion_group, criterion_main, Criterion};
use regrasp::kinematics::IkSolver;
use regrasp_bench::cube_workspace;

fn solve(c: &mut Criterion) {
    let ws = cube_workspace(true);
    for robot in &ws.robots {
        let solver = IkSolver::new(robot.clone(), ws.config.ik.clone());
        let targets: Vec<_> = (0..16)
            .map(|i| {
                let q: Vec<f64> = robot
                    .joints
                    .iter()
                    .enumerate()
                    .map(|(j, jt)| {
                        let t = ((i * 7 + j * 3) % 11) as f64 / 10.0;
                        jt.limits[0] + (0.2 + 0.6 * t) * (jt.limits[1] - jt.limits[0])
                    })
                    .collect();
                robot.fk_unchecked(&q)
            })
            .collect();
        c.bench_function(&format!("ik {}", robot.name), |b| {
            b.iter(|| targets.iter().filter(|t| solver.solve(t).is_some()).count())
        });
    }
}

criterion_group!(benches, solve);
criterion_main!(benches);
