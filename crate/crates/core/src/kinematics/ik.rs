use nalgebra::{Matrix3, Matrix6, Vector3, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::RobotModel;
use crate::pose::rotation_log;
use crate::Pose;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IkParams {
    pub damping: f64,
    pub max_iterations: usize,
    /// Home plus `seeds - 1` random configurations.
    pub seeds: usize,
    pub tol_pos: f64,
    pub tol_rot: f64,
    /// Largest joint change per iteration (rad).
    pub max_step: f64,
    /// Iterations without a relative improvement of 1e-3 before a restart.
    pub patience: usize,
    pub rng_seed: u64,
}

impl Default for IkParams {
    fn default() -> Self {
        Self {
            damping: 1e-3,
            max_iterations: 200,
            seeds: 8,
            tol_pos: 1e-3,
            tol_rot: 1e-2,
            max_step: 0.5,
            patience: 25,
            rng_seed: 0x1c0ffee,
        }
    }
}

impl IkParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.damping >= 0.0) || !(self.tol_pos > 0.0) || !(self.tol_rot > 0.0) || !(self.max_step > 0.0) {
            return Err("ik damping must be >= 0 and tolerances and max_step > 0".into());
        }
        if self.seeds == 0 || self.max_iterations == 0 {
            return Err("ik seeds and max_iterations must be positive".into());
        }
        Ok(())
    }
}

/// Damped least-squares solver with a fixed seed schedule shared by all
/// queries, so results do not depend on query order.
#[derive(Clone, Debug)]
pub struct IkSolver {
    pub robot: RobotModel,
    pub params: IkParams,
    seeds: Vec<Vec<f64>>,
}

/// Joint axes and origins in the world plus the hand pose.
fn frames(robot: &RobotModel, q: &[f64]) -> (Vec<(Vector3<f64>, Vector3<f64>)>, Pose) {
    let mut t = robot.base_pose.clone();
    let mut out = Vec::with_capacity(q.len());
    for (j, &v) in robot.joints.iter().zip(q) {
        t = &t * &j.origin;
        out.push((t.rot * j.axis.into_inner(), t.trans));
        t = &t * &Pose::from_axis_angle(&j.axis, v);
    }
    (out, &t * &robot.tool_transform)
}

/// Geometric Jacobian rows: linear velocity then angular velocity.
pub fn jacobian(robot: &RobotModel, q: &[f64]) -> Vec<Vector6<f64>> {
    let (f, hand) = frames(robot, q);
    f.iter()
        .map(|(a, o)| {
            let v = a.cross(&(hand.trans - o));
            Vector6::new(v.x, v.y, v.z, a.x, a.y, a.z)
        })
        .collect()
}

fn rotation_error(target: &Matrix3<f64>, current: &Matrix3<f64>) -> Vector3<f64> {
    rotation_log(&(target * current.transpose()))
}

impl IkSolver {
    pub fn new(robot: RobotModel, params: IkParams) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
        let mut seeds = vec![robot.home.clone()];
        while seeds.len() < params.seeds {
            seeds.push(
                robot
                    .joints
                    .iter()
                    .map(|j| {
                        if j.limits[0] < j.limits[1] {
                            rng.gen_range(j.limits[0]..=j.limits[1])
                        } else {
                            j.limits[0]
                        }
                    })
                    .collect(),
            );
        }
        Self { robot, params, seeds }
    }

    pub fn seeds(&self) -> &[Vec<f64>] {
        &self.seeds
    }

    /// Position and rotation error of `q` against `target`.
    pub fn error(&self, q: &[f64], target: &Pose) -> (f64, f64) {
        let (dp, da) = self.robot.fk_unchecked(q).distance(target);
        (dp, if self.robot.position_only { 0.0 } else { da })
    }

    pub fn converged(&self, q: &[f64], target: &Pose) -> bool {
        let (dp, da) = self.error(q, target);
        dp <= self.params.tol_pos && da <= self.params.tol_rot
    }

    /// Cheap rejection of targets outside the reach sphere.
    pub fn out_of_reach(&self, target: &Pose) -> bool {
        (target.trans - self.robot.shoulder()).norm() > self.robot.reach() + self.params.tol_pos
    }

    pub fn solve(&self, target: &Pose) -> Option<Vec<f64>> {
        self.solve_with(target, None)
    }

    /// Tries `warm` first, then the seed schedule.
    pub fn solve_with(&self, target: &Pose, warm: Option<&[f64]>) -> Option<Vec<f64>> {
        self.solve_traced(target, warm, &mut |_| {})
    }

    /// As [`IkSolver::solve_with`], reporting every iterate to `visit`.
    pub fn solve_traced(
        &self,
        target: &Pose,
        warm: Option<&[f64]>,
        visit: &mut dyn FnMut(&[f64]),
    ) -> Option<Vec<f64>> {
        if self.out_of_reach(target) {
            return None;
        }
        let warm = warm.filter(|w| w.len() == self.robot.dof());
        for seed in warm.into_iter().chain(self.seeds.iter().map(|s| s.as_slice())) {
            let mut q = seed.to_vec();
            self.robot.clamp(&mut q);
            if let Some(q) = self.descend(q, target, visit) {
                return Some(q);
            }
        }
        None
    }

    fn descend(&self, mut q: Vec<f64>, target: &Pose, visit: &mut dyn FnMut(&[f64])) -> Option<Vec<f64>> {
        let p = &self.params;
        let lambda2 = p.damping * p.damping;
        let mut best = f64::INFINITY;
        let mut stale = 0;
        for _ in 0..=p.max_iterations {
            visit(&q);
            let (f, hand) = frames(&self.robot, &q);
            let ep = target.trans - hand.trans;
            let ew = if self.robot.position_only {
                Vector3::zeros()
            } else {
                rotation_error(&target.rot, &hand.rot)
            };
            if ep.norm() <= p.tol_pos && ew.norm() <= p.tol_rot {
                return Some(q);
            }
            let score = ep.norm() + 0.1 * ew.norm();
            if score < best * (1.0 - 1e-3) {
                best = score;
                stale = 0;
            } else {
                stale += 1;
                if stale > p.patience {
                    return None;
                }
            }
            let cols: Vec<Vector6<f64>> = f
                .iter()
                .map(|(a, o)| {
                    let v = a.cross(&(hand.trans - o));
                    if self.robot.position_only {
                        Vector6::new(v.x, v.y, v.z, 0.0, 0.0, 0.0)
                    } else {
                        Vector6::new(v.x, v.y, v.z, a.x, a.y, a.z)
                    }
                })
                .collect();
            let e = Vector6::new(ep.x, ep.y, ep.z, ew.x, ew.y, ew.z);
            let mut jjt = Matrix6::identity() * lambda2;
            for c in &cols {
                jjt += c * c.transpose();
            }
            if self.robot.position_only {
                for i in 3..6 {
                    jjt[(i, i)] = 1.0;
                }
            }
            let y = match jjt.cholesky() {
                Some(ch) => ch.solve(&e),
                None => return None,
            };
            let mut dq: Vec<f64> = cols.iter().map(|c| c.dot(&y)).collect();
            let m = dq.iter().fold(0.0f64, |a, d| a.max(d.abs()));
            if m > p.max_step {
                let s = p.max_step / m;
                dq.iter_mut().for_each(|d| *d *= s);
            }
            for (v, d) in q.iter_mut().zip(&dq) {
                *v += d;
            }
            self.robot.clamp(&mut q);
        }
        None
    }
}
