//! Serial-arm kinematics and grasp reachability with retraction checks.

mod ik;
mod robot;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ik::{jacobian, IkParams, IkSolver};
pub use robot::{Frame, Joint, JointSpec, RobotModel, RobotSpec};

use crate::Pose;

#[derive(Debug, Error)]
pub enum KinematicsError {
    #[error("robot config: {0}")]
    Config(String),
    #[error("expected {expected} joint values, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("joint {joint} value {value} outside limits [{}, {}]", limits[0], limits[1])]
    OutOfLimits { joint: usize, value: f64, limits: [f64; 2] },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetractionSpec {
    pub handx_distance: f64,
    pub worldz_distance: f64,
}

impl Default for RetractionSpec {
    fn default() -> Self {
        Self { handx_distance: 0.05, worldz_distance: 0.05 }
    }
}

impl RetractionSpec {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.handx_distance >= 0.0 && self.worldz_distance >= 0.0)
            || !self.handx_distance.is_finite()
            || !self.worldz_distance.is_finite()
        {
            return Err("retraction distances must be finite and >= 0".into());
        }
        Ok(())
    }

    /// The grip pose backed off along its approach axis, then lifted.
    pub fn targets(&self, grip: &Pose) -> [Pose; 3] {
        let mut b = grip.clone();
        b.trans -= grip.axis(0) * self.handx_distance;
        let mut c = b.clone();
        c.trans += Vector3::z() * self.worldz_distance;
        [grip.clone(), b, c]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IkFeasibility {
    pub robot_id: usize,
    pub tabletopgrip_id: usize,
    pub feasibility: bool,
    pub feasibility_handx: bool,
    pub feasibility_handxworldz: bool,
}

impl IkFeasibility {
    pub fn all(&self) -> bool {
        self.feasibility && self.feasibility_handx && self.feasibility_handxworldz
    }
}

/// Three independent IK queries; each later query is warm-started from the
/// previous solution when there is one.
pub fn grip_feasibility(solver: &IkSolver, hand_pose: &Pose, ret: &RetractionSpec) -> [bool; 3] {
    let mut out = [false; 3];
    let mut warm: Option<Vec<f64>> = None;
    for (i, t) in ret.targets(hand_pose).iter().enumerate() {
        let q = solver.solve_with(t, warm.as_deref());
        out[i] = q.is_some();
        if q.is_some() {
            warm = q;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Quaternion, UnitQuaternion};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) const ARM6: &str = include_str!("../../../../assets/robots/arm6.toml");
    const ARM7: &str = include_str!("../../../../assets/robots/arm7.toml");

    fn random_q(r: &RobotModel, rng: &mut ChaCha8Rng) -> Vec<f64> {
        r.joints.iter().map(|j| rng.gen_range(j.limits[0]..=j.limits[1])).collect()
    }

    // second forward chain built from quaternions
    fn fk_quat(r: &RobotModel, q: &[f64]) -> (UnitQuaternion<f64>, Vector3<f64>) {
        let conv = |p: &Pose| {
            let m = nalgebra::Rotation3::from_matrix_unchecked(p.rot);
            (UnitQuaternion::from_rotation_matrix(&m), p.trans)
        };
        let compose = |a: (UnitQuaternion<f64>, Vector3<f64>), b: (UnitQuaternion<f64>, Vector3<f64>)| {
            (a.0 * b.0, a.1 + a.0 * b.1)
        };
        let mut t = conv(&r.base_pose);
        for (j, &v) in r.joints.iter().zip(q) {
            t = compose(t, conv(&j.origin));
            let h = 0.5 * v;
            let a = j.axis.into_inner() * h.sin();
            let rq = UnitQuaternion::new_normalize(Quaternion::new(h.cos(), a.x, a.y, a.z));
            t = compose(t, (rq, Vector3::zeros()));
        }
        compose(t, conv(&r.tool_transform))
    }

    #[test]
    fn fk_matches_quaternion_chain() {
        for src in [ARM6, ARM7] {
            let r = RobotModel::from_toml_str(src).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            for _ in 0..200 {
                let q = random_q(&r, &mut rng);
                let p = r.fk(&q).unwrap();
                let (qr, t) = fk_quat(&r, &q);
                assert!((p.trans - t).norm() < 1e-12);
                assert!((p.rot - qr.to_rotation_matrix().into_inner()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn fk_zero_is_origin_product() {
        let r = RobotModel::from_toml_str(ARM6).unwrap();
        let mut t = r.base_pose.clone();
        for j in &r.joints {
            t = &t * &j.origin;
        }
        t = &t * &r.tool_transform;
        assert_eq!(r.fk(&vec![0.0; 6]).unwrap(), t);
    }

    #[test]
    fn single_joint_closed_form() {
        let r = RobotModel::from_toml_str(
            r#"
            name = "one"
            position_only = true
            tool = { xyz = [1.0, 0.0, 0.0] }
            [[joints]]
            axis = [0.0, 0.0, 1.0]
            limits = [-3.2, 3.2]
            "#,
        )
        .unwrap();
        let p = r.fk(&[std::f64::consts::FRAC_PI_2]).unwrap();
        assert!((p.trans - Vector3::new(0.0, 1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn fk_rejects_out_of_limits_and_bad_dims() {
        let r = RobotModel::from_toml_str(ARM6).unwrap();
        let mut q = vec![0.0; 6];
        q[1] = 10.0;
        assert!(matches!(r.fk(&q), Err(KinematicsError::OutOfLimits { joint: 1, .. })));
        assert!(matches!(r.fk(&[0.0; 3]), Err(KinematicsError::Dimension { .. })));
    }

    #[test]
    fn short_chain_rejected_by_default() {
        let e = RobotModel::from_toml_str(
            "name = \"x\"\n[[joints]]\naxis = [0.0, 0.0, 1.0]\nlimits = [-1.0, 1.0]\n",
        );
        assert!(matches!(e, Err(KinematicsError::Config(_))));
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let r = RobotModel::from_toml_str(ARM7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let q = random_q(&r, &mut rng);
        let j = jacobian(&r, &q);
        let h = 1e-6;
        for i in 0..q.len() {
            let mut qp = q.clone();
            qp[i] += h;
            let a = r.fk_unchecked(&q);
            let b = r.fk_unchecked(&qp);
            let dv = (b.trans - a.trans) / h;
            let dr = crate::pose::rotation_log(&(b.rot * a.rot.transpose())) / h;
            assert!((dv - j[i].fixed_rows::<3>(0)).norm() < 1e-5);
            assert!((dr - j[i].fixed_rows::<3>(3)).norm() < 1e-5);
        }
    }

    #[test]
    fn far_target_infeasible() {
        let r = RobotModel::from_toml_str(ARM6).unwrap();
        let s = IkSolver::new(r, IkParams::default());
        assert!(s.solve(&Pose::from_translation(Vector3::new(10.0, 0.0, 0.0))).is_none());
    }

    #[test]
    fn limited_wrist_keeps_iterates_in_limits() {
        let mut spec: RobotSpec = toml::from_str(ARM6).unwrap();
        spec.joints[4].limits = [-0.2, 0.2];
        spec.home = Some(vec![0.0, 0.6, 1.2, 0.0, 0.2, 0.0]);
        let r = RobotModel::from_spec(&spec).unwrap();
        let s = IkSolver::new(r.clone(), IkParams::default());
        // reachable position, orientation needing a strongly bent wrist
        let mut q = r.home.clone();
        q[4] = 0.2;
        let mut target = r.fk(&q).unwrap();
        target.rot = target.rot * *nalgebra::Rotation3::from_axis_angle(&Vector3::y_axis(), 1.2).matrix();
        let mut violations = 0;
        let got = s.solve_traced(&target, None, &mut |it| {
            if !r.within_limits(it) {
                violations += 1;
            }
        });
        assert_eq!(violations, 0);
        if let Some(q) = got {
            assert!(r.within_limits(&q));
            assert!(s.converged(&q, &target));
        }
    }

    #[test]
    fn zero_retraction_flags_equal() {
        let r = RobotModel::from_toml_str(ARM6).unwrap();
        let s = IkSolver::new(r.clone(), IkParams::default());
        let ret = RetractionSpec { handx_distance: 0.0, worldz_distance: 0.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let t = r.fk(&random_q(&r, &mut rng)).unwrap();
            let f = grip_feasibility(&s, &t, &ret);
            assert!(f[0] == f[1] && f[1] == f[2]);
        }
    }

    #[test]
    fn boundary_grip_cannot_retract() {
        // hand mounted facing back along the arm: backing off along the
        // approach axis moves the hand beyond the reach sphere
        let mut spec: RobotSpec = toml::from_str(ARM6).unwrap();
        spec.tool = Frame { xyz: [0.0, 0.0, 0.0], rpy: [0.0, std::f64::consts::FRAC_PI_2, 0.0] };
        spec.home = Some(vec![0.0; 6]);
        let r = RobotModel::from_spec(&spec).unwrap();
        let s = IkSolver::new(r.clone(), IkParams::default());
        let t = r.fk(&r.home).unwrap();
        assert!(((t.trans - r.shoulder()).norm() - r.reach()).abs() < 1e-12);
        let f = grip_feasibility(&s, &t, &RetractionSpec { handx_distance: 0.05, worldz_distance: 0.05 });
        assert_eq!(f, [true, false, false]);
    }
}
