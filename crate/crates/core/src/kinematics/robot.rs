use std::path::Path;

use nalgebra::{Rotation3, Unit, Vector3};
use serde::{Deserialize, Serialize};

use super::KinematicsError;
use crate::Pose;

/// Translation plus roll-pitch-yaw (extrinsic x, y, z) rotation.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Frame {
    pub xyz: [f64; 3],
    pub rpy: [f64; 3],
}

impl Frame {
    pub fn to_pose(&self) -> Pose {
        let r = Rotation3::from_euler_angles(self.rpy[0], self.rpy[1], self.rpy[2]);
        Pose::new(*r.matrix(), Vector3::from(self.xyz))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointSpec {
    #[serde(default)]
    pub name: String,
    pub axis: [f64; 3],
    #[serde(default)]
    pub xyz: [f64; 3],
    #[serde(default)]
    pub rpy: [f64; 3],
    pub limits: [f64; 2],
}

/// On-disk robot description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotSpec {
    pub name: String,
    #[serde(default)]
    pub base: Frame,
    #[serde(default)]
    pub tool: Frame,
    /// First IK seed; zeros when absent.
    #[serde(default)]
    pub home: Option<Vec<f64>>,
    /// Allow chains shorter than six joints, solved for position only.
    #[serde(default)]
    pub position_only: bool,
    pub joints: Vec<JointSpec>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Joint {
    pub name: String,
    pub axis: Unit<Vector3<f64>>,
    /// Transform from the previous link frame to this joint's frame at q = 0.
    pub origin: Pose,
    pub limits: [f64; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub struct RobotModel {
    pub name: String,
    pub joints: Vec<Joint>,
    pub base_pose: Pose,
    /// Flange to hand frame.
    pub tool_transform: Pose,
    pub home: Vec<f64>,
    pub position_only: bool,
}

impl RobotModel {
    pub fn from_spec(spec: &RobotSpec) -> Result<Self, KinematicsError> {
        let bad = |m: String| KinematicsError::Config(format!("robot '{}': {m}", spec.name));
        if spec.joints.is_empty() {
            return Err(bad("no joints".into()));
        }
        if spec.joints.len() < 6 && !spec.position_only {
            return Err(bad(format!(
                "{} joints cannot reach arbitrary orientations; set position_only = true to accept",
                spec.joints.len()
            )));
        }
        let mut joints = Vec::with_capacity(spec.joints.len());
        for (i, j) in spec.joints.iter().enumerate() {
            let axis = Vector3::from(j.axis);
            if !(axis.norm() > 1e-9) {
                return Err(bad(format!("joint {i} has a zero axis")));
            }
            if !(j.limits[0] <= j.limits[1]) {
                return Err(bad(format!("joint {i} limits are not ordered")));
            }
            let all = j.xyz.iter().chain(&j.rpy).chain(&j.axis).chain(&j.limits);
            if !all.into_iter().all(|x| x.is_finite()) {
                return Err(bad(format!("joint {i} has a non-finite value")));
            }
            joints.push(Joint {
                name: if j.name.is_empty() { format!("j{}", i + 1) } else { j.name.clone() },
                axis: Unit::new_normalize(axis),
                origin: Frame { xyz: j.xyz, rpy: j.rpy }.to_pose(),
                limits: j.limits,
            });
        }
        let home = match &spec.home {
            Some(h) if h.len() != joints.len() => {
                return Err(bad(format!("home has {} values, expected {}", h.len(), joints.len())))
            }
            Some(h) => h.clone(),
            None => vec![0.0; joints.len()],
        };
        let model = Self {
            name: spec.name.clone(),
            joints,
            base_pose: spec.base.to_pose(),
            tool_transform: spec.tool.to_pose(),
            home,
            position_only: spec.position_only,
        };
        model.check_limits(&model.home).map_err(|e| bad(format!("home: {e}")))?;
        Ok(model)
    }

    pub fn from_toml_str(s: &str) -> Result<Self, KinematicsError> {
        let spec: RobotSpec = toml::from_str(s).map_err(|e| KinematicsError::Config(e.to_string()))?;
        Self::from_spec(&spec)
    }

    pub fn load(path: &Path) -> Result<Self, KinematicsError> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| KinematicsError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&s)
    }

    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn check_limits(&self, q: &[f64]) -> Result<(), KinematicsError> {
        if q.len() != self.dof() {
            return Err(KinematicsError::Dimension { expected: self.dof(), got: q.len() });
        }
        for (i, (j, &v)) in self.joints.iter().zip(q).enumerate() {
            if !(v >= j.limits[0] && v <= j.limits[1]) {
                return Err(KinematicsError::OutOfLimits { joint: i, value: v, limits: j.limits });
            }
        }
        Ok(())
    }

    pub fn within_limits(&self, q: &[f64]) -> bool {
        self.check_limits(q).is_ok()
    }

    pub fn clamp(&self, q: &mut [f64]) {
        for (v, j) in q.iter_mut().zip(&self.joints) {
            *v = v.clamp(j.limits[0], j.limits[1]);
        }
    }

    /// Hand pose in the world; rejects configurations outside the limits.
    pub fn fk(&self, q: &[f64]) -> Result<Pose, KinematicsError> {
        self.check_limits(q)?;
        Ok(self.fk_unchecked(q))
    }

    pub fn fk_unchecked(&self, q: &[f64]) -> Pose {
        let mut t = self.base_pose.clone();
        for (j, &v) in self.joints.iter().zip(q) {
            t = &(&t * &j.origin) * &Pose::from_axis_angle(&j.axis, v);
        }
        &t * &self.tool_transform
    }

    /// World position of the first joint, the center of the reach sphere.
    pub fn shoulder(&self) -> Vector3<f64> {
        (&self.base_pose * &self.joints[0].origin).trans
    }

    /// Upper bound on the distance from [`RobotModel::shoulder`] to the hand.
    pub fn reach(&self) -> f64 {
        self.joints[1..].iter().map(|j| j.origin.trans.norm()).sum::<f64>()
            + self.tool_transform.trans.norm()
    }
}
