use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::collision::Obb;
use crate::Pose;

/// Parallel-jaw gripper.
///
/// Hand frame: origin at the center between the two contacts, `x` is the
/// approach direction (fingertips point along `+x`, the palm sits on the `-x`
/// side) and `z` is the jaw-closing axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GripperModel {
    #[serde(default)]
    pub name: String,
    pub max_jaw_width: f64,
    pub min_jaw_width: f64,
    /// Half extents (along hand x, hand y) of the rectangular finger pad.
    pub pad_half_extents: [f64; 2],
    pub pad_sweep_cylinder_radius: f64,
    pub finger_box: [f64; 3],
    pub palm_box: [f64; 3],
    /// Distance from the contact center back to the palm's front face.
    pub palm_offset: f64,
    /// Radians.
    pub friction_half_angle: f64,
    /// Extra opening added to the contact width when the full hand is
    /// checked, so the pads do not register contact with the grasped faces.
    #[serde(default = "default_jaw_clearance")]
    pub jaw_clearance: f64,
}

fn default_jaw_clearance() -> f64 {
    1e-3
}

impl GripperModel {
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("max_jaw_width", self.max_jaw_width),
            ("pad_half_extents[0]", self.pad_half_extents[0]),
            ("pad_half_extents[1]", self.pad_half_extents[1]),
            ("pad_sweep_cylinder_radius", self.pad_sweep_cylinder_radius),
            ("finger_box[0]", self.finger_box[0]),
            ("finger_box[1]", self.finger_box[1]),
            ("finger_box[2]", self.finger_box[2]),
            ("palm_box[0]", self.palm_box[0]),
            ("palm_box[1]", self.palm_box[1]),
            ("palm_box[2]", self.palm_box[2]),
            ("palm_offset", self.palm_offset),
            ("friction_half_angle", self.friction_half_angle),
        ];
        for (k, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{k} must be positive, got {v}"));
            }
        }
        if !(self.min_jaw_width >= 0.0 && self.min_jaw_width < self.max_jaw_width) {
            return Err("need 0 <= min_jaw_width < max_jaw_width".into());
        }
        if self.pad_sweep_cylinder_radius < self.pad_circumradius() {
            return Err(format!(
                "pad_sweep_cylinder_radius {} is smaller than the pad circumradius {}",
                self.pad_sweep_cylinder_radius,
                self.pad_circumradius()
            ));
        }
        if self.finger_box[0] < self.pad_half_extents[0] || self.finger_box[1] < self.pad_half_extents[1] {
            return Err("finger_box must cover the pad footprint".into());
        }
        if self.jaw_clearance < 0.0 {
            return Err("jaw_clearance must be >= 0".into());
        }
        Ok(())
    }

    pub fn pad_circumradius(&self) -> f64 {
        self.pad_half_extents[0].hypot(self.pad_half_extents[1])
    }

    /// Palm and both fingers at opening `jaw`, in the frame of `hand`.
    pub fn hand_boxes(&self, hand: &Pose, jaw: f64) -> [Obb; 3] {
        let [fx, fy, fz] = self.finger_box;
        let [px, py, pz] = self.palm_box;
        let tip = self.pad_half_extents[0];
        let finger = |s: f64| {
            Obb::new(
                hand,
                Vector3::new(tip - fx, 0.0, s * (0.5 * jaw + fz)),
                Vector3::new(fx, fy, fz),
            )
        };
        let palm = Obb::new(
            hand,
            Vector3::new(-self.palm_offset - px, 0.0, 0.0),
            Vector3::new(px, py, pz),
        );
        [palm, finger(-1.0), finger(1.0)]
    }

    /// A gripper scaled for a unit-sized object, used in tests.
    pub fn unit_test_gripper() -> Self {
        Self {
            name: "unit".into(),
            max_jaw_width: 1.2,
            min_jaw_width: 0.0,
            pad_half_extents: [0.05, 0.05],
            pad_sweep_cylinder_radius: 0.075,
            finger_box: [0.2, 0.06, 0.03],
            palm_box: [0.05, 0.1, 0.7],
            palm_offset: 0.3,
            friction_half_angle: 17f64.to_radians(),
            jaw_clearance: 0.01,
        }
    }
}
