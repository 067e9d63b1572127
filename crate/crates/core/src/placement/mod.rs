//! Stable placements on a flat table, grasp transfer onto them, and the
//! position/yaw discretization of the table.

mod stable;

use nalgebra::{Point3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use stable::{
    convex_hull_2d, inside_margin, principal_axis, stable_placements, Placement,
    COPLANAR_FACE_TOLERANCE, DEFAULT_STABILITY_THRESHOLD,
};

use crate::graspplan::{GraspConfig, GripperModel};
use crate::Pose;

/// Slack below the table plane tolerated before a hand box counts as
/// penetrating it.
pub const TABLE_TOLERANCE: f64 = 1e-9;

/// Contact points and inward normals of a grip, expressed in some frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GripContacts {
    pub p0: Point3<f64>,
    pub p1: Point3<f64>,
    pub n0: Vector3<f64>,
    pub n1: Vector3<f64>,
}

impl GripContacts {
    pub fn of_grasp(g: &GraspConfig) -> Self {
        Self {
            p0: g.contacts.p0,
            p1: g.contacts.p1,
            n0: g.contacts.n0,
            n1: g.contacts.n1,
        }
    }

    pub fn transformed(&self, t: &Pose) -> Self {
        Self {
            p0: t.transform_point(&self.p0),
            p1: t.transform_point(&self.p1),
            n0: t.transform_vector(&self.n0),
            n1: t.transform_vector(&self.n1),
        }
    }
}

/// A free grasp carried into the frame of a canonical placement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlacementGrip {
    pub id: usize,
    pub placement_id: usize,
    pub freeairgrip_id: usize,
    pub hand_pose: Pose,
    pub jaw_width: f64,
    pub contacts: GripContacts,
}

/// True when any hand box reaches below the plane `z = table_z`.
pub fn hits_table(gripper: &GripperModel, hand_pose: &Pose, jaw_width: f64, table_z: f64) -> bool {
    gripper
        .hand_boxes(hand_pose, jaw_width + gripper.jaw_clearance)
        .iter()
        .any(|b| b.min_z() < table_z - TABLE_TOLERANCE)
}

/// Transforms every free grasp by `placement.rotmat` and drops those whose
/// hand enters the table half-space. Ids are left at zero.
pub fn placement_grips(
    placement: &Placement,
    grasps: &[GraspConfig],
    gripper: &GripperModel,
) -> Vec<PlacementGrip> {
    grasps
        .iter()
        .filter_map(|g| {
            let hand_pose = &placement.rotmat * &g.hand_pose;
            if hits_table(gripper, &hand_pose, g.jaw_width, 0.0) {
                return None;
            }
            Some(PlacementGrip {
                id: 0,
                placement_id: placement.id,
                freeairgrip_id: g.id,
                hand_pose,
                jaw_width: g.jaw_width,
                contacts: GripContacts::of_grasp(g).transformed(&placement.rotmat),
            })
        })
        .collect()
}

/// Runs [`placement_grips`] for every placement and numbers the result
/// consecutively in placement order.
pub fn all_placement_grips(
    placements: &[Placement],
    grasps: &[GraspConfig],
    gripper: &GripperModel,
) -> Vec<PlacementGrip> {
    let per: Vec<Vec<PlacementGrip>> = placements
        .par_iter()
        .map(|p| placement_grips(p, grasps, gripper))
        .collect();
    let mut out: Vec<PlacementGrip> = per.into_iter().flatten().collect();
    for (i, g) in out.iter_mut().enumerate() {
        g.id = i;
    }
    out
}

/// Rectangular table with a lattice of candidate object positions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TableConfig {
    /// Extent along world x and y (m).
    pub size: [f64; 2],
    pub center: [f64; 2],
    /// Lattice points along x and y.
    pub grid: [usize; 2],
    pub angles: usize,
    /// Height of the table top above the world origin (m).
    pub height: f64,
}

impl Default for TableConfig {
    fn default() -> Self {
        Self {
            size: [0.6, 0.9],
            center: [0.45, 0.0],
            grid: [7, 13],
            angles: 8,
            height: 0.0,
        }
    }
}

impl TableConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.size[0] > 0.0 && self.size[1] > 0.0) {
            return Err("table.size must be positive".into());
        }
        if self.grid[0] == 0 || self.grid[1] == 0 {
            return Err("table.grid must be at least 1x1".into());
        }
        if self.angles == 0 {
            return Err("table.angles must be at least 1".into());
        }
        if !self.height.is_finite() || !self.center.iter().all(|c| c.is_finite()) {
            return Err("table.center and table.height must be finite".into());
        }
        Ok(())
    }

    /// Cell centers of the lattice, x-major.
    pub fn positions(&self) -> Vec<[f64; 2]> {
        let mut out = Vec::with_capacity(self.grid[0] * self.grid[1]);
        for i in 0..self.grid[0] {
            let x = self.center[0] - 0.5 * self.size[0]
                + (i as f64 + 0.5) * self.size[0] / self.grid[0] as f64;
            for j in 0..self.grid[1] {
                let y = self.center[1] - 0.5 * self.size[1]
                    + (j as f64 + 0.5) * self.size[1] / self.grid[1] as f64;
                out.push([x, y]);
            }
        }
        out
    }

    /// Uniform yaw values in radians starting at zero.
    pub fn angle_values(&self) -> Vec<f64> {
        (0..self.angles)
            .map(|k| std::f64::consts::TAU * k as f64 / self.angles as f64)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TabletopPlacement {
    pub id: usize,
    pub placement_id: usize,
    pub position: [f64; 2],
    pub angle_id: usize,
    pub world_pose: Pose,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TabletopGrip {
    pub id: usize,
    pub tabletopplacement_id: usize,
    pub freeairgrip_id: usize,
    pub hand_pose: Pose,
    pub jaw_width: f64,
    pub contacts: GripContacts,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Tabletop {
    pub placements: Vec<TabletopPlacement>,
    pub grips: Vec<TabletopGrip>,
}

/// `translate(x, y, height) * rotz(yaw) * rotmat`.
pub fn instance_pose(rotmat: &Pose, position: [f64; 2], yaw: f64, height: f64) -> Pose {
    let lift = Pose::from_translation(Vector3::new(position[0], position[1], height));
    &(&lift * &Pose::rot_z(yaw)) * rotmat
}

/// Instantiates every placement at every position and yaw. `free_grasps` is
/// indexed by freeairgrip id and supplies the hand poses composed with each
/// instance pose. Output order is placement, position, angle, grip.
pub fn tabletop_discretize(
    placements: &[Placement],
    placement_grips: &[PlacementGrip],
    free_grasps: &[GraspConfig],
    positions: &[[f64; 2]],
    angles: &[f64],
    height: f64,
) -> Tabletop {
    let mut by_placement: Vec<Vec<&PlacementGrip>> = vec![Vec::new(); placements.len()];
    for g in placement_grips {
        by_placement[g.placement_id].push(g);
    }
    let mut out = Tabletop::default();
    for (pi, p) in placements.iter().enumerate() {
        for pos in positions {
            for (ai, &yaw) in angles.iter().enumerate() {
                let world_pose = instance_pose(&p.rotmat, *pos, yaw, height);
                let tid = out.placements.len();
                for g in &by_placement[pi] {
                    let free = &free_grasps[g.freeairgrip_id];
                    out.grips.push(TabletopGrip {
                        id: out.grips.len(),
                        tabletopplacement_id: tid,
                        freeairgrip_id: g.freeairgrip_id,
                        hand_pose: &world_pose * &free.hand_pose,
                        jaw_width: g.jaw_width,
                        contacts: GripContacts::of_grasp(free).transformed(&world_pose),
                    });
                }
                out.placements.push(TabletopPlacement {
                    id: tid,
                    placement_id: p.id,
                    position: *pos,
                    angle_id: ai,
                    world_pose,
                });
            }
        }
    }
    out
}
