//! Two-level hand/object collision filtering.
//!
//! Level 1 checks the volumes swept by the finger pads while the jaw closes.
//! Those volumes are bounded by cylinders around the closing axis, which do not
//! depend on the hand's rotation about that axis, so one check covers every
//! rotation. Level 2 places the full hand model at each sampled rotation.

use nalgebra::{Matrix3, Point3, Vector3};
use serde::{Deserialize, Serialize};

use super::{ContactPair, GripperModel};
use crate::collision::{point_triangle_distance, Aabb, Cylinder, MeshBounds};
use crate::geometry::{angle_between, TriangleMesh};
use crate::Pose;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraspConfig {
    pub id: usize,
    pub contacts: ContactPair,
    /// Hand frame in object coordinates.
    pub hand_pose: Pose,
    pub jaw_width: f64,
    pub rotation_index: usize,
}

/// Ratio between the level-1 exemption radius and the pad circumradius.
pub const CONTACT_EXCLUSION_FACTOR: f64 = 1.5;

/// Sweep cylinder of each finger pad: from the contact plane out to where the
/// pad starts when the jaw is fully open.
pub fn sweep_cylinders(pair: &ContactPair, gripper: &GripperModel) -> [Cylinder; 2] {
    let u = pair.axis();
    let length = 0.5 * (gripper.max_jaw_width - pair.width).max(0.0);
    let radius = gripper.pad_sweep_cylinder_radius;
    [
        Cylinder { base: pair.p0, dir: -u, length, radius },
        Cylinder { base: pair.p1, dir: u, length, radius },
    ]
}

/// Triangles the pad necessarily rests on: close to the contact and facing
/// the finger within the friction cone.
fn exempt(
    mesh: &TriangleMesh,
    tri: usize,
    contact: &Point3<f64>,
    inward: &Vector3<f64>,
    gripper: &GripperModel,
) -> bool {
    let radius = CONTACT_EXCLUSION_FACTOR * gripper.pad_circumradius();
    angle_between(&mesh.face_normals[tri], &-inward) <= gripper.friction_half_angle
        && point_triangle_distance(contact, &mesh.triangle(tri)) <= radius
}

/// True when both pad sweep cylinders are free of non-contact triangles.
pub fn collision_level1(pair: &ContactPair, gripper: &GripperModel, mesh: &TriangleMesh) -> bool {
    let cyls = sweep_cylinders(pair, gripper);
    let contacts = [(pair.p0, pair.n0), (pair.p1, pair.n1)];
    for (k, cyl) in cyls.iter().enumerate() {
        let bb = cyl.aabb();
        for i in 0..mesh.triangle_count() {
            let tri = mesh.triangle(i);
            if !Aabb::of_triangle(&tri).overlaps(&bb) {
                continue;
            }
            if !cyl.hits_triangle(&tri) {
                continue;
            }
            let (c, n) = &contacts[k];
            if exempt(mesh, i, c, n, gripper) {
                continue;
            }
            return false;
        }
    }
    true
}

/// Hand frame for rotation `k` of `n` about the closing axis.
pub fn hand_pose(pair: &ContactPair, k: usize, n: usize) -> Pose {
    let z = pair.axis();
    // reference approach: the coordinate axis least aligned with z, projected
    let mut best = 0;
    for i in 1..3 {
        if z[i].abs() < z[best].abs() {
            best = i;
        }
    }
    let mut e = Vector3::zeros();
    e[best] = 1.0;
    let x0 = (e - z * z.dot(&e)).normalize();
    let y0 = z.cross(&x0);
    let theta = std::f64::consts::TAU * k as f64 / n as f64;
    let (s, c) = theta.sin_cos();
    let x = x0 * c + y0 * s;
    let y = z.cross(&x);
    Pose::new(Matrix3::from_columns(&[x, y, z]), pair.center.coords)
}

/// Full-hand check at each sampled rotation; returns the collision-free ones
/// with ids left at zero.
pub fn collision_level2(
    pair: &ContactPair,
    rotation_samples: usize,
    gripper: &GripperModel,
    mesh: &TriangleMesh,
    bounds: &MeshBounds,
) -> Vec<GraspConfig> {
    let jaw = pair.width + gripper.jaw_clearance;
    (0..rotation_samples)
        .filter_map(|k| {
            let pose = hand_pose(pair, k, rotation_samples);
            let boxes = gripper.hand_boxes(&pose, jaw);
            if boxes.iter().any(|b| bounds.obb_hits_mesh(mesh, b)) {
                return None;
            }
            Some(GraspConfig {
                id: 0,
                contacts: pair.clone(),
                hand_pose: pose,
                jaw_width: pair.width,
                rotation_index: k,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x_pair(p0: Point3<f64>, width: f64) -> ContactPair {
        let p1 = p0 + Vector3::x() * width;
        ContactPair {
            p0,
            p1,
            n0: Vector3::x(),
            n1: -Vector3::x(),
            facet0: 0,
            facet1: 1,
            tri0: 0,
            tri1: 0,
            width,
            center: Point3::from((p0.coords + p1.coords) * 0.5),
        }
    }

    #[test]
    fn level1_agrees_with_sampled_surface() {
        use crate::geometry::{oversegment, primitives, sample_surface};
        use crate::graspplan::{plan_free_grasps, GraspParams};

        let g = GripperModel::unit_test_gripper();
        let params = GraspParams {
            density: 2000.0,
            d_min: Some(0.08),
            d_max: Some(0.45),
            merge_radius: Some(0.08),
            ..GraspParams::default()
        };
        let mut rejected = 0;
        for m in [primitives::l_bracket(1.0, 0.8, 0.4, 0.6), primitives::slotted_block(1.0, 0.3, 0.2, 1.0, 0.6)] {
            let plan = plan_free_grasps(&m, &g, &params, 3);
            let facets = oversegment(&m, 0.2);
            let density = 10_000.0 / m.total_area;
            let pts = sample_surface(&m, density, 10_000, &facets, 9);
            assert!(pts.len() >= 9_000);
            for pair in &plan.pairs {
                let cyls = sweep_cylinders(pair, &g);
                let contacts = [(pair.p0, pair.n0), (pair.p1, pair.n1)];
                let sampled_hit = pts.iter().any(|s| {
                    (0..2).any(|k| cyls[k].contains(&s.position) && !exempt(&m, s.triangle_id, &contacts[k].0, &contacts[k].1, &g))
                });
                let free = collision_level1(pair, &g, &m);
                if sampled_hit {
                    assert!(!free);
                }
                if !free {
                    rejected += 1;
                }
            }
        }
        assert!(rejected > 0);
    }

    #[test]
    fn hand_pose_is_orthonormal_and_aligned() {
        let pair = x_pair(Point3::new(-0.5, 0.1, 0.2), 1.0);
        for k in 0..8 {
            let p = hand_pose(&pair, k, 8);
            assert!(p.orthonormality_error() < 1e-12);
            assert!((p.axis(2) - pair.axis()).norm() < 1e-12);
            assert!((p.rot.determinant() - 1.0).abs() < 1e-12);
        }
        // distinct rotations
        let a = hand_pose(&pair, 0, 4).axis(0);
        let b = hand_pose(&pair, 1, 4).axis(0);
        assert!(a.dot(&b).abs() < 1e-12);
    }
}
