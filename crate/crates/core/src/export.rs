//! Text exports for inspection: PLY facet and sample clouds, OBJ hand glyphs
//! and posed object scenes. All writers are byte-deterministic.

use std::fmt::Write as _;

use crate::collision::Obb;
use crate::geometry::{Facet, SamplePoint, TriangleMesh};
use crate::graspplan::GripperModel;
use crate::Pose;

/// Every facet's triangles as separate faces tagged with `facet_id`;
/// overlapping facets repeat triangles.
pub fn facets_ply(mesh: &TriangleMesh, facets: &[Facet]) -> String {
    let faces: usize = facets.iter().map(|f| f.triangle_ids.len()).sum();
    let mut s = String::new();
    writeln!(s, "ply\nformat ascii 1.0").unwrap();
    writeln!(s, "element vertex {}\nproperty double x\nproperty double y\nproperty double z", mesh.vertices.len()).unwrap();
    writeln!(s, "element face {faces}\nproperty list uchar int vertex_indices\nproperty int facet_id\nend_header").unwrap();
    for v in &mesh.vertices {
        writeln!(s, "{} {} {}", v.x, v.y, v.z).unwrap();
    }
    for (fi, f) in facets.iter().enumerate() {
        for &t in &f.triangle_ids {
            let [a, b, c] = mesh.triangles[t];
            writeln!(s, "3 {a} {b} {c} {fi}").unwrap();
        }
    }
    s
}

/// One vertex per (sample, facet) membership.
pub fn samples_ply(samples: &[SamplePoint]) -> String {
    let n: usize = samples.iter().map(|p| p.facet_ids.len().max(1)).sum();
    let mut s = String::new();
    writeln!(s, "ply\nformat ascii 1.0\nelement vertex {n}").unwrap();
    for p in ["x", "y", "z", "nx", "ny", "nz"] {
        writeln!(s, "property double {p}").unwrap();
    }
    writeln!(s, "property int triangle_id\nproperty int facet_id\nend_header").unwrap();
    for p in samples {
        let ids: Vec<i64> = if p.facet_ids.is_empty() {
            vec![-1]
        } else {
            p.facet_ids.iter().map(|&f| f as i64).collect()
        };
        for f in ids {
            writeln!(
                s,
                "{} {} {} {} {} {} {} {}",
                p.position.x, p.position.y, p.position.z, p.normal.x, p.normal.y, p.normal.z, p.triangle_id, f
            )
            .unwrap();
        }
    }
    s
}

struct ObjWriter {
    s: String,
    next: usize,
}

impl ObjWriter {
    fn new() -> Self {
        Self { s: String::new(), next: 1 }
    }

    fn object(&mut self, name: &str) {
        writeln!(self.s, "o {name}").unwrap();
    }

    fn mesh(&mut self, mesh: &TriangleMesh, pose: &Pose) {
        for v in &mesh.vertices {
            let p = pose.transform_point(v);
            writeln!(self.s, "v {} {} {}", p.x, p.y, p.z).unwrap();
        }
        for t in &mesh.triangles {
            writeln!(self.s, "f {} {} {}", t[0] + self.next, t[1] + self.next, t[2] + self.next).unwrap();
        }
        self.next += mesh.vertices.len();
    }

    fn obb(&mut self, b: &Obb) {
        let c = b.corners();
        for p in &c {
            writeln!(self.s, "v {} {} {}", p.x, p.y, p.z).unwrap();
        }
        // corner index bits: x, y, z
        const QUADS: [[usize; 4]; 6] =
            [[0, 4, 6, 2], [1, 3, 7, 5], [0, 1, 5, 4], [2, 6, 7, 3], [0, 2, 3, 1], [4, 5, 7, 6]];
        for q in QUADS {
            let [a, b2, c2, d] = q.map(|i| i + self.next);
            writeln!(self.s, "f {a} {b2} {c2} {d}").unwrap();
        }
        self.next += 8;
    }
}

/// One `o grip<i>` object of three boxes (palm, two fingers) per hand pose.
pub fn hand_glyphs_obj(gripper: &GripperModel, grips: &[(i64, Pose, f64)]) -> String {
    let mut w = ObjWriter::new();
    for (id, pose, jaw) in grips {
        w.object(&format!("grip{id}"));
        for b in gripper.hand_boxes(pose, jaw + gripper.jaw_clearance) {
            w.obb(&b);
        }
    }
    w.s
}

/// The object at `pose`, optionally followed by hand glyphs.
pub fn posed_scene_obj(mesh: &TriangleMesh, pose: &Pose, gripper: &GripperModel, grips: &[(i64, Pose, f64)]) -> String {
    let mut w = ObjWriter::new();
    w.object("object");
    w.mesh(mesh, pose);
    for (id, hand, jaw) in grips {
        w.object(&format!("grip{id}"));
        for b in gripper.hand_boxes(hand, jaw + gripper.jaw_clearance) {
            w.obb(&b);
        }
    }
    w.s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{oversegment, primitives};
    use nalgebra::Vector3;

    #[test]
    fn box_quads_face_outward() {
        let g = GripperModel::unit_test_gripper();
        let b = g.hand_boxes(&Pose::identity(), 0.5)[0].clone();
        let c = b.corners();
        const QUADS: [[usize; 4]; 6] =
            [[0, 4, 6, 2], [1, 3, 7, 5], [0, 1, 5, 4], [2, 6, 7, 3], [0, 2, 3, 1], [4, 5, 7, 6]];
        for q in QUADS {
            let n = (c[q[1]] - c[q[0]]).cross(&(c[q[2]] - c[q[0]]));
            let mid = (c[q[0]].coords + c[q[2]].coords) * 0.5;
            assert!(n.dot(&(mid - b.center.coords)) > 0.0);
        }
    }

    #[test]
    fn glyph_count_and_determinism() {
        let g = GripperModel::unit_test_gripper();
        let grips: Vec<(i64, Pose, f64)> =
            (0..5).map(|i| (i, Pose::from_translation(Vector3::x() * i as f64), 0.3)).collect();
        let a = hand_glyphs_obj(&g, &grips);
        assert_eq!(a.lines().filter(|l| l.starts_with("o ")).count(), 5);
        assert_eq!(a.lines().filter(|l| l.starts_with("f ")).count(), 5 * 18);
        assert_eq!(a, hand_glyphs_obj(&g, &grips));
    }

    #[test]
    fn facet_ply_counts() {
        let m = primitives::cube(1.0);
        let f = oversegment(&m, 0.1);
        let s = facets_ply(&m, &f);
        assert!(s.contains("element face 12"));
        assert_eq!(s.lines().count(), 10 + 8 + 12);
    }
}
