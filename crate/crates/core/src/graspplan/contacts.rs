use std::collections::HashSet;

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use super::GripperModel;
use crate::collision::ray_triangle;
use crate::geometry::{angle_between, triangle_facets, Facet, SamplePoint, TriangleMesh};

/// Two antipodal contacts. Normals point into the object, i.e. along the
/// force each finger applies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactPair {
    pub p0: Point3<f64>,
    pub p1: Point3<f64>,
    pub n0: Vector3<f64>,
    pub n1: Vector3<f64>,
    pub facet0: usize,
    pub facet1: usize,
    pub tri0: usize,
    pub tri1: usize,
    pub width: f64,
    pub center: Point3<f64>,
}

impl ContactPair {
    /// Unit vector from `p0` to `p1` (the jaw-closing axis).
    pub fn axis(&self) -> Vector3<f64> {
        (self.p1 - self.p0) / self.width
    }

    pub fn lever(&self, com: &Point3<f64>) -> f64 {
        (com - self.center).norm()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ContactParams {
    pub antipodal_tolerance: f64,
    /// Minimum distance from the projected contact to the target facet's
    /// boundary ("inner region").
    pub inner_margin: f64,
}

/// Nearest ray hit against the mesh, skipping the host triangle.
pub fn cast_inward(
    mesh: &TriangleMesh,
    origin: &Point3<f64>,
    dir: &Vector3<f64>,
    host: usize,
) -> Option<(usize, f64)> {
    let eps = 1e-9 * mesh.bounding_radius().max(1e-9);
    let mut best: Option<(usize, f64)> = None;
    for i in 0..mesh.triangle_count() {
        if i == host {
            continue;
        }
        if let Some(t) = ray_triangle(origin, dir, &mesh.triangle(i)) {
            if t > eps && best.map_or(true, |(_, b)| t < b) {
                best = Some((i, t));
            }
        }
    }
    best
}

/// Projects every filtered sample of each facet through the object along its
/// inverse normal. The first surface hit yields a contact pair when it lies in
/// the inner region of a roughly antiparallel facet, the normals are
/// antipodal within tolerance, the far normal is inside the friction cone and
/// the gap fits the jaw.
///
/// `filtered[f]` holds the samples retained for facet `f`.
pub fn find_contact_pairs(
    mesh: &TriangleMesh,
    facets: &[Facet],
    filtered: &[Vec<SamplePoint>],
    gripper: &GripperModel,
    params: &ContactParams,
) -> Vec<ContactPair> {
    let owners = triangle_facets(mesh.triangle_count(), facets);
    let mut seen: HashSet<[i64; 6]> = HashSet::new();
    let mut out = Vec::new();
    for (fa, samples) in filtered.iter().enumerate() {
        let na = facets[fa].normal;
        for s in samples {
            let dir = -s.normal;
            let Some((hit, t)) = cast_inward(mesh, &s.position, &dir, s.triangle_id) else {
                continue;
            };
            if t < gripper.min_jaw_width || t > gripper.max_jaw_width {
                continue;
            }
            let n1_out = mesh.face_normals[hit];
            if angle_between(&s.normal, &-n1_out) > params.antipodal_tolerance {
                continue;
            }
            // closing axis is `dir`; the far contact pushes along -dir
            if angle_between(&n1_out, &dir) > gripper.friction_half_angle {
                continue;
            }
            let p1 = s.position + dir * t;
            let target = owners[hit].iter().copied().find(|&fb| {
                fb != fa
                    && angle_between(&na, &-facets[fb].normal) <= params.antipodal_tolerance
                    && facets[fb].boundary_distance(mesh, &p1) >= params.inner_margin
            });
            let Some(fb) = target else { continue };
            if !seen.insert(pair_key(&s.position, &p1)) {
                continue;
            }
            out.push(ContactPair {
                p0: s.position,
                p1,
                n0: dir,
                n1: -n1_out,
                facet0: fa,
                facet1: fb,
                tri0: s.triangle_id,
                tri1: hit,
                width: t,
                center: Point3::from((s.position.coords + p1.coords) * 0.5),
            });
        }
    }
    out
}

/// Order-independent key of two endpoints on a 1e-6 m lattice.
fn pair_key(a: &Point3<f64>, b: &Point3<f64>) -> [i64; 6] {
    let q = |p: &Point3<f64>| {
        [
            (p.x * 1e6).round() as i64,
            (p.y * 1e6).round() as i64,
            (p.z * 1e6).round() as i64,
        ]
    };
    let (qa, qb) = (q(a), q(b));
    let (lo, hi) = if qa <= qb { (qa, qb) } else { (qb, qa) };
    [lo[0], lo[1], lo[2], hi[0], hi[1], hi[2]]
}

/// Keeps pairs whose center is within `max_lever` of the center of mass.
pub fn gravity_filter(pairs: Vec<ContactPair>, com: &Point3<f64>, max_lever: f64) -> Vec<ContactPair> {
    pairs.into_iter().filter(|p| p.lever(com) <= max_lever).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair_with_center(c: Point3<f64>) -> ContactPair {
        ContactPair {
            p0: c - Vector3::x() * 0.1,
            p1: c + Vector3::x() * 0.1,
            n0: Vector3::x(),
            n1: -Vector3::x(),
            facet0: 0,
            facet1: 1,
            tri0: 0,
            tri1: 1,
            width: 0.2,
            center: c,
        }
    }

    #[test]
    fn lever_threshold() {
        let com = Point3::new(0.0, 0.0, 0.0);
        let at_com = pair_with_center(com);
        assert_eq!(gravity_filter(vec![at_com.clone()], &com, 1e-9).len(), 1);
        let off = pair_with_center(Point3::new(0.0, 0.05, 0.0));
        assert!(gravity_filter(vec![off.clone()], &com, 0.04).is_empty());
        assert_eq!(gravity_filter(vec![off], &com, 0.05).len(), 1);
    }

    #[test]
    fn key_is_symmetric() {
        let a = Point3::new(0.1, 0.2, 0.3);
        let b = Point3::new(-0.1, 0.5, 0.0);
        assert_eq!(pair_key(&a, &b), pair_key(&b, &a));
    }
}
