use nalgebra::{Matrix3, Point3, Rotation3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::geometry::{angle_between, convex_hull, GeometryError, TriangleMesh};
use crate::Pose;

/// Hull faces whose normals agree within this angle form one support face.
pub const COPLANAR_FACE_TOLERANCE: f64 = 1e-4;

pub const DEFAULT_STABILITY_THRESHOLD: f64 = 0.15;

/// A statically stable resting pose on the plane `z = 0`, with the center of
/// mass above the origin and the support polygon's principal axis along `+x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub id: usize,
    pub rotmat: Pose,
    /// Support polygon in table coordinates, counter-clockwise.
    pub support_polygon: Vec<[f64; 2]>,
    /// Distance from the com projection to the polygon boundary divided by
    /// the com height.
    pub stability: f64,
    pub com_height: f64,
    /// Outward normal of the support face, object frame.
    pub support_normal: Vector3<f64>,
}

/// Andrew's monotone chain; returns a counter-clockwise polygon without
/// collinear points.
pub fn convex_hull_2d(points: &[Vector2<f64>]) -> Vec<Vector2<f64>> {
    let mut p: Vec<Vector2<f64>> = points.to_vec();
    p.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let cross = |o: &Vector2<f64>, a: &Vector2<f64>, b: &Vector2<f64>| {
        (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
    };
    let mut lower: Vec<Vector2<f64>> = Vec::new();
    for q in &p {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], q) <= 0.0 {
            lower.pop();
        }
        lower.push(*q);
    }
    let mut upper: Vec<Vector2<f64>> = Vec::new();
    for q in p.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], q) <= 0.0 {
            upper.pop();
        }
        upper.push(*q);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Signed distance from `p` to the boundary of a counter-clockwise convex
/// polygon; positive inside.
pub fn inside_margin(poly: &[Vector2<f64>], p: &Vector2<f64>) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let e = b - a;
        let n = Vector2::new(-e.y, e.x) / e.norm();
        m = m.min(n.dot(&(p - a)));
    }
    m
}

/// Rotation taking `n` onto `-z`.
fn face_down(n: &Vector3<f64>) -> Matrix3<f64> {
    let down = -Vector3::z();
    match Rotation3::rotation_between(n, &down) {
        Some(r) if angle_between(n, &down) < std::f64::consts::PI - 1e-9 => *r.matrix(),
        _ => *Rotation3::from_axis_angle(&Vector3::x_axis(), std::f64::consts::PI).matrix(),
    }
}

/// Direction of largest second moment of a polygon area, or the longest edge
/// when the moments are isotropic. Normalized to point into `x > 0` (or `+y`).
pub fn principal_axis(poly: &[Vector2<f64>]) -> Vector2<f64> {
    let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    let o = poly[0];
    for i in 1..poly.len() - 1 {
        let (p, q, r) = (poly[0] - o, poly[i] - o, poly[i + 1] - o);
        let ta = 0.5 * ((q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x));
        a += ta;
        cx += ta * (p.x + q.x + r.x) / 3.0;
        cy += ta * (p.y + q.y + r.y) / 3.0;
        // second moments about the origin of a triangle with a vertex at the origin
        let f = ta / 6.0;
        sxx += f * (q.x * q.x + q.x * r.x + r.x * r.x);
        syy += f * (q.y * q.y + q.y * r.y + r.y * r.y);
        sxy += f * (2.0 * q.x * q.y + q.x * r.y + r.x * q.y + 2.0 * r.x * r.y) * 0.5;
    }
    cx /= a;
    cy /= a;
    let ixx = sxx - a * cx * cx;
    let iyy = syy - a * cy * cy;
    let ixy = sxy - a * cx * cy;
    let scale = ixx.abs() + iyy.abs();
    let mut d = if (ixx - iyy).abs() <= 1e-9 * scale && ixy.abs() <= 1e-9 * scale {
        let mut best = poly[1] - poly[0];
        for i in 1..poly.len() {
            let e = poly[(i + 1) % poly.len()] - poly[i];
            if e.norm() > best.norm() * (1.0 + 1e-9) {
                best = e;
            }
        }
        best.normalize()
    } else {
        let th = 0.5 * (2.0 * ixy).atan2(ixx - iyy);
        Vector2::new(th.cos(), th.sin())
    };
    if d.x < -1e-12 || (d.x.abs() <= 1e-12 && d.y < 0.0) {
        d = -d;
    }
    d
}

/// One candidate per group of coplanar hull faces; kept when the com
/// projects strictly inside the face polygon and the stability ratio exceeds
/// `stability_threshold`.
pub fn stable_placements(
    mesh: &TriangleMesh,
    stability_threshold: f64,
) -> Result<Vec<Placement>, GeometryError> {
    let hull = convex_hull(&mesh.vertices)?;
    let mut groups: Vec<(Vector3<f64>, Vec<usize>)> = Vec::new();
    for fi in 0..hull.faces.len() {
        let n = hull.face_normal(fi);
        match groups
            .iter_mut()
            .find(|(gn, _)| angle_between(gn, &n) <= COPLANAR_FACE_TOLERANCE)
        {
            Some(g) => g.1.push(fi),
            None => groups.push((n, vec![fi])),
        }
    }
    let com = mesh.com;
    let mut out = Vec::new();
    for (n, faces) in groups {
        let r1 = face_down(&n);
        let mut verts: Vec<usize> = faces.iter().flat_map(|&f| hull.faces[f]).collect();
        verts.sort_unstable();
        verts.dedup();
        let rc = r1 * com.coords;
        let pts: Vec<Vector2<f64>> = verts
            .iter()
            .map(|&v| {
                let q = r1 * hull.points[v].coords;
                Vector2::new(q.x - rc.x, q.y - rc.y)
            })
            .collect();
        let poly = convex_hull_2d(&pts);
        if poly.len() < 3 {
            continue;
        }
        let height = rc.z - (r1 * hull.points[verts[0]].coords).z;
        let margin = inside_margin(&poly, &Vector2::zeros());
        if !(margin > 0.0) || !(height > 0.0) {
            continue;
        }
        let stability = margin / height;
        if !(stability > stability_threshold) {
            continue;
        }
        let axis = principal_axis(&poly);
        let yaw = axis.y.atan2(axis.x);
        let r = Pose::rot_z(-yaw).rot * r1;
        let rotated_com = r * com.coords;
        let min_z = mesh
            .vertices
            .iter()
            .map(|v| (r * v.coords).z)
            .fold(f64::INFINITY, f64::min);
        let rotmat = Pose::new(r, Vector3::new(-rotated_com.x, -rotated_com.y, -min_z));
        let (s, c) = (-yaw).sin_cos();
        let support_polygon = poly
            .iter()
            .map(|p| [c * p.x - s * p.y, s * p.x + c * p.y])
            .collect();
        out.push(Placement {
            id: out.len(),
            rotmat,
            support_polygon,
            stability,
            com_height: height,
            support_normal: n,
        });
    }
    Ok(out)
}

impl Placement {
    pub fn polygon(&self) -> Vec<Vector2<f64>> {
        self.support_polygon.iter().map(|p| Vector2::new(p[0], p[1])).collect()
    }

    /// World position of the center of mass when placed at `rotmat`.
    pub fn placed_com(&self, mesh: &TriangleMesh) -> Point3<f64> {
        self.rotmat.transform_point(&mesh.com)
    }
}
