//! Narrow-phase tests between mesh triangles and the hand primitives.

use nalgebra::{Matrix3, Point3, Vector3};

use crate::geometry::TriangleMesh;
use crate::Pose;

pub type Triangle = [Point3<f64>; 3];

/// Oriented box. `axes` holds the box axes as columns.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Obb {
    pub center: Point3<f64>,
    pub axes: Matrix3<f64>,
    pub half: Vector3<f64>,
}

impl Obb {
    /// Box with the given half extents, placed at `local` in `frame`.
    pub fn new(frame: &Pose, local_center: Vector3<f64>, half: Vector3<f64>) -> Self {
        Self {
            center: Point3::from(frame.rot * local_center + frame.trans),
            axes: frame.rot,
            half,
        }
    }

    pub fn corners(&self) -> [Point3<f64>; 8] {
        let mut out = [Point3::origin(); 8];
        for (i, o) in out.iter_mut().enumerate() {
            let s = Vector3::new(
                if i & 1 == 0 { -1.0 } else { 1.0 },
                if i & 2 == 0 { -1.0 } else { 1.0 },
                if i & 4 == 0 { -1.0 } else { 1.0 },
            );
            *o = self.center + self.axes * s.component_mul(&self.half);
        }
        out
    }

    pub fn contains(&self, p: &Point3<f64>) -> bool {
        let l = self.axes.transpose() * (p - self.center);
        (0..3).all(|i| l[i].abs() <= self.half[i])
    }

    pub fn aabb(&self) -> Aabb {
        let ext = self.axes.abs() * self.half;
        Aabb {
            min: self.center - ext,
            max: self.center + ext,
        }
    }

    pub fn min_z(&self) -> f64 {
        self.center.z - (self.axes.row(2).abs() * self.half)[0]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub min: Point3<f64>,
    pub max: Point3<f64>,
}

impl Aabb {
    pub fn of_triangle(t: &Triangle) -> Self {
        Self {
            min: t[0].inf(&t[1]).inf(&t[2]),
            max: t[0].sup(&t[1]).sup(&t[2]),
        }
    }

    pub fn overlaps(&self, o: &Aabb) -> bool {
        (0..3).all(|i| self.min[i] <= o.max[i] && o.min[i] <= self.max[i])
    }

    pub fn inflated(&self, r: f64) -> Self {
        let d = Vector3::repeat(r);
        Self {
            min: self.min - d,
            max: self.max + d,
        }
    }
}

/// Separating-axis test between a triangle and an oriented box. Touching
/// counts as intersecting.
pub fn triangle_obb_intersect(tri: &Triangle, obb: &Obb) -> bool {
    let rt = obb.axes.transpose();
    let v = [
        rt * (tri[0] - obb.center),
        rt * (tri[1] - obb.center),
        rt * (tri[2] - obb.center),
    ];
    let h = obb.half;
    // box face normals
    for i in 0..3 {
        let lo = v[0][i].min(v[1][i]).min(v[2][i]);
        let hi = v[0][i].max(v[1][i]).max(v[2][i]);
        if lo > h[i] || hi < -h[i] {
            return false;
        }
    }
    let e = [v[1] - v[0], v[2] - v[1], v[0] - v[2]];
    // triangle normal
    let n = e[0].cross(&e[1]);
    let r = h.x * n.x.abs() + h.y * n.y.abs() + h.z * n.z.abs();
    if n.dot(&v[0]).abs() > r {
        return false;
    }
    // edge cross products
    for ed in &e {
        for i in 0..3 {
            let mut unit = Vector3::zeros();
            unit[i] = 1.0;
            let a = unit.cross(ed);
            if a.norm_squared() < 1e-30 {
                continue;
            }
            let p0 = a.dot(&v[0]);
            let p1 = a.dot(&v[1]);
            let p2 = a.dot(&v[2]);
            let r = h.x * a.x.abs() + h.y * a.y.abs() + h.z * a.z.abs();
            if p0.min(p1).min(p2) > r || p0.max(p1).max(p2) < -r {
                return false;
            }
        }
    }
    true
}

/// Möller-Trumbore. Returns the ray parameter of the hit, two-sided.
pub fn ray_triangle(origin: &Point3<f64>, dir: &Vector3<f64>, tri: &Triangle) -> Option<f64> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let p = dir.cross(&e2);
    let det = e1.dot(&p);
    if det.abs() < 1e-15 * e1.norm() * e2.norm() * dir.norm() {
        return None;
    }
    let inv = 1.0 / det;
    let s = origin - tri[0];
    let u = s.dot(&p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = dir.dot(&q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    Some(e2.dot(&q) * inv)
}

/// Closest point on a triangle (Ericson, Real-Time Collision Detection 5.1.5).
pub fn closest_point_on_triangle(p: &Point3<f64>, t: &Triangle) -> Point3<f64> {
    let (a, b, c) = (t[0], t[1], t[2]);
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

pub fn point_triangle_distance(p: &Point3<f64>, t: &Triangle) -> f64 {
    (p - closest_point_on_triangle(p, t)).norm()
}

pub fn segment_segment_distance(
    p1: &Point3<f64>,
    q1: &Point3<f64>,
    p2: &Point3<f64>,
    q2: &Point3<f64>,
) -> f64 {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(&r);
    let (s, t);
    if a <= 1e-30 && e <= 1e-30 {
        return r.norm();
    }
    if a <= 1e-30 {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= 1e-30 {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > 0.0 {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let mut t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t0 = 0.0;
                s0 = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t0 = 1.0;
                s0 = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s0;
            t = t0;
        }
    }
    ((p1 + d1 * s) - (p2 + d2 * t)).norm()
}

/// Shortest distance between segment `pq` and a triangle.
pub fn segment_triangle_distance(p: &Point3<f64>, q: &Point3<f64>, t: &Triangle) -> f64 {
    let d = q - p;
    let len = d.norm();
    if len > 0.0 {
        if let Some(s) = ray_triangle(p, &d, t) {
            if (0.0..=1.0).contains(&s) {
                return 0.0;
            }
        }
    }
    let mut best = point_triangle_distance(p, t).min(point_triangle_distance(q, t));
    for k in 0..3 {
        best = best.min(segment_segment_distance(p, q, &t[k], &t[(k + 1) % 3]));
    }
    best
}

/// Solid finite cylinder: points whose projection on the axis through `base`
/// along unit `dir` lies in `[0, length]` and whose distance to that axis is at
/// most `radius`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cylinder {
    pub base: Point3<f64>,
    pub dir: Vector3<f64>,
    pub length: f64,
    pub radius: f64,
}

impl Cylinder {
    pub fn contains(&self, p: &Point3<f64>) -> bool {
        let v = p - self.base;
        let t = v.dot(&self.dir);
        (0.0..=self.length).contains(&t) && (v - self.dir * t).norm() <= self.radius
    }

    pub fn aabb(&self) -> Aabb {
        let a = self.base;
        let b = self.base + self.dir * self.length;
        Aabb { min: a.inf(&b), max: a.sup(&b) }.inflated(self.radius)
    }

    /// Exact intersection: clip the triangle to the slab between the end caps,
    /// then measure the clipped polygon's distance to the axis in the plane
    /// orthogonal to it.
    pub fn hits_triangle(&self, tri: &Triangle) -> bool {
        let mut poly: Vec<(f64, Point3<f64>)> =
            tri.iter().map(|p| ((p - self.base).dot(&self.dir), *p)).collect();
        poly = clip(&poly, |t| t);
        poly = clip(&poly, |t| self.length - t);
        if poly.is_empty() {
            return false;
        }
        let (e0, e1) = orthonormal_pair(&self.dir);
        let pts: Vec<[f64; 2]> = poly
            .iter()
            .map(|(_, p)| {
                let v = p - self.base;
                [v.dot(&e0), v.dot(&e1)]
            })
            .collect();
        origin_polygon_distance(&pts) <= self.radius
    }
}

// Sutherland-Hodgman against the half space `f(t) >= 0`.
fn clip(poly: &[(f64, Point3<f64>)], f: impl Fn(f64) -> f64) -> Vec<(f64, Point3<f64>)> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let (fa, fb) = (f(a.0), f(b.0));
        if fa >= 0.0 {
            out.push(a);
        }
        if (fa >= 0.0) != (fb >= 0.0) {
            let s = fa / (fa - fb);
            let p = a.1 + (b.1 - a.1) * s;
            out.push((a.0 + (b.0 - a.0) * s, p));
        }
    }
    out
}

fn orthonormal_pair(d: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let e = if d.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let a = d.cross(&e).normalize();
    (a, d.cross(&a))
}

/// Distance from the 2D origin to a convex polygon given in order (possibly
/// degenerate).
fn origin_polygon_distance(pts: &[[f64; 2]]) -> f64 {
    let n = pts.len();
    if n >= 3 {
        let mut pos = false;
        let mut neg = false;
        for i in 0..n {
            let [ax, ay] = pts[i];
            let [bx, by] = pts[(i + 1) % n];
            let c = ax * by - ay * bx;
            pos |= c > 0.0;
            neg |= c < 0.0;
        }
        if pos != neg {
            return 0.0;
        }
    }
    let mut best = f64::INFINITY;
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        let d = [b[0] - a[0], b[1] - a[1]];
        let l2 = d[0] * d[0] + d[1] * d[1];
        let s = if l2 > 0.0 { (-(a[0] * d[0] + a[1] * d[1]) / l2).clamp(0.0, 1.0) } else { 0.0 };
        best = best.min((a[0] + d[0] * s).hypot(a[1] + d[1] * s));
    }
    best
}

/// Per-triangle bounding boxes, used as a cheap broad phase.
#[derive(Clone, Debug)]
pub struct MeshBounds {
    pub boxes: Vec<Aabb>,
}

impl MeshBounds {
    pub fn new(mesh: &TriangleMesh) -> Self {
        Self {
            boxes: (0..mesh.triangle_count())
                .map(|i| Aabb::of_triangle(&mesh.triangle(i)))
                .collect(),
        }
    }

    pub fn obb_hits_mesh(&self, mesh: &TriangleMesh, obb: &Obb) -> bool {
        let bb = obb.aabb();
        self.boxes
            .iter()
            .enumerate()
            .any(|(i, b)| b.overlaps(&bb) && triangle_obb_intersect(&mesh.triangle(i), obb))
    }
}
