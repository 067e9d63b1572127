//! Incremental 3D convex hull on exact orientation predicates.

use std::collections::HashMap;

use nalgebra::{Point3, Vector3};
use robust::{orient3d, Coord3D};

use super::GeometryError;

#[derive(Clone, Debug)]
pub struct ConvexHull {
    /// Copy of the input points; faces index into this list.
    pub points: Vec<Point3<f64>>,
    /// Outward-oriented (counter-clockwise seen from outside) triangles.
    pub faces: Vec<[usize; 3]>,
}

fn c(p: &Point3<f64>) -> Coord3D<f64> {
    Coord3D {
        x: p.x,
        y: p.y,
        z: p.z,
    }
}

/// Positive when `d` lies on the inner side of outward face `(a, b, c)`.
fn side(pts: &[Point3<f64>], f: &[usize; 3], d: &Point3<f64>) -> f64 {
    orient3d(c(&pts[f[0]]), c(&pts[f[1]]), c(&pts[f[2]]), c(d))
}

pub fn convex_hull(points: &[Point3<f64>]) -> Result<ConvexHull, GeometryError> {
    let degenerate = || GeometryError::DegenerateHull;
    if points.len() < 4 {
        return Err(degenerate());
    }
    let pts = points.to_vec();
    let i0 = 0;
    let i1 = (0..pts.len())
        .max_by(|&a, &b| (pts[a] - pts[i0]).norm().total_cmp(&(pts[b] - pts[i0]).norm()))
        .unwrap();
    if (pts[i1] - pts[i0]).norm() == 0.0 {
        return Err(degenerate());
    }
    let dir = (pts[i1] - pts[i0]).normalize();
    let line_dist = |p: &Point3<f64>| {
        let v = p - pts[i0];
        (v - dir * v.dot(&dir)).norm()
    };
    let i2 = (0..pts.len())
        .max_by(|&a, &b| line_dist(&pts[a]).total_cmp(&line_dist(&pts[b])))
        .unwrap();
    if line_dist(&pts[i2]) == 0.0 {
        return Err(degenerate());
    }
    let i3 = (0..pts.len())
        .max_by(|&a, &b| {
            side(&pts, &[i0, i1, i2], &pts[a])
                .abs()
                .total_cmp(&side(&pts, &[i0, i1, i2], &pts[b]).abs())
        })
        .unwrap();
    let o = side(&pts, &[i0, i1, i2], &pts[i3]);
    if o == 0.0 {
        return Err(degenerate());
    }
    // orient so the fourth point is inside every face
    let (a, b) = if o > 0.0 { (i1, i2) } else { (i2, i1) };
    let mut faces: Vec<Option<[usize; 3]>> = vec![
        Some([i0, a, b]),
        Some([i0, i3, a]),
        Some([a, i3, b]),
        Some([b, i3, i0]),
    ];
    let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
    for (fi, f) in faces.iter().enumerate() {
        let f = f.unwrap();
        for k in 0..3 {
            edges.insert((f[k], f[(k + 1) % 3]), fi);
        }
    }

    let mut visible = Vec::new();
    for (pi, p) in pts.iter().enumerate() {
        if pi == i0 || pi == i1 || pi == i2 || pi == i3 {
            continue;
        }
        visible.clear();
        for (fi, f) in faces.iter().enumerate() {
            if let Some(f) = f {
                if side(&pts, f, p) < 0.0 {
                    visible.push(fi);
                }
            }
        }
        if visible.is_empty() {
            continue;
        }
        let mut is_vis = HashMap::with_capacity(visible.len());
        for &fi in &visible {
            is_vis.insert(fi, ());
        }
        let mut horizon = Vec::new();
        for &fi in &visible {
            let f = faces[fi].unwrap();
            for k in 0..3 {
                let (u, v) = (f[k], f[(k + 1) % 3]);
                let twin = edges[&(v, u)];
                if !is_vis.contains_key(&twin) {
                    horizon.push((u, v));
                }
            }
        }
        for &fi in &visible {
            let f = faces[fi].take().unwrap();
            for k in 0..3 {
                edges.remove(&(f[k], f[(k + 1) % 3]));
            }
        }
        for (u, v) in horizon {
            let nf = [u, v, pi];
            let idx = faces.len();
            faces.push(Some(nf));
            for k in 0..3 {
                edges.insert((nf[k], nf[(k + 1) % 3]), idx);
            }
        }
    }
    Ok(ConvexHull {
        points: pts,
        faces: faces.into_iter().flatten().collect(),
    })
}

impl ConvexHull {
    pub fn face_normal(&self, i: usize) -> Vector3<f64> {
        let f = self.faces[i];
        let (a, b, c) = (self.points[f[0]], self.points[f[1]], self.points[f[2]]);
        (b - a).cross(&(c - a)).normalize()
    }

    pub fn volume(&self) -> f64 {
        let r = self.points[self.faces[0][0]].coords;
        self.faces
            .iter()
            .map(|f| {
                let a = self.points[f[0]].coords - r;
                let b = self.points[f[1]].coords - r;
                let c = self.points[f[2]].coords - r;
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum()
    }

    /// Indices of points that are hull vertices, ascending.
    pub fn vertex_ids(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.faces.iter().flatten().copied().collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Signed distance of `p` above the plane of face `i` (positive outside).
    pub fn face_distance(&self, i: usize, p: &Point3<f64>) -> f64 {
        let n = self.face_normal(i);
        n.dot(&(p - self.points[self.faces[i][0]]))
    }

    pub fn contains(&self, p: &Point3<f64>, tol: f64) -> bool {
        (0..self.faces.len()).all(|i| self.face_distance(i, p) <= tol)
    }
}
