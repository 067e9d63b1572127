use std::collections::HashMap;

use nalgebra::{Point3, Vector3};

use super::GeometryError;

/// Weld tolerance for coincident vertices, in meters.
pub const WELD_TOLERANCE: f64 = 1e-7;

/// Triangles with an area below this are dropped at load time.
const DEGENERATE_AREA: f64 = 1e-18;

/// Indexed triangle mesh with the derived quantities the planners need.
#[derive(Clone, Debug)]
pub struct TriangleMesh {
    pub vertices: Vec<Point3<f64>>,
    pub triangles: Vec<[usize; 3]>,
    pub face_normals: Vec<Vector3<f64>>,
    pub face_areas: Vec<f64>,
    /// Edge-adjacent triangles, sorted ascending.
    pub adjacency: Vec<Vec<usize>>,
    pub total_area: f64,
    /// Uniform-density center of mass. Falls back to the area centroid for
    /// open or flat meshes that enclose no volume.
    pub com: Point3<f64>,
    /// Signed enclosed volume (positive for outward-facing windings).
    pub volume: f64,
}

impl TriangleMesh {
    /// Welds vertices, drops degenerate triangles and fills in normals,
    /// adjacency, area and center of mass.
    pub fn new(
        vertices: Vec<Point3<f64>>,
        triangles: Vec<[usize; 3]>,
    ) -> Result<Self, GeometryError> {
        for (i, t) in triangles.iter().enumerate() {
            if t.iter().any(|&v| v >= vertices.len()) {
                return Err(GeometryError::InvalidInput(format!(
                    "triangle {i} references a missing vertex"
                )));
            }
        }
        let (vertices, remap) = weld(&vertices, WELD_TOLERANCE);
        let mut tris = Vec::with_capacity(triangles.len());
        for t in &triangles {
            let t = [remap[t[0]], remap[t[1]], remap[t[2]]];
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                continue;
            }
            let n = (vertices[t[1]] - vertices[t[0]]).cross(&(vertices[t[2]] - vertices[t[0]]));
            if 0.5 * n.norm() <= DEGENERATE_AREA {
                continue;
            }
            tris.push(t);
        }
        if tris.is_empty() {
            return Err(GeometryError::InvalidInput("mesh has no triangles".into()));
        }
        // drop vertices no longer referenced so welding is idempotent
        let mut used = vec![usize::MAX; vertices.len()];
        let mut compact = Vec::new();
        for t in tris.iter_mut() {
            for v in t.iter_mut() {
                if used[*v] == usize::MAX {
                    used[*v] = compact.len();
                    compact.push(vertices[*v]);
                }
                *v = used[*v];
            }
        }
        Ok(Self::from_clean(compact, tris))
    }

    fn from_clean(vertices: Vec<Point3<f64>>, triangles: Vec<[usize; 3]>) -> Self {
        let mut face_normals = Vec::with_capacity(triangles.len());
        let mut face_areas = Vec::with_capacity(triangles.len());
        for t in &triangles {
            let n = (vertices[t[1]] - vertices[t[0]]).cross(&(vertices[t[2]] - vertices[t[0]]));
            let len = n.norm();
            face_areas.push(0.5 * len);
            face_normals.push(n / len);
        }
        let adjacency = edge_adjacency(&triangles);
        let total_area = face_areas.iter().sum();

        let mut mesh = Self {
            vertices,
            triangles,
            face_normals,
            face_areas,
            adjacency,
            total_area,
            com: Point3::origin(),
            volume: 0.0,
        };
        let (volume, com) = mesh.volume_centroid();
        mesh.volume = volume;
        mesh.com = com;
        mesh
    }

    fn volume_centroid(&self) -> (f64, Point3<f64>) {
        // Signed tetrahedra against a reference point near the mesh keep the
        // sums well conditioned for meshes far from the origin.
        let r = self.vertices[0].coords;
        let mut vol = 0.0;
        let mut acc = Vector3::zeros();
        for t in &self.triangles {
            let a = self.vertices[t[0]].coords - r;
            let b = self.vertices[t[1]].coords - r;
            let c = self.vertices[t[2]].coords - r;
            let v = a.dot(&b.cross(&c)) / 6.0;
            vol += v;
            acc += (a + b + c) * (v / 4.0);
        }
        let scale = self.bounding_radius_about(&Point3::from(r)).max(1e-12);
        if vol.abs() > 1e-9 * scale.powi(3) {
            (vol, Point3::from(acc / vol + r))
        } else {
            (vol, self.area_centroid())
        }
    }

    pub fn area_centroid(&self) -> Point3<f64> {
        let mut acc = Vector3::zeros();
        for (i, _) in self.triangles.iter().enumerate() {
            acc += self.triangle_centroid(i).coords * self.face_areas[i];
        }
        Point3::from(acc / self.total_area)
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle(&self, i: usize) -> [Point3<f64>; 3] {
        let t = self.triangles[i];
        [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]]
    }

    pub fn triangle_centroid(&self, i: usize) -> Point3<f64> {
        let [a, b, c] = self.triangle(i);
        Point3::from((a.coords + b.coords + c.coords) / 3.0)
    }

    pub fn bounds(&self) -> (Point3<f64>, Point3<f64>) {
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }

    fn bounding_radius_about(&self, c: &Point3<f64>) -> f64 {
        self.vertices
            .iter()
            .map(|v| (v - c).norm())
            .fold(0.0, f64::max)
    }

    /// Radius of the smallest sphere centered at the com containing the mesh.
    pub fn bounding_radius(&self) -> f64 {
        self.bounding_radius_about(&self.com)
    }

    /// Uniformly scaled copy (used for millimeter models).
    pub fn scaled(&self, s: f64) -> Result<Self, GeometryError> {
        let verts = self.vertices.iter().map(|v| Point3::from(v.coords * s)).collect();
        Self::new(verts, self.triangles.clone())
    }

    pub fn transformed(&self, pose: &crate::Pose) -> Self {
        let verts = self.vertices.iter().map(|v| pose.transform_point(v)).collect();
        Self::from_clean(verts, self.triangles.clone())
    }
}

/// Merges vertices closer than `tol`. Returns the welded vertex list and a
/// map from input index to output index. The first occurrence wins, so the
/// output order follows the input order.
pub fn weld(vertices: &[Point3<f64>], tol: f64) -> (Vec<Point3<f64>>, Vec<usize>) {
    let key = |p: &Point3<f64>| {
        [
            (p.x / tol).floor() as i64,
            (p.y / tol).floor() as i64,
            (p.z / tol).floor() as i64,
        ]
    };
    let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    let mut out: Vec<Point3<f64>> = Vec::new();
    let mut remap = Vec::with_capacity(vertices.len());
    for p in vertices {
        let k = key(p);
        let mut found = None;
        'search: for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(cands) = grid.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) {
                        for &c in cands {
                            if (out[c] - p).norm() <= tol {
                                found = Some(c);
                                break 'search;
                            }
                        }
                    }
                }
            }
        }
        let idx = found.unwrap_or_else(|| {
            out.push(*p);
            grid.entry(k).or_default().push(out.len() - 1);
            out.len() - 1
        });
        remap.push(idx);
    }
    (out, remap)
}

/// Triangles sharing an undirected edge are adjacent. Non-manifold edges make
/// every incident triangle adjacent to every other, which keeps the relation
/// symmetric.
pub fn edge_adjacency(triangles: &[[usize; 3]]) -> Vec<Vec<usize>> {
    let mut edges: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (i, t) in triangles.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            edges.entry((a.min(b), a.max(b))).or_default().push(i);
        }
    }
    let mut adj = vec![Vec::new(); triangles.len()];
    for tris in edges.values() {
        for &a in tris {
            for &b in tris {
                if a != b {
                    adj[a].push(b);
                }
            }
        }
    }
    for a in adj.iter_mut() {
        a.sort_unstable();
        a.dedup();
    }
    adj
}

/// Angle between two unit vectors, accurate near 0 and π.
pub fn angle_between(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::primitives;

    #[test]
    fn cube_area_and_com() {
        let m = primitives::cube(1.0);
        assert_eq!(m.triangle_count(), 12);
        assert_eq!(m.vertices.len(), 8);
        assert!((m.total_area - 6.0).abs() < 1e-12);
        assert!(m.com.coords.norm() < 1e-12);
        assert!((m.volume - 1.0).abs() < 1e-12);
    }

    #[test]
    fn welding_per_face_soup() {
        let m = primitives::cube(1.0);
        let mut verts = Vec::new();
        let mut tris = Vec::new();
        for t in &m.triangles {
            let base = verts.len();
            for &v in t {
                verts.push(m.vertices[v]);
            }
            tris.push([base, base + 1, base + 2]);
        }
        assert_eq!(verts.len(), 36);
        let w = TriangleMesh::new(verts, tris).unwrap();
        assert_eq!(w.vertices.len(), 8);
        assert_eq!(w.triangle_count(), 12);
        let again = TriangleMesh::new(w.vertices.clone(), w.triangles.clone()).unwrap();
        assert_eq!(again.vertices, w.vertices);
        assert_eq!(again.triangles, w.triangles);
    }

    #[test]
    fn weld_tolerance_boundary() {
        let pts = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(0.5e-7, 0.0, 0.0),
            Point3::new(3e-7, 0.0, 0.0),
        ];
        let (out, remap) = weld(&pts, WELD_TOLERANCE);
        assert_eq!(out.len(), 2);
        assert_eq!(remap, vec![0, 0, 1]);
    }

    #[test]
    fn degenerate_triangles_dropped() {
        let verts = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(2.0, 0.0, 0.0),
        ];
        let m = TriangleMesh::new(verts, vec![[0, 1, 2], [0, 1, 3], [1, 1, 2]]).unwrap();
        assert_eq!(m.triangle_count(), 1);
        assert_eq!(m.vertices.len(), 3);
    }

    #[test]
    fn empty_mesh_is_invalid() {
        let verts = vec![Point3::origin(), Point3::new(1.0, 0.0, 0.0), Point3::new(2.0, 0.0, 0.0)];
        assert!(matches!(
            TriangleMesh::new(verts, vec![[0, 1, 2]]),
            Err(GeometryError::InvalidInput(_))
        ));
    }

    #[test]
    fn adjacency_is_symmetric_and_normals_unit() {
        let m = primitives::cylinder(0.05, 0.2, 32);
        for (a, ns) in m.adjacency.iter().enumerate() {
            assert!(!ns.is_empty());
            for &b in ns {
                assert!(m.adjacency[b].contains(&a));
            }
        }
        for n in &m.face_normals {
            assert!((n.norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn icosphere_com_matches_center() {
        let c = Vector3::new(0.3, -0.2, 0.5);
        let m = primitives::icosphere(0.1, 3).transformed(&crate::Pose::from_translation(c));
        assert!((m.com.coords - c).norm() < 1e-6);
        // Independent route: tetrahedra fanned from the origin instead of a vertex.
        let mut vol = 0.0;
        let mut acc = Vector3::zeros();
        for i in 0..m.triangle_count() {
            let [a, b, cc] = m.triangle(i);
            let v = a.coords.dot(&b.coords.cross(&cc.coords)) / 6.0;
            vol += v;
            acc += (a.coords + b.coords + cc.coords) * v / 4.0;
        }
        assert!((acc / vol - m.com.coords).norm() < 1e-9);
        let sphere_vol = 4.0 / 3.0 * std::f64::consts::PI * 0.1f64.powi(3);
        assert!(vol < sphere_vol && vol > 0.95 * sphere_vol);
    }
}
