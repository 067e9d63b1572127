//! Region-growing segmentation of a mesh into near-planar facets.
//!
//! [`oversegment`] grows one facet per uncovered seed without ever removing
//! triangles from the candidate pool, so facets may overlap and each one
//! carries its full planar neighbourhood. [`segment_conventional`] is the
//! classic partitioning variant, kept as a baseline.

use std::collections::{HashMap, HashSet, VecDeque};

use nalgebra::{Point3, Vector3};

use super::mesh::angle_between;
use super::TriangleMesh;

/// Default coplanarity threshold (10 degrees).
pub const DEFAULT_TAU: f64 = 10.0 * std::f64::consts::PI / 180.0;

#[derive(Clone, Debug, PartialEq)]
pub struct Facet {
    /// Member triangles, ascending.
    pub triangle_ids: Vec<usize>,
    pub seed_id: usize,
    /// Area-weighted mean of the member normals.
    pub normal: Vector3<f64>,
    /// Boundary edges as directed vertex pairs, chained into loops where the
    /// topology allows it.
    pub boundary: Vec<[usize; 2]>,
    pub area: f64,
}

impl Facet {
    fn build(mesh: &TriangleMesh, seed_id: usize, mut triangle_ids: Vec<usize>) -> Self {
        triangle_ids.sort_unstable();
        let mut acc = Vector3::zeros();
        let mut area = 0.0;
        for &t in &triangle_ids {
            acc += mesh.face_normals[t] * mesh.face_areas[t];
            area += mesh.face_areas[t];
        }
        // a closed curved region can average out to nothing
        let normal = if acc.norm() > 1e-9 * area.max(f64::MIN_POSITIVE) {
            acc.normalize()
        } else {
            mesh.face_normals[seed_id]
        };
        let boundary = boundary_edges(mesh, &triangle_ids);
        Self {
            triangle_ids,
            seed_id,
            normal,
            boundary,
            area,
        }
    }

    pub fn contains(&self, t: usize) -> bool {
        self.triangle_ids.binary_search(&t).is_ok()
    }

    /// Shortest distance from `p` to any boundary edge. A facet without
    /// boundary (a closed surface) is infinitely far from its edge.
    pub fn boundary_distance(&self, mesh: &TriangleMesh, p: &Point3<f64>) -> f64 {
        self.boundary
            .iter()
            .map(|e| point_segment_distance(p, &mesh.vertices[e[0]], &mesh.vertices[e[1]]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest deviation between a member normal and the seed normal.
    pub fn max_seed_deviation(&self, mesh: &TriangleMesh) -> f64 {
        let ns = mesh.face_normals[self.seed_id];
        self.triangle_ids
            .iter()
            .map(|&t| angle_between(&mesh.face_normals[t], &ns))
            .fold(0.0, f64::max)
    }
}

pub fn point_segment_distance(p: &Point3<f64>, a: &Point3<f64>, b: &Point3<f64>) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 {
        ((p - a).dot(&ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p - (a + ab * t)).norm()
}

/// Directed edges used by exactly one member triangle, chained into loops.
fn boundary_edges(mesh: &TriangleMesh, tris: &[usize]) -> Vec<[usize; 2]> {
    let mut count: HashMap<(usize, usize), u32> = HashMap::new();
    for &t in tris {
        let v = mesh.triangles[t];
        for k in 0..3 {
            let (a, b) = (v[k], v[(k + 1) % 3]);
            *count.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    let mut open: Vec<[usize; 2]> = Vec::new();
    for &t in tris {
        let v = mesh.triangles[t];
        for k in 0..3 {
            let (a, b) = (v[k], v[(k + 1) % 3]);
            if count[&(a.min(b), a.max(b))] == 1 {
                open.push([a, b]);
            }
        }
    }
    chain_loops(open)
}

fn chain_loops(mut edges: Vec<[usize; 2]>) -> Vec<[usize; 2]> {
    let mut out = Vec::with_capacity(edges.len());
    while !edges.is_empty() {
        let mut cur = edges.remove(0);
        let start = cur[0];
        out.push(cur);
        while cur[1] != start {
            match edges.iter().position(|e| e[0] == cur[1]) {
                Some(i) => {
                    cur = edges.remove(i);
                    out.push(cur);
                }
                None => break,
            }
        }
    }
    out
}

/// Overlapping segmentation. Each facet is the edge-connected set of
/// triangles reachable from its seed whose normals lie within `tau` of the
/// seed normal; seeds are taken in ascending order among triangles not yet
/// covered by any facet.
pub fn oversegment(mesh: &TriangleMesh, tau: f64) -> Vec<Facet> {
    let n = mesh.triangle_count();
    let mut covered = vec![false; n];
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut facets = Vec::new();
    let mut in_facet = vec![usize::MAX; n];
    for seed in 0..n {
        if covered[seed] {
            continue;
        }
        let ns = mesh.face_normals[seed];
        let mut members = vec![seed];
        let mut queue = VecDeque::from([seed]);
        in_facet[seed] = seed;
        while let Some(t) = queue.pop_front() {
            for &nb in &mesh.adjacency[t] {
                if in_facet[nb] != seed && angle_between(&mesh.face_normals[nb], &ns) <= tau {
                    in_facet[nb] = seed;
                    members.push(nb);
                    queue.push_back(nb);
                }
            }
        }
        for &t in &members {
            covered[t] = true;
        }
        let facet = Facet::build(mesh, seed, members);
        if seen.insert(facet.triangle_ids.clone()) {
            facets.push(facet);
        }
    }
    facets
}

/// Partitioning segmentation: claimed triangles leave the pool, and a
/// neighbour joins when its normal is within `tau` of the triangle it was
/// reached from. Large thresholds therefore chain around curved surfaces.
pub fn segment_conventional(mesh: &TriangleMesh, tau: f64) -> Vec<Facet> {
    let n = mesh.triangle_count();
    let mut claimed = vec![false; n];
    let mut facets = Vec::new();
    for seed in 0..n {
        if claimed[seed] {
            continue;
        }
        claimed[seed] = true;
        let mut members = vec![seed];
        let mut queue = VecDeque::from([seed]);
        while let Some(t) = queue.pop_front() {
            for &nb in &mesh.adjacency[t] {
                if !claimed[nb]
                    && angle_between(&mesh.face_normals[nb], &mesh.face_normals[t]) <= tau
                {
                    claimed[nb] = true;
                    members.push(nb);
                    queue.push_back(nb);
                }
            }
        }
        facets.push(Facet::build(mesh, seed, members));
    }
    facets
}

/// For each triangle, the facets that contain it (ascending facet index).
pub fn triangle_facets(n_triangles: usize, facets: &[Facet]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); n_triangles];
    for (fi, f) in facets.iter().enumerate() {
        for &t in &f.triangle_ids {
            out[t].push(fi);
        }
    }
    out
}
