//! Procedural solids used by the bundled assets, tests and benchmarks.

use std::collections::HashMap;

use nalgebra::{Point3, Vector3};

use super::TriangleMesh;

/// Axis-aligned box centered at the origin with full side lengths `size`.
pub fn cuboid(size: Vector3<f64>) -> TriangleMesh {
    let h = size * 0.5;
    let mut v = Vec::with_capacity(8);
    for i in 0..8 {
        v.push(Point3::new(
            if i & 1 == 0 { -h.x } else { h.x },
            if i & 2 == 0 { -h.y } else { h.y },
            if i & 4 == 0 { -h.z } else { h.z },
        ));
    }
    let t = vec![
        [0, 2, 1], [1, 2, 3], // -z
        [4, 5, 6], [5, 7, 6], // +z
        [0, 1, 4], [1, 5, 4], // -y
        [2, 6, 3], [3, 6, 7], // +y
        [0, 4, 2], [2, 4, 6], // -x
        [1, 3, 5], [3, 7, 5], // +x
    ];
    TriangleMesh::new(v, t).expect("valid box")
}

pub fn cube(side: f64) -> TriangleMesh {
    cuboid(Vector3::new(side, side, side))
}

/// Closed prism over a counter-clockwise polygon in the xy plane, extruded
/// symmetrically along z. `cap` triangulates the polygon (indices into it).
/// Side quads come first in triangle order, one pair per polygon edge.
pub fn prism(polygon: &[(f64, f64)], cap: &[[usize; 3]], depth: f64) -> TriangleMesh {
    let n = polygon.len();
    let hz = depth * 0.5;
    let mut v = Vec::with_capacity(2 * n);
    for &(x, y) in polygon {
        v.push(Point3::new(x, y, -hz));
    }
    for &(x, y) in polygon {
        v.push(Point3::new(x, y, hz));
    }
    let mut t = Vec::new();
    for i in 0..n {
        let j = (i + 1) % n;
        t.push([i, j, n + j]);
        t.push([i, n + j, n + i]);
    }
    for c in cap {
        t.push([n + c[0], n + c[1], n + c[2]]);
    }
    for c in cap {
        t.push([c[0], c[2], c[1]]);
    }
    TriangleMesh::new(v, t).expect("valid prism")
}

fn fan(n: usize) -> Vec<[usize; 3]> {
    (1..n - 1).map(|i| [0, i, i + 1]).collect()
}

/// `sides`-gon prism approximating a cylinder of the given radius along z.
pub fn cylinder(radius: f64, height: f64, sides: usize) -> TriangleMesh {
    let poly: Vec<(f64, f64)> = (0..sides)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / sides as f64;
            (radius * a.cos(), radius * a.sin())
        })
        .collect();
    prism(&poly, &fan(sides), height)
}

/// L-shaped bracket: legs of length `a` (along x) and `b` (along y), wall
/// thickness `t`, extruded by `depth`.
pub fn l_bracket(a: f64, b: f64, t: f64, depth: f64) -> TriangleMesh {
    let poly = [(0.0, 0.0), (a, 0.0), (a, t), (t, t), (t, b), (0.0, b)];
    let cap = [[0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 5]];
    prism(&poly, &cap, depth)
}

/// Subdivided icosahedron projected onto a sphere at the origin.
pub fn icosphere(radius: f64, subdivisions: u32) -> TriangleMesh {
    let p = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vector3<f64>> = [
        (-1.0, p, 0.0), (1.0, p, 0.0), (-1.0, -p, 0.0), (1.0, -p, 0.0),
        (0.0, -1.0, p), (0.0, 1.0, p), (0.0, -1.0, -p), (0.0, 1.0, -p),
        (p, 0.0, -1.0), (p, 0.0, 1.0), (-p, 0.0, -1.0), (-p, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vector3::new(x, y, z).normalize())
    .collect();
    let mut tris: Vec<[usize; 3]> = vec![
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(tris.len() * 4);
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Vector3<f64>>| {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                verts.push(((verts[a] + verts[b]) * 0.5).normalize());
                verts.len() - 1
            })
        };
        for t in &tris {
            let ab = midpoint(t[0], t[1], &mut verts);
            let bc = midpoint(t[1], t[2], &mut verts);
            let ca = midpoint(t[2], t[0], &mut verts);
            next.push([t[0], ab, ca]);
            next.push([t[1], bc, ab]);
            next.push([t[2], ca, bc]);
            next.push([ab, bc, ca]);
        }
        tris = next;
    }
    let pts = verts.into_iter().map(|v| Point3::from(v * radius)).collect();
    TriangleMesh::new(pts, tris).expect("valid icosphere")
}

/// Two thin upright walls on a base plate, leaving a slot of width `gap`
/// between them. Used to exercise finger-sweep collisions.
pub fn slotted_block(width: f64, gap: f64, wall: f64, height: f64, depth: f64) -> TriangleMesh {
    let half = gap * 0.5;
    let poly = [
        (-half - wall, 0.0),
        (-half, 0.0),
        (-half, height),
        (half, height),
        (half, 0.0),
        (half + wall, 0.0),
        (half + wall, height + width),
        (-half - wall, height + width),
    ];
    // U-shape opening towards -y; triangulated by hand.
    let cap = [[0, 1, 2], [0, 2, 7], [2, 3, 7], [3, 6, 7], [3, 4, 6], [4, 5, 6]];
    prism(&poly, &cap, depth)
}
