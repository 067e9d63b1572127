use nalgebra::{Point3, Vector3};
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::segment::{triangle_facets, Facet};
use super::TriangleMesh;

/// Default surface sampling density, points per square meter.
pub const DEFAULT_DENSITY: f64 = 400.0;
/// Upper bound on the number of surface samples.
pub const DEFAULT_MAX_SAMPLES: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct SamplePoint {
    pub position: Point3<f64>,
    /// Outward normal of the host triangle.
    pub normal: Vector3<f64>,
    pub triangle_id: usize,
    /// Barycentric coordinates in the host triangle.
    pub barycentric: [f64; 3],
    pub facet_ids: Vec<usize>,
}

/// Draws `round(density * area)` points (capped at `max_samples`),
/// area-weighted over triangles and uniform within each, then records which
/// facets of `facets` own each host triangle.
pub fn sample_surface(
    mesh: &TriangleMesh,
    density: f64,
    max_samples: usize,
    facets: &[Facet],
    rng_seed: u64,
) -> Vec<SamplePoint> {
    let n = ((density * mesh.total_area).round() as usize).min(max_samples);
    if n == 0 {
        return Vec::new();
    }
    let owners = triangle_facets(mesh.triangle_count(), facets);
    let pick = WeightedIndex::new(&mesh.face_areas).expect("positive triangle areas");
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    (0..n)
        .map(|_| {
            let t = pick.sample(&mut rng);
            let (mut u, mut v): (f64, f64) = (rng.gen(), rng.gen());
            if u + v > 1.0 {
                u = 1.0 - u;
                v = 1.0 - v;
            }
            let [a, b, c] = mesh.triangle(t);
            let w = 1.0 - u - v;
            SamplePoint {
                position: Point3::from(a.coords * w + b.coords * u + c.coords * v),
                normal: mesh.face_normals[t],
                triangle_id: t,
                barycentric: [w, u, v],
                facet_ids: owners[t].clone(),
            }
        })
        .collect()
}
