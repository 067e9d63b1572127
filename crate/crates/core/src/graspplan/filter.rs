use std::collections::HashMap;

use crate::geometry::{Facet, SamplePoint, TriangleMesh};

/// Distance filter followed by a greedy fixed-radius merge.
///
/// A sample survives the distance filter when its distance to the facet
/// boundary lies in `[d_min, d_max]`. Survivors are then scanned in input
/// order and kept only if no already-kept sample lies within `merge_radius`.
pub fn filter_samples(
    mesh: &TriangleMesh,
    facet: &Facet,
    samples: &[SamplePoint],
    d_min: f64,
    d_max: f64,
    merge_radius: f64,
) -> Vec<SamplePoint> {
    let near_ok: Vec<&SamplePoint> = samples
        .iter()
        .filter(|s| {
            let d = facet.boundary_distance(mesh, &s.position);
            d >= d_min && d <= d_max
        })
        .collect();
    merge_neighbours(near_ok, merge_radius)
}

fn merge_neighbours(samples: Vec<&SamplePoint>, radius: f64) -> Vec<SamplePoint> {
    if radius <= 0.0 {
        return samples.into_iter().cloned().collect();
    }
    let cell = |s: &SamplePoint| {
        [
            (s.position.x / radius).floor() as i64,
            (s.position.y / radius).floor() as i64,
            (s.position.z / radius).floor() as i64,
        ]
    };
    let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    let mut kept: Vec<SamplePoint> = Vec::new();
    for s in samples {
        let c = cell(s);
        let mut clash = false;
        'n: for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(ids) = grid.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) {
                        if ids
                            .iter()
                            .any(|&k| (kept[k].position - s.position).norm() <= radius)
                        {
                            clash = true;
                            break 'n;
                        }
                    }
                }
            }
        }
        if !clash {
            grid.entry(c).or_default().push(kept.len());
            kept.push(s.clone());
        }
    }
    kept
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{oversegment, primitives, sample_surface};
    use nalgebra::{Point3, Vector3};

    fn sample_at(p: Point3<f64>) -> SamplePoint {
        SamplePoint {
            position: p,
            normal: Vector3::z(),
            triangle_id: 0,
            barycentric: [1.0, 0.0, 0.0],
            facet_ids: vec![0],
        }
    }

    fn top_face() -> (TriangleMesh, Facet) {
        let m = primitives::cube(1.0);
        let f = oversegment(&m, 0.1).into_iter().find(|f| f.normal.z > 0.9).unwrap();
        (m, f)
    }

    #[test]
    fn distance_window() {
        let (m, f) = top_face();
        // boundary at x = 0.5
        let s: Vec<_> = [0.001, 0.01, 0.2]
            .iter()
            .map(|d| sample_at(Point3::new(0.5 - d, 0.0, 0.5)))
            .collect();
        let out = filter_samples(&m, &f, &s, 0.005, 0.1, 0.0);
        assert_eq!(out.len(), 1);
        assert!((out[0].position.x - 0.49).abs() < 1e-12);
    }

    #[test]
    fn greedy_merge_keeps_first() {
        let (m, f) = top_face();
        let s = vec![
            sample_at(Point3::new(0.0, 0.0, 0.5)),
            sample_at(Point3::new(0.004, 0.0, 0.5)),
        ];
        let out = filter_samples(&m, &f, &s, 0.0, 1.0, 0.005);
        assert_eq!(out, vec![s[0].clone()]);
    }

    #[test]
    fn merge_matches_pairwise_oracle() {
        let (m, f) = top_face();
        let facets = vec![f.clone()];
        let s: Vec<_> = sample_surface(&m, 3000.0, 10_000, &facets, 9)
            .into_iter()
            .filter(|s| s.facet_ids == vec![0])
            .collect();
        let r = 0.05;
        let out = filter_samples(&m, &f, &s, 0.0, 10.0, r);
        for (i, a) in out.iter().enumerate() {
            for b in &out[i + 1..] {
                assert!((a.position - b.position).norm() > r);
            }
        }
        // every removed sample is covered by a kept one; scan order respected
        let mut kept_so_far: Vec<&SamplePoint> = Vec::new();
        let mut oi = 0;
        for x in &s {
            let covered = kept_so_far.iter().any(|k| (k.position - x.position).norm() <= r);
            if covered {
                assert!(out.iter().any(|k| (k.position - x.position).norm() <= r));
            } else {
                assert_eq!(&out[oi], x);
                kept_so_far.push(x);
                oi += 1;
            }
        }
        assert_eq!(oi, out.len());
    }
}
