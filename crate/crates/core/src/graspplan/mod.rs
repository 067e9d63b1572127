//! Antipodal parallel-jaw grasp synthesis on over-segmented meshes.
//!
//! Pipeline: segment -> sample the whole surface once -> distribute samples to
//! facets -> distance and near-neighbour filters -> parallel-facet contact
//! pairs -> gravity-lever filter -> level-1 sweep check -> level-2 full hand
//! check at each rotation about the closing axis.

mod collide;
mod contacts;
mod filter;
mod gripper;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use collide::{
    collision_level1, collision_level2, hand_pose, sweep_cylinders, GraspConfig,
    CONTACT_EXCLUSION_FACTOR,
};
pub use contacts::{cast_inward, find_contact_pairs, gravity_filter, ContactPair, ContactParams};
pub use filter::filter_samples;
pub use gripper::GripperModel;

use crate::collision::MeshBounds;
use crate::geometry::{
    oversegment, sample_surface, segment_conventional, Facet, SamplePoint, TriangleMesh,
    DEFAULT_DENSITY, DEFAULT_MAX_SAMPLES, DEFAULT_TAU,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Segmentation {
    #[default]
    Over,
    Conventional,
}

/// Tunables of the grasp planner. `None` fields are derived from the gripper
/// and the mesh, see [`GraspParams::resolve`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraspParams {
    pub tau: f64,
    pub segmentation: Segmentation,
    /// Samples per square meter.
    pub density: f64,
    pub max_samples: usize,
    pub d_min: Option<f64>,
    pub d_max: Option<f64>,
    pub merge_radius: Option<f64>,
    pub antipodal_tolerance: f64,
    pub max_lever: Option<f64>,
    pub rotation_samples: usize,
}

impl Default for GraspParams {
    fn default() -> Self {
        Self {
            tau: DEFAULT_TAU,
            segmentation: Segmentation::Over,
            density: DEFAULT_DENSITY,
            max_samples: DEFAULT_MAX_SAMPLES,
            d_min: None,
            d_max: None,
            merge_radius: None,
            antipodal_tolerance: 10f64.to_radians(),
            max_lever: None,
            rotation_samples: 8,
        }
    }
}

/// Fully resolved planner settings.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolvedParams {
    pub tau: f64,
    pub segmentation: Segmentation,
    pub density: f64,
    pub max_samples: usize,
    pub d_min: f64,
    pub d_max: f64,
    pub merge_radius: f64,
    pub antipodal_tolerance: f64,
    pub max_lever: f64,
    pub rotation_samples: usize,
}

impl GraspParams {
    pub fn resolve(&self, mesh: &TriangleMesh, gripper: &GripperModel) -> ResolvedParams {
        let pad = gripper.pad_circumradius();
        ResolvedParams {
            tau: self.tau,
            segmentation: self.segmentation,
            density: self.density,
            max_samples: self.max_samples,
            d_min: self.d_min.unwrap_or(pad),
            d_max: self.d_max.unwrap_or(gripper.palm_offset),
            merge_radius: self.merge_radius.unwrap_or(pad),
            antipodal_tolerance: self.antipodal_tolerance,
            max_lever: self.max_lever.unwrap_or(0.6 * mesh.bounding_radius()),
            rotation_samples: self.rotation_samples,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.tau > 0.0 && self.tau < std::f64::consts::FRAC_PI_2) {
            return Err(format!("tau must be in (0, pi/2), got {}", self.tau));
        }
        if !(self.density > 0.0) {
            return Err("density must be positive".into());
        }
        if self.rotation_samples == 0 {
            return Err("rotation_samples must be >= 1".into());
        }
        if let (Some(a), Some(b)) = (self.d_min, self.d_max) {
            if !(0.0 < a && a < b) {
                return Err("need 0 < d_min < d_max".into());
            }
        }
        if matches!(self.max_lever, Some(l) if l <= 0.0) {
            return Err("max_lever must be positive".into());
        }
        if !(self.antipodal_tolerance > 0.0 && self.antipodal_tolerance < std::f64::consts::FRAC_PI_2) {
            return Err("antipodal_tolerance must be in (0, pi/2)".into());
        }
        Ok(())
    }
}

/// Every intermediate product of [`plan_free_grasps`].
#[derive(Clone, Debug)]
pub struct GraspPlan {
    pub params: ResolvedParams,
    pub facets: Vec<Facet>,
    pub samples: Vec<SamplePoint>,
    /// Filtered samples per facet.
    pub filtered: Vec<Vec<SamplePoint>>,
    /// Pairs after the gravity filter.
    pub pairs: Vec<ContactPair>,
    /// Pairs that passed level 1.
    pub level1_pairs: usize,
    pub grasps: Vec<GraspConfig>,
}

pub fn plan_free_grasps(
    mesh: &TriangleMesh,
    gripper: &GripperModel,
    params: &GraspParams,
    rng_seed: u64,
) -> GraspPlan {
    let p = params.resolve(mesh, gripper);
    let facets = match p.segmentation {
        Segmentation::Over => oversegment(mesh, p.tau),
        Segmentation::Conventional => segment_conventional(mesh, p.tau),
    };
    let samples = sample_surface(mesh, p.density, p.max_samples, &facets, rng_seed);
    let mut per_facet: Vec<Vec<SamplePoint>> = vec![Vec::new(); facets.len()];
    for s in &samples {
        for &f in &s.facet_ids {
            per_facet[f].push(s.clone());
        }
    }
    let filtered: Vec<Vec<SamplePoint>> = facets
        .iter()
        .zip(&per_facet)
        .map(|(f, s)| filter_samples(mesh, f, s, p.d_min, p.d_max, p.merge_radius))
        .collect();
    let cparams = ContactParams {
        antipodal_tolerance: p.antipodal_tolerance,
        inner_margin: p.d_min,
    };
    let pairs = find_contact_pairs(mesh, &facets, &filtered, gripper, &cparams);
    let pairs = gravity_filter(pairs, &mesh.com, p.max_lever);

    let bounds = MeshBounds::new(mesh);
    let evaluated: Vec<Option<Vec<GraspConfig>>> = pairs
        .par_iter()
        .map(|pair| {
            collision_level1(pair, gripper, mesh)
                .then(|| collision_level2(pair, p.rotation_samples, gripper, mesh, &bounds))
        })
        .collect();
    let level1_pairs = evaluated.iter().filter(|e| e.is_some()).count();
    let mut grasps: Vec<GraspConfig> = evaluated.into_iter().flatten().flatten().collect();
    for (i, g) in grasps.iter_mut().enumerate() {
        g.id = i;
    }
    GraspPlan {
        params: p,
        facets,
        samples,
        filtered,
        pairs,
        level1_pairs,
        grasps,
    }
}
