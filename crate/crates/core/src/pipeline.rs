//! Precompute orchestration: free grasps, placements, tabletop instances and
//! IK feasibility, then persistence.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::config::Workspace;
use crate::graspplan::{plan_free_grasps, GraspPlan};
use crate::kinematics::{grip_feasibility, IkFeasibility, IkSolver, RetractionSpec};
use crate::placement::{
    all_placement_grips, stable_placements, tabletop_discretize, Placement, PlacementGrip, Tabletop,
};
use crate::store::{IdMap, PipelineData, RobotIk, Store, StoreError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("stage '{stage}' failed: {message}")]
    Stage { stage: &'static str, message: String },
    #[error("stage 'save' failed: {0}")]
    Store(#[from] StoreError),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct StageTimings {
    pub free_grasps: Duration,
    pub placements: Duration,
    /// One entry per robot.
    pub ik: Vec<Duration>,
    pub save: Option<Duration>,
}

#[derive(Clone, Debug)]
pub struct Precomputed {
    pub object_name: String,
    pub triangle_count: usize,
    pub plan: GraspPlan,
    pub placements: Vec<Placement>,
    pub placement_grips: Vec<PlacementGrip>,
    pub angles: Vec<f64>,
    pub tabletop: Tabletop,
    pub retraction: RetractionSpec,
    /// Robot name and feasibility rows keyed by tabletop grip id.
    pub ik: Vec<(String, Vec<IkFeasibility>)>,
    pub timings: StageTimings,
}

/// Feasibility of every tabletop grip; rows in grip order.
pub fn compute_ik(solver: &IkSolver, robot_id: usize, tabletop: &Tabletop, ret: &RetractionSpec) -> Vec<IkFeasibility> {
    tabletop
        .grips
        .par_iter()
        .map(|g| {
            let [a, b, c] = grip_feasibility(solver, &g.hand_pose, ret);
            IkFeasibility {
                robot_id,
                tabletopgrip_id: g.id,
                feasibility: a,
                feasibility_handx: b,
                feasibility_handxworldz: c,
            }
        })
        .collect()
}

pub fn precompute(ws: &Workspace) -> Result<Precomputed, PipelineError> {
    let cfg = &ws.config;
    let t0 = Instant::now();
    let plan = plan_free_grasps(&ws.mesh, &ws.gripper, &cfg.grasp, cfg.seed);
    let free_grasps = t0.elapsed();

    let t1 = Instant::now();
    let placements = stable_placements(&ws.mesh, cfg.placement.stability_threshold)
        .map_err(|e| PipelineError::Stage { stage: "placements", message: e.to_string() })?;
    let placement_grips = all_placement_grips(&placements, &plan.grasps, &ws.gripper);
    let angles = cfg.table.angle_values();
    let tabletop = tabletop_discretize(
        &placements,
        &placement_grips,
        &plan.grasps,
        &cfg.table.positions(),
        &angles,
        cfg.table.height,
    );
    let placements_time = t1.elapsed();

    let mut ik = Vec::new();
    let mut ik_times = Vec::new();
    for (i, robot) in ws.robots.iter().enumerate() {
        let t = Instant::now();
        let solver = IkSolver::new(robot.clone(), cfg.ik.clone());
        ik.push((robot.name.clone(), compute_ik(&solver, i, &tabletop, &cfg.retraction)));
        ik_times.push(t.elapsed());
    }
    Ok(Precomputed {
        object_name: cfg.object.name.clone(),
        triangle_count: ws.mesh.triangle_count(),
        plan,
        placements,
        placement_grips,
        angles,
        tabletop,
        retraction: cfg.retraction,
        ik,
        timings: StageTimings { free_grasps, placements: placements_time, ik: ik_times, save: None },
    })
}

impl Precomputed {
    pub fn data(&self) -> PipelineData<'_> {
        PipelineData {
            object_name: &self.object_name,
            grasps: &self.plan.grasps,
            placements: &self.placements,
            placement_grips: &self.placement_grips,
            angles: &self.angles,
            tabletop: &self.tabletop,
            retraction: self.retraction,
            ik: self.ik.iter().map(|(name, rows)| RobotIk { name, rows }).collect(),
        }
    }

    pub fn save(&mut self, store: &mut Store) -> Result<IdMap, PipelineError> {
        let t = Instant::now();
        let map = store.save_pipeline(&self.data())?;
        self.timings.save = Some(t.elapsed());
        Ok(map)
    }

    /// Grip count of every placement, in placement order.
    pub fn grips_per_placement(&self) -> Vec<usize> {
        let mut n = vec![0; self.placements.len()];
        for g in &self.placement_grips {
            n[g.placement_id] += 1;
        }
        n
    }

    /// `(column, value)` rows: triangles, free grasps and their time,
    /// placements, grips per placement and their time, tabletop placements,
    /// tabletop grips, then IK time per robot.
    pub fn summary(&self, with_timings: bool) -> Vec<(String, String)> {
        let secs = |d: Duration| format!("{:.3}", d.as_secs_f64());
        let mut rows = vec![
            ("obj".to_string(), self.object_name.clone()),
            ("#-tri".into(), self.triangle_count.to_string()),
            ("#-fg".into(), self.plan.grasps.len().to_string()),
        ];
        if with_timings {
            rows.push(("t-fg".into(), secs(self.timings.free_grasps)));
        }
        rows.push(("#-fp".into(), self.placements.len().to_string()));
        let per: Vec<String> = self.grips_per_placement().iter().map(|n| n.to_string()).collect();
        rows.push(("#-fpg".into(), per.join(",")));
        if with_timings {
            rows.push(("t-fp".into(), secs(self.timings.placements)));
        }
        rows.push(("#-tp".into(), self.tabletop.placements.len().to_string()));
        rows.push(("#-tpg".into(), self.tabletop.grips.len().to_string()));
        for (i, (name, ik)) in self.ik.iter().enumerate() {
            let feasible = ik.iter().filter(|f| f.all()).count();
            rows.push((format!("#-ik[{name}]"), feasible.to_string()));
            if with_timings {
                rows.push((format!("t-tpgik[{name}]"), secs(self.timings.ik[i])));
            }
        }
        if let (true, Some(d)) = (with_timings, self.timings.save) {
            rows.push(("t-save".into(), secs(d)));
        }
        rows
    }
}
