use std::collections::{BTreeSet, HashMap};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use regrasp::regraspgraph::{ConnectedPose, GraphParams, GripNode, Role, TempGrip};
use regrasp::Pose;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Who {
    Grip { id: i64, placement: i64, grasp: i64 },
    Init(i64),
    Goal(i64),
}

impl Who {
    fn grasp(&self) -> i64 {
        match *self {
            Who::Grip { grasp, .. } | Who::Init(grasp) | Who::Goal(grasp) => grasp,
        }
    }
}

/// Grips on `placements` x `grasps` kept with probability `keep`, plus the
/// init and goal grasp sets.
pub struct Fixture {
    pub grips: Vec<GripNode>,
    pub poses: HashMap<i64, Pose>,
    pub init: Vec<i64>,
    pub goal: Vec<i64>,
}

pub fn fixture(rng: &mut ChaCha8Rng, placements: i64, grasps: i64, keep: f64) -> Fixture {
    let mut grips = Vec::new();
    let mut poses = HashMap::new();
    let mut id = 100;
    for p in 0..placements {
        poses.insert(p + 1, Pose::planar(p as f64, 0.0, 0.0));
        for g in 0..grasps {
            if rng.gen_bool(keep) {
                grips.push(GripNode {
                    grip_id: id,
                    placement_id: p + 1,
                    freeairgrip_id: g + 1,
                    hand_pose: Pose::identity(),
                    jaw_width: 0.01,
                });
            }
            id += 1;
        }
    }
    // shuffle so construction cannot rely on input order
    for i in (1..grips.len()).rev() {
        let j = rng.gen_range(0..=i);
        grips.swap(i, j);
    }
    let pick = |rng: &mut ChaCha8Rng| -> Vec<i64> {
        let mut v: Vec<i64> = (1..=grasps).filter(|_| rng.gen_bool(0.4)).collect();
        if v.is_empty() {
            v.push(rng.gen_range(1..=grasps));
        }
        v
    };
    let init = pick(rng);
    let goal = pick(rng);
    Fixture { grips, poses, init, goal }
}

pub fn connected(role: Role, grasps: &[i64]) -> ConnectedPose {
    ConnectedPose {
        role,
        pose: Pose::identity(),
        candidates: grasps.len(),
        collision_free: grasps.len(),
        grips: grasps
            .iter()
            .map(|&g| TempGrip { freeairgrip_id: g, hand_pose: Pose::identity(), jaw_width: 0.01 })
            .collect(),
    }
}

pub fn oracle_edges(grips: &[GripNode]) -> (BTreeSet<(i64, i64)>, BTreeSet<(i64, i64)>) {
    let mut transit = BTreeSet::new();
    let mut transfer = BTreeSet::new();
    for a in grips {
        for b in grips {
            if a.grip_id >= b.grip_id {
                continue;
            }
            if a.placement_id == b.placement_id {
                transit.insert((a.grip_id, b.grip_id));
            } else if a.freeairgrip_id == b.freeairgrip_id {
                transfer.insert((a.grip_id, b.grip_id));
            }
        }
    }
    (transit, transfer)
}

/// Minimum path weight by enumerating every simple path from an init node to
/// a goal node.
pub fn exhaustive_best(f: &Fixture, params: &GraphParams) -> Option<f64> {
    let mut nodes: Vec<Who> = f
        .grips
        .iter()
        .map(|g| Who::Grip { id: g.grip_id, placement: g.placement_id, grasp: g.freeairgrip_id })
        .collect();
    nodes.extend(f.init.iter().map(|&g| Who::Init(g)));
    nodes.extend(f.goal.iter().map(|&g| Who::Goal(g)));
    let n = nodes.len();
    let mut w = vec![vec![None; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (a, b) = (nodes[i], nodes[j]);
            let same_place = match (a, b) {
                (Who::Grip { placement: p, .. }, Who::Grip { placement: q, .. }) => p == q,
                (Who::Init(_), Who::Init(_)) | (Who::Goal(_), Who::Goal(_)) => true,
                _ => false,
            };
            w[i][j] = if same_place {
                Some(params.w_transit)
            } else if a.grasp() == b.grasp() {
                Some(params.w_transfer)
            } else {
                None
            };
        }
    }
    let mut best: Option<f64> = None;
    let mut on = vec![false; n];
    fn dfs(u: usize, d: f64, nodes: &[Who], w: &[Vec<Option<f64>>], on: &mut [bool], best: &mut Option<f64>) {
        if matches!(nodes[u], Who::Goal(_)) {
            if best.map_or(true, |b| d < b) {
                *best = Some(d);
            }
            return;
        }
        on[u] = true;
        for v in 0..nodes.len() {
            if let Some(x) = w[u][v] {
                if !on[v] {
                    dfs(v, d + x, nodes, w, on, best);
                }
            }
        }
        on[u] = false;
    }
    for s in 0..n {
        if matches!(nodes[s], Who::Init(_)) {
            dfs(s, 0.0, &nodes, &w, &mut on, &mut best);
        }
    }
    best
}

