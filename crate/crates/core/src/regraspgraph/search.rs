use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Edge, EdgeKind, Node, RegraspGraph};
use crate::graspplan::GripperModel;
use crate::kinematics::{grip_feasibility, IkSolver, RetractionSpec};
use crate::placement::hits_table;
use crate::store::FreeAirGripRow;
use crate::Pose;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Init,
    Goal,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(match self {
            Role::Init => "init",
            Role::Goal => "goal",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Collision,
    Ik,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(match self {
            Stage::Collision => "table collision",
            Stage::Ik => "IK",
        })
    }
}

#[derive(Debug, Error)]
pub enum QueryError {
    #[error("{role} pose: no grasp survives the {stage} check ({candidates} candidates)")]
    Infeasible { role: Role, stage: Stage, candidates: usize },
    #[error("init and goal are not connected: init component has {init_component} nodes, goal component has {goal_component}")]
    Disconnected { init_component: usize, goal_component: usize },
}

/// Free grasp applied at a query pose.
#[derive(Clone, Debug, PartialEq)]
pub struct TempGrip {
    pub freeairgrip_id: i64,
    pub hand_pose: Pose,
    pub jaw_width: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConnectedPose {
    pub role: Role,
    pub pose: Pose,
    pub candidates: usize,
    pub collision_free: usize,
    /// Ascending freeairgrip id.
    pub grips: Vec<TempGrip>,
}

/// What [`connect_pose`] needs besides the graph.
#[derive(Clone, Copy, Debug)]
pub struct QueryContext<'a> {
    pub free_grips: &'a [FreeAirGripRow],
    pub gripper: &'a GripperModel,
    pub solver: &'a IkSolver,
    pub retraction: RetractionSpec,
    pub table_height: f64,
}

/// Transforms every free grasp by `pose` and keeps those clear of the table
/// and IK-feasible with both retractions.
pub fn connect_pose(ctx: &QueryContext, pose: &Pose, role: Role) -> Result<ConnectedPose, QueryError> {
    let candidates = ctx.free_grips.len();
    let clear: Vec<TempGrip> = ctx
        .free_grips
        .iter()
        .map(|f| TempGrip { freeairgrip_id: f.id, hand_pose: pose * &f.rotmat, jaw_width: f.jawwidth })
        .filter(|t| !hits_table(ctx.gripper, &t.hand_pose, t.jaw_width, ctx.table_height))
        .collect();
    if clear.is_empty() {
        return Err(QueryError::Infeasible { role, stage: Stage::Collision, candidates });
    }
    let collision_free = clear.len();
    let mut grips: Vec<TempGrip> = clear
        .into_iter()
        .filter(|t| grip_feasibility(ctx.solver, &t.hand_pose, &ctx.retraction).iter().all(|&b| b))
        .collect();
    if grips.is_empty() {
        return Err(QueryError::Infeasible { role, stage: Stage::Ik, candidates: collision_free });
    }
    grips.sort_by_key(|t| t.freeairgrip_id);
    Ok(ConnectedPose { role, pose: pose.clone(), candidates, collision_free, grips })
}

/// Per-query extension of a shared graph with init and goal nodes.
pub struct Overlay<'g> {
    pub graph: &'g RegraspGraph,
    pub init: ConnectedPose,
    pub goal: ConnectedPose,
    temp_adj: Vec<Vec<Edge>>,
    base_extra: HashMap<usize, Vec<Edge>>,
}

impl<'g> Overlay<'g> {
    pub fn new(graph: &'g RegraspGraph, init: ConnectedPose, goal: ConnectedPose) -> Self {
        let base = graph.nodes.len();
        let n_init = init.grips.len();
        let n_temp = n_init + goal.grips.len();
        let mut ov = Self {
            graph,
            init,
            goal,
            temp_adj: vec![Vec::new(); n_temp],
            base_extra: HashMap::new(),
        };
        let (wt, wr) = (graph.params.w_transfer, graph.params.w_transit);
        for (range, role_grips) in [(0..n_init, ov.init.grips.clone()), (n_init..n_temp, ov.goal.grips.clone())] {
            let idx: Vec<usize> = range.collect();
            for (i, &a) in idx.iter().enumerate() {
                for &b in &idx[i + 1..] {
                    ov.link(base + a, base + b, wr, EdgeKind::Transit);
                }
                for &n in graph.nodes_with_grasp(role_grips[i].freeairgrip_id) {
                    ov.link(base + a, n, wt, EdgeKind::Transfer);
                }
            }
        }
        for i in 0..n_init {
            for j in 0..ov.goal.grips.len() {
                if ov.init.grips[i].freeairgrip_id == ov.goal.grips[j].freeairgrip_id {
                    ov.link(base + i, base + n_init + j, wt, EdgeKind::Transfer);
                }
            }
        }
        ov
    }

    fn link(&mut self, a: usize, b: usize, weight: f64, kind: EdgeKind) {
        let base = self.graph.nodes.len();
        for (u, v) in [(a, b), (b, a)] {
            let e = Edge { to: v, weight, kind };
            if u >= base {
                self.temp_adj[u - base].push(e);
            } else {
                self.base_extra.entry(u).or_default().push(e);
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.graph.nodes.len() + self.temp_adj.len()
    }

    pub fn temp_index(&self, role: Role, i: usize) -> usize {
        self.graph.nodes.len() + if role == Role::Init { i } else { self.init.grips.len() + i }
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = &Edge> {
        let base = self.graph.nodes.len();
        let (a, b): (&[Edge], &[Edge]) = if u < base {
            (&self.graph.adjacency[u], self.base_extra.get(&u).map_or(&[], |v| v.as_slice()))
        } else {
            (&self.temp_adj[u - base], &[])
        };
        a.iter().chain(b.iter())
    }

    /// (temp grip index, roadmap grip id) pairs joined by transfer edges.
    pub fn roadmap_links(&self, role: Role) -> Vec<(usize, i64)> {
        let grips = if role == Role::Init { &self.init.grips } else { &self.goal.grips };
        let mut out = Vec::new();
        for i in 0..grips.len() {
            for e in self.neighbors(self.temp_index(role, i)) {
                if e.to < self.graph.grip_count {
                    out.push((i, self.graph.grip(e.to).grip_id));
                }
            }
        }
        out.sort_unstable();
        out
    }

    fn is_hub(&self, u: usize) -> bool {
        u < self.graph.nodes.len() && matches!(self.graph.nodes[u], Node::Hub { .. })
    }

    fn component_size(&self, sources: impl Iterator<Item = usize>) -> usize {
        let mut seen = vec![false; self.node_count()];
        let mut q: VecDeque<usize> = VecDeque::new();
        for s in sources {
            if !seen[s] {
                seen[s] = true;
                q.push_back(s);
            }
        }
        let mut n = 0;
        while let Some(u) = q.pop_front() {
            if !self.is_hub(u) {
                n += 1;
            }
            for e in self.neighbors(u) {
                if !seen[e.to] {
                    seen[e.to] = true;
                    q.push_back(e.to);
                }
            }
        }
        n
    }

    /// Grip data of a non-hub node: (placement pose, placement id if on the
    /// roadmap, grip).
    fn point(&self, u: usize) -> PathPoint {
        let base = self.graph.nodes.len();
        if u < base {
            let g = self.graph.grip(u);
            PathPoint {
                placement: self.graph.placement_poses[&g.placement_id].clone(),
                placement_id: Some(g.placement_id),
                grip_id: Some(g.grip_id),
                freeairgrip_id: g.freeairgrip_id,
                hand_pose: g.hand_pose.clone(),
                jaw_width: g.jaw_width,
            }
        } else {
            let t = u - base;
            let (pose, g) = if t < self.init.grips.len() {
                (&self.init.pose, &self.init.grips[t])
            } else {
                (&self.goal.pose, &self.goal.grips[t - self.init.grips.len()])
            };
            PathPoint {
                placement: pose.clone(),
                placement_id: None,
                grip_id: None,
                freeairgrip_id: g.freeairgrip_id,
                hand_pose: g.hand_pose.clone(),
                jaw_width: g.jaw_width,
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Key(f64, usize);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Key {
    fn cmp(&self, o: &Self) -> Ordering {
        self.0.total_cmp(&o.0).then(self.1.cmp(&o.1))
    }
}

struct PathPoint {
    placement: Pose,
    placement_id: Option<i64>,
    grip_id: Option<i64>,
    freeairgrip_id: i64,
    hand_pose: Pose,
    jaw_width: f64,
}

/// One carry: pick at one placement, place at another, same grasp.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub freeairgrip_id: i64,
    pub jaw_width: f64,
    /// Roadmap grip ids; absent for the query poses.
    pub pick_grip_id: Option<i64>,
    pub place_grip_id: Option<i64>,
    pub pick_placement_id: Option<i64>,
    pub place_placement_id: Option<i64>,
    pub pick_hand_pose: Pose,
    pub place_hand_pose: Pose,
    pub pick_placement: Pose,
    pub place_placement: Pose,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManipulationSequence {
    pub regrasp_count: usize,
    pub total_weight: f64,
    /// Edge kinds along the raw path with hubs collapsed.
    pub edge_kinds: Vec<EdgeKind>,
    pub steps: Vec<Step>,
}

impl ManipulationSequence {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sequence serializes")
    }
}

/// Uniform-cost search from any init node to any goal node; ties broken by
/// node index, i.e. grip id order.
pub fn search(ov: &Overlay) -> Result<ManipulationSequence, QueryError> {
    let n = ov.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut prev: Vec<Option<(usize, EdgeKind)>> = vec![None; n];
    let mut heap = BinaryHeap::new();
    for i in 0..ov.init.grips.len() {
        let s = ov.temp_index(Role::Init, i);
        dist[s] = 0.0;
        heap.push(Reverse(Key(0.0, s)));
    }
    let goal_start = ov.temp_index(Role::Goal, 0);
    let mut done = vec![false; n];
    let mut reached = None;
    while let Some(Reverse(Key(d, u))) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        if u >= goal_start {
            reached = Some(u);
            break;
        }
        for e in ov.neighbors(u) {
            let nd = d + e.weight;
            if nd < dist[e.to] {
                dist[e.to] = nd;
                prev[e.to] = Some((u, e.kind));
                heap.push(Reverse(Key(nd, e.to)));
            }
        }
    }
    let Some(end) = reached else {
        return Err(QueryError::Disconnected {
            init_component: ov.component_size((0..ov.init.grips.len()).map(|i| ov.temp_index(Role::Init, i))),
            goal_component: ov.component_size((0..ov.goal.grips.len()).map(|i| ov.temp_index(Role::Goal, i))),
        });
    };
    let mut nodes = vec![end];
    let mut kinds = Vec::new();
    let mut u = end;
    while let Some((p, k)) = prev[u] {
        nodes.push(p);
        kinds.push(k);
        u = p;
    }
    nodes.reverse();
    kinds.reverse();
    // collapse hubs: the two edges through a hub are one logical edge
    let mut points = vec![nodes[0]];
    let mut edge_kinds = Vec::new();
    for (i, &v) in nodes.iter().enumerate().skip(1) {
        if ov.is_hub(v) {
            continue;
        }
        points.push(v);
        edge_kinds.push(kinds[i - 1]);
    }
    let pts: Vec<PathPoint> = points.iter().map(|&p| ov.point(p)).collect();
    let mut steps: Vec<Step> = Vec::new();
    let mut chained = false;
    for (i, k) in edge_kinds.iter().enumerate() {
        let (a, b) = (&pts[i], &pts[i + 1]);
        match k {
            EdgeKind::Transit => chained = false,
            EdgeKind::Transfer if chained => {
                let s = steps.last_mut().unwrap();
                s.place_grip_id = b.grip_id;
                s.place_placement_id = b.placement_id;
                s.place_hand_pose = b.hand_pose.clone();
                s.place_placement = b.placement.clone();
            }
            EdgeKind::Transfer => {
                steps.push(Step {
                    freeairgrip_id: a.freeairgrip_id,
                    jaw_width: a.jaw_width,
                    pick_grip_id: a.grip_id,
                    place_grip_id: b.grip_id,
                    pick_placement_id: a.placement_id,
                    place_placement_id: b.placement_id,
                    pick_hand_pose: a.hand_pose.clone(),
                    place_hand_pose: b.hand_pose.clone(),
                    pick_placement: a.placement.clone(),
                    place_placement: b.placement.clone(),
                });
                chained = true;
            }
        }
    }
    Ok(ManipulationSequence {
        regrasp_count: edge_kinds.iter().filter(|k| **k == EdgeKind::Transit).count(),
        total_weight: dist[end],
        edge_kinds,
        steps,
    })
}
