//! Roadmap regrasp graph over tabletop grips, pose connection and search.

mod search;

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use search::{
    connect_pose, search, ConnectedPose, ManipulationSequence, Overlay, QueryContext, QueryError,
    Role, Stage,
    Step, TempGrip,
};

use crate::store::{Store, StoreError};
use crate::Pose;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphParams {
    pub w_transfer: f64,
    pub w_transit: f64,
    /// Groups larger than this are joined through a hub node instead of a
    /// clique.
    pub star_threshold: usize,
}

impl Default for GraphParams {
    fn default() -> Self {
        Self { w_transfer: 1.0, w_transit: 10.0, star_threshold: 200 }
    }
}

impl GraphParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.w_transfer > 0.0 && self.w_transit > 0.0) {
            return Err("edge weights must be positive".into());
        }
        if self.star_threshold < 2 {
            return Err("star_threshold must be at least 2".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Transfer,
    Transit,
}

impl EdgeKind {
    pub fn name(self) -> &'static str {
        match self {
            EdgeKind::Transfer => "transfer",
            EdgeKind::Transit => "transit",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub to: usize,
    pub weight: f64,
    pub kind: EdgeKind,
}

/// A feasible tabletop grip.
#[derive(Clone, Debug, PartialEq)]
pub struct GripNode {
    pub grip_id: i64,
    pub placement_id: i64,
    pub freeairgrip_id: i64,
    /// World hand pose.
    pub hand_pose: Pose,
    pub jaw_width: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Grip(GripNode),
    /// Center of a star replacing a large clique; `key` is the shared
    /// freeairgrip id (transfer) or tabletop placement id (transit).
    Hub { kind: EdgeKind, key: i64 },
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("grip {grip} refers to unknown tabletop placement {placement}")]
    MissingPlacement { grip: i64, placement: i64 },
}

#[derive(Clone, Debug)]
pub struct RegraspGraph {
    pub params: GraphParams,
    /// Grip nodes first (ascending grip id), hubs after.
    pub nodes: Vec<Node>,
    pub adjacency: Vec<Vec<Edge>>,
    pub grip_count: usize,
    /// World pose of every tabletop placement referenced by a node.
    pub placement_poses: HashMap<i64, Pose>,
    by_grasp: BTreeMap<i64, Vec<usize>>,
    by_placement: BTreeMap<i64, Vec<usize>>,
}

impl RegraspGraph {
    /// Builds from feasible grips; they are sorted by grip id first.
    pub fn from_nodes(
        mut grips: Vec<GripNode>,
        placement_poses: HashMap<i64, Pose>,
        params: GraphParams,
    ) -> Result<Self, GraphError> {
        grips.sort_by_key(|g| g.grip_id);
        grips.dedup_by_key(|g| g.grip_id);
        for g in &grips {
            if !placement_poses.contains_key(&g.placement_id) {
                return Err(GraphError::MissingPlacement { grip: g.grip_id, placement: g.placement_id });
            }
        }
        let mut by_grasp: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        let mut by_placement: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for (i, g) in grips.iter().enumerate() {
            by_grasp.entry(g.freeairgrip_id).or_default().push(i);
            by_placement.entry(g.placement_id).or_default().push(i);
        }
        let grip_count = grips.len();
        let mut graph = Self {
            params,
            nodes: grips.into_iter().map(Node::Grip).collect(),
            adjacency: vec![Vec::new(); grip_count],
            grip_count,
            placement_poses,
            by_grasp,
            by_placement,
        };
        let groups: Vec<(EdgeKind, i64, Vec<usize>)> = graph
            .by_placement
            .iter()
            .map(|(k, v)| (EdgeKind::Transit, *k, v.clone()))
            .chain(graph.by_grasp.iter().map(|(k, v)| (EdgeKind::Transfer, *k, v.clone())))
            .collect();
        for (kind, key, members) in groups {
            graph.join_group(kind, key, &members);
        }
        Ok(graph)
    }

    fn add_edge(&mut self, a: usize, b: usize, weight: f64, kind: EdgeKind) {
        self.adjacency[a].push(Edge { to: b, weight, kind });
        self.adjacency[b].push(Edge { to: a, weight, kind });
    }

    fn join_group(&mut self, kind: EdgeKind, key: i64, members: &[usize]) {
        if members.len() < 2 {
            return;
        }
        let w = self.weight(kind);
        if members.len() > self.params.star_threshold {
            let hub = self.nodes.len();
            self.nodes.push(Node::Hub { kind, key });
            self.adjacency.push(Vec::new());
            for &m in members {
                self.add_edge(m, hub, 0.5 * w, kind);
            }
            return;
        }
        for (i, &a) in members.iter().enumerate() {
            for &b in &members[i + 1..] {
                if kind == EdgeKind::Transfer && self.grip(a).placement_id == self.grip(b).placement_id {
                    // same grasp at the same placement counts as transit
                    continue;
                }
                self.add_edge(a, b, w, kind);
            }
        }
    }

    pub fn weight(&self, kind: EdgeKind) -> f64 {
        match kind {
            EdgeKind::Transfer => self.params.w_transfer,
            EdgeKind::Transit => self.params.w_transit,
        }
    }

    /// Panics when `i` is a hub.
    pub fn grip(&self, i: usize) -> &GripNode {
        match &self.nodes[i] {
            Node::Grip(g) => g,
            Node::Hub { .. } => panic!("node {i} is a hub"),
        }
    }

    pub fn grips(&self) -> impl Iterator<Item = &GripNode> {
        self.nodes[..self.grip_count].iter().map(|n| match n {
            Node::Grip(g) => g,
            Node::Hub { .. } => unreachable!(),
        })
    }

    pub fn nodes_with_grasp(&self, freeairgrip_id: i64) -> &[usize] {
        self.by_grasp.get(&freeairgrip_id).map_or(&[], |v| v.as_slice())
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(|a| a.len()).sum::<usize>() / 2
    }

    /// Grip-id pairs related by `kind`, with star groups expanded, sorted.
    pub fn logical_edges(&self, kind: EdgeKind) -> Vec<(i64, i64)> {
        let groups = match kind {
            EdgeKind::Transfer => &self.by_grasp,
            EdgeKind::Transit => &self.by_placement,
        };
        let mut out = Vec::new();
        for members in groups.values() {
            for (i, &a) in members.iter().enumerate() {
                for &b in &members[i + 1..] {
                    let (ga, gb) = (self.grip(a), self.grip(b));
                    if kind == EdgeKind::Transfer && ga.placement_id == gb.placement_id {
                        continue;
                    }
                    out.push((ga.grip_id.min(gb.grip_id), ga.grip_id.max(gb.grip_id)));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Nodes are the grips whose three feasibility flags are set for `robot`.
    pub fn build(store: &Store, object: i64, robot: i64, params: GraphParams) -> Result<Self, GraphError> {
        let rows = store.feasible_grips(object, robot)?;
        let poses: HashMap<i64, Pose> = store
            .tabletop_placements(object)?
            .into_iter()
            .map(|p| (p.id, p.rotmat))
            .collect();
        let grips = rows
            .into_iter()
            .map(|r| GripNode {
                grip_id: r.id,
                placement_id: r.idtabletopplacements,
                freeairgrip_id: r.idfreeairgrip,
                hand_pose: r.rotmat,
                jaw_width: r.jawwidth,
            })
            .collect();
        Self::from_nodes(grips, poses, params)
    }

    /// Graphviz text; grip nodes `g<id>`, hubs `h<index>`.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph regrasp {\n");
        let name = |i: usize| match &self.nodes[i] {
            Node::Grip(g) => format!("g{}", g.grip_id),
            Node::Hub { .. } => format!("h{i}"),
        };
        for (i, n) in self.nodes.iter().enumerate() {
            match n {
                Node::Grip(g) => writeln!(
                    s,
                    "  {} [placement={}, freeairgrip={}, jawwidth=\"{}\"];",
                    name(i),
                    g.placement_id,
                    g.freeairgrip_id,
                    crate::pose::fmt_f64(g.jaw_width)
                ),
                Node::Hub { kind, key } => {
                    writeln!(s, "  {} [hub={}, key={}, shape=point];", name(i), kind.name(), key)
                }
            }
            .unwrap();
        }
        for (a, edges) in self.adjacency.iter().enumerate() {
            for e in edges.iter().filter(|e| e.to > a) {
                writeln!(
                    s,
                    "  {} -- {} [kind={}, weight=\"{}\"];",
                    name(a),
                    name(e.to),
                    e.kind.name(),
                    crate::pose::fmt_f64(e.weight)
                )
                .unwrap();
            }
        }
        s.push_str("}\n");
        s
    }
}
