//! Regrasp planning: antipodal grasp synthesis on over-segmented meshes,
//! stable tabletop placements, arm reachability, a relational cache of all
//! precomputed data and a roadmap regrasp graph answering reorientation
//! queries.

pub mod collision;
pub mod config;
pub mod export;
pub mod geometry;
pub mod graspplan;
pub mod kinematics;
pub mod pipeline;
pub mod placement;
pub mod pose;
pub mod regraspgraph;
pub mod store;

pub use config::{ConfigError, Workspace, WorkspaceConfig};
pub use geometry::{Facet, SamplePoint, TriangleMesh};
pub use graspplan::{GraspConfig, GripperModel};
pub use kinematics::{IkFeasibility, RetractionSpec, RobotModel};
pub use placement::{Placement, TabletopGrip, TabletopPlacement};
pub use pose::Pose;
pub use regraspgraph::{ManipulationSequence, RegraspGraph};
pub use store::Store;
