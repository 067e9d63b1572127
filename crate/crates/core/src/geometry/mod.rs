//! Mesh ingestion, derived quantities, sampling, hulls and segmentation.

mod hull;
mod io;
mod mesh;
pub mod primitives;
mod sample;
mod segment;

use thiserror::Error;

pub use hull::{convex_hull, ConvexHull};
pub use io::{load_mesh, parse_mesh, to_obj, to_stl_ascii, to_stl_binary, MeshFormat};
pub use mesh::{angle_between, edge_adjacency, weld, TriangleMesh, WELD_TOLERANCE};
pub use sample::{sample_surface, SamplePoint, DEFAULT_DENSITY, DEFAULT_MAX_SAMPLES};
pub use segment::{
    oversegment, point_segment_distance, segment_conventional, triangle_facets, Facet,
    DEFAULT_TAU,
};

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("degenerate convex hull (fewer than 4 non-coplanar points)")]
    DegenerateHull,
    #[error("io: {0}")]
    Io(String),
}
