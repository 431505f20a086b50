//! Planar domains bounded by circular arcs, segments and radial curves, each
//! carrying a Steklov, Neumann or Dirichlet condition.

mod arc;
mod boundary;
mod domain;
mod family;
mod intersect;
pub mod io;
mod reflect;
mod union;
mod vec2;

pub use arc::{angle_param, Arc, ArcKind, Condition, RadialCurve, Similarity, WeightProfile};
pub use boundary::{boundary_data, BoundaryData};
pub use domain::{Loop, LoopOrientation, PlanarDomain, ReflectionAxis, SymmetryDescriptor};
pub use family::{make_family, BlobSymmetry, FamilySpec};
pub use intersect::intersect;
pub use reflect::{clip_half, double, line_params};
pub use union::{union_of_disks, union_of_shapes, Shape};
pub use vec2::{wrap_angle, Vec2};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GeometryError {
    #[error("invalid arc: {0}")]
    InvalidArc(String),
    #[error("loop is not closed: gap {gap:e} after arc {index}")]
    NotClosed { index: usize, gap: f64 },
    #[error("loop is not simple: arcs {0} and {1} intersect")]
    NotSimple(usize, usize),
    #[error("invalid loop layout: {0}")]
    InvalidLayout(String),
    #[error("union of shapes is disconnected")]
    DisconnectedUnion,
    #[error("union of shapes encloses a hole")]
    HoleDetected,
    #[error("malformed boundary decomposition: {0}")]
    MalformedDecomposition(String),
    #[error("boundary piece not on the reflection axis: {0}")]
    NotOnAxis(String),
    #[error("Steklov arc meets the axis at angle {angle} rad off orthogonal")]
    NonOrthogonalJunction { angle: f64 },
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("constructor pieces overlap: {0}")]
    OverlapViolation(String),
    #[error("domain is not symmetric: {0}")]
    NotSymmetric(String),
    #[error("malformed domain file: {0}")]
    Format(String),
}

/// Exact length of an arc.
pub fn length(arc: &Arc) -> f64 {
    arc.length()
}

/// Image of a domain under a similarity; conditions, weights and recorded
/// symmetries are carried along.
pub fn transform(domain: &PlanarDomain, m: &Similarity) -> PlanarDomain {
    domain.transformed(m)
}
