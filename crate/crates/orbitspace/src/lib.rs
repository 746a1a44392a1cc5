//! Finite combinatorial models of flows and the invariants built on them:
//! abstract weak orbit spaces, limit and boundary relations, Morse graphs,
//! surface invariants and box-grid approximations of planar vector fields.

pub mod corpus;
pub mod dot;
pub mod error;
pub mod expr;
pub mod graph;
pub mod grid;
pub mod iso;
pub mod model;
pub mod morse;
pub mod quotient;
pub mod random;
pub mod relations;
pub mod surface;
pub mod suspension;
pub mod topology;

pub use error::{Error, Result};
pub use model::{Flags, FlowModel, Granularity, Kind, NodeId, OrbitNode, PeriodType, SurfaceTag};
