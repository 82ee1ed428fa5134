//! Exact computation and structural certification of shortest directed
//! networks connecting a source set to a sink set in a metric space.

pub mod analyzer;
pub mod error;
pub mod gen;
mod graph;
pub mod instance;
pub mod metric;
pub mod network;
pub mod reductions;
pub mod solver;

pub use error::{Error, Result};
pub use instance::Instance;
pub use metric::{Point, Space, SpaceKind};
pub use network::{Demand, Network, Role, Vertex, VertexId};
