//! Exact secular calculus for Laplacians on marked metric graphs.
//!
//! Vertices carry delta or delta' matching conditions with one real coupling
//! constant each. The crate expands the secular determinant det(M(λ) − B)
//! exactly into trigonometric weight classes, decides isospectrality of two
//! coupling configurations on the same graph by the resulting
//! necessary-and-sufficient criterion, performs the graph reductions that
//! preserve isospectrality, and cross-checks everything against an
//! independent numeric eigenvalue solver.

pub mod error;
pub mod expansion;
pub mod graph;
pub mod iso;
pub mod mfunc;
pub mod reduction;
pub mod spectrum;
pub mod trig;

pub use error::{Error, Result};
pub use graph::{CouplingValue, CouplingVector, Edge, LengthSpec, MarkedGraph, Vertex, VertexType};
