//! Reverse-mode automatic differentiation over dense matrix nodes.
//!
//! Every node holds an `n × k` matrix; per-point quantities are stored one point per row so a
//! whole collocation family is evaluated with a handful of matrix products. Derivatives of
//! network outputs with respect to network inputs are built as new graph nodes by forward-mode
//! rules ([`Graph::input_derivative`]), which keeps them differentiable with respect to the
//! network parameters.

mod graph;
mod matrix;

pub use graph::{Bindings, Evaluation, GradWorkspace, Graph, LeafKind, NodeId, Op};
pub use matrix::Matrix;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AutodiffError {
    #[error("leaf `{name}` ({node:?}) has no assigned value")]
    UnassignedLeaf { node: NodeId, name: String },
    #[error("binding for `{name}` has shape {found:?}, expected {expected:?}")]
    BindingShape { name: String, expected: (usize, usize), found: (usize, usize) },
    #[error("node {0:?} is not part of this graph")]
    NotInGraph(NodeId),
    #[error("node {0:?} is not an input leaf")]
    NotAnInput(NodeId),
    #[error("graph has not been evaluated up to the requested root")]
    NotEvaluated,
    #[error("unsupported operation `{op}` for input differentiation: {reason}")]
    Unsupported { op: &'static str, reason: &'static str },
}
