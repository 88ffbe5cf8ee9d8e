//! Tree generation from the coproduct: R and Q, the Λ recursion, tree
//! extraction with weights, and the connected-from-1PI sums built on them.

mod canon;
mod graphs;
mod lambda;
mod propagator;
mod sigma;

use thiserror::Error;

use crate::algebra::AlgebraError;
use crate::functional::FunctionalError;

pub use graphs::{extract_trees, lambda_graphs, ordered_valence, GraphTensor, OrderedGraph, TreeGraph};
pub use lambda::{apply_q, lambda, lambda_step, pairgraph_lambda};
pub use propagator::{build_r, r_between, PropagatorMatrix, PropagatorRole};
pub use sigma::{sigma_components, sigma_from_tau, Mode, SigmaRecursive};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("propagator must be a {labels}x{labels} matrix")]
    PropagatorShape { labels: usize },
    #[error("propagator is not (graded) symmetric at ({row}, {col})")]
    AsymmetricPropagator { row: String, col: String },
    #[error("propagator couples labels of different parity at ({row}, {col})")]
    MixedParityPropagator { row: String, col: String },
    #[error("propagator is singular and has no inverse")]
    SingularPropagator,
    #[error("order {k} is below the minimum {min}")]
    InvalidOrder { k: usize, min: usize },
    #[error("term is not a tree ({vertices} vertices, {edges} edges); it carries no usable edge provenance")]
    NotATree { vertices: usize, edges: usize },
    #[error("too many {0}")]
    TooLarge(&'static str),
    #[error("{0}")]
    ModeMismatch(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Functional(#[from] FunctionalError),
}
