//! Batch active learning as sparse approximation.
//!
//! Each acquisition round is posed as choosing a nonnegative `b`-sparse weight
//! vector over the unlabeled pool whose weighted loss approximates the
//! full-pool loss, while rewarding points with high label uncertainty. The
//! resulting problem is solved by greedy forward selection or proximal
//! iterative hard thresholding.

pub mod bench;
pub mod cli;
pub mod data;
pub mod embeddings;
pub mod error;
pub mod harness;
pub mod io;
pub mod models;
pub mod problem;
pub mod solvers;

pub use error::{Error, Result};
pub use problem::{eval_f1, eval_f2, grad_f1, objective, SparseApproxProblem, WeightVector};
