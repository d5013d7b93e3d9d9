//! Solvers for the sparsity-constrained acquisition problem.
//!
//! Two practical solvers share an exact line search and an in-support
//! de-bias step: a greedy forward selection ([`greedy_solve`]) and a
//! proximal iterative hard thresholding scheme with momentum
//! ([`iht_solve`]). [`brute_force_solve`] enumerates supports and is only
//! meant as a validation oracle on tiny instances.

mod greedy;
mod iht;
mod linesearch;
mod oracle;
mod prox;

pub use greedy::{greedy_scores, greedy_solve, GreedyConfig};
pub use iht::{iht_solve, IhtConfig};
pub use linesearch::{debias, line_search, DEGENERATE_CURVATURE};
pub use oracle::{brute_force_solve, BRUTE_FORCE_LIMIT};
pub use prox::{prox_hard_threshold, prox_select, ProxMode};

use crate::problem::WeightVector;

/// Output of a solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub w: WeightVector,
    /// `f1 + f2` at `w`.
    pub objective: f64,
    /// `(iteration, objective)` after each step.
    pub trace: Vec<(usize, f64)>,
    /// The selected batch. For greedy this is the tracked index set in
    /// insertion order (always `b` entries); otherwise it is `support(w)`.
    pub selected: Vec<usize>,
}

/// Stable `argmin` with the smallest index winning ties.
pub(crate) fn argmin_by_index<I>(items: I) -> Option<usize>
where
    I: IntoIterator<Item = (usize, f64)>,
{
    let mut best: Option<(usize, f64)> = None;
    for (j, score) in items {
        match best {
            Some((_, s)) if score >= s => {}
            _ => best = Some((j, score)),
        }
    }
    best.map(|(j, _)| j)
}
