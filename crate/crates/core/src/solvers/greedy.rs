use super::linesearch::{debias, line_search_or_zero};
use super::{argmin_by_index, SolveResult};
use crate::error::{Error, Result};
use crate::problem::{objective, SparseApproxProblem, WeightVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreedyConfig {
    /// Step size used to score candidates.
    pub tau: f64,
}

impl Default for GreedyConfig {
    fn default() -> Self {
        Self { tau: 1.0 }
    }
}

impl GreedyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::ConfigInvalid(format!("tau must be finite and > 0, got {}", self.tau)));
        }
        Ok(())
    }
}

/// First-order score `τ ∇f1(w)_j − α σ_j²` for every candidate.
pub fn greedy_scores(problem: &SparseApproxProblem, w: &[f64], tau: f64) -> Vec<f64> {
    let residual = problem.residual(w);
    let grad = problem.grad_from_residual(w, &residual);
    let alpha = problem.alpha();
    grad.iter().zip(problem.sigma2()).map(|(g, s2)| tau * g - alpha * s2).collect()
}

/// Greedy forward selection.
///
/// Each of the `b` steps adds the unselected index with the lowest
/// first-order score, moves along that coordinate by an exact line search,
/// de-biases within the support and clamps negatives to zero.
pub fn greedy_solve(problem: &SparseApproxProblem, config: &GreedyConfig) -> Result<SolveResult> {
    config.validate()?;
    let n = problem.n();
    let b = problem.budget();
    if b > n {
        return Err(Error::BudgetExceedsPool { budget: b, pool: n });
    }

    let mut w = vec![0.0; n];
    let mut in_batch = vec![false; n];
    let mut selected = Vec::with_capacity(b);
    let mut trace = Vec::with_capacity(b);
    let mut unit = vec![0.0; n];

    for step in 1..=b {
        let scores = greedy_scores(problem, &w, config.tau);
        let j = argmin_by_index(scores.iter().copied().enumerate().filter(|(j, _)| !in_batch[*j]))
            .expect("fewer than b candidates remain");
        in_batch[j] = true;
        selected.push(j);

        unit[j] = 1.0;
        let mu = line_search_or_zero(problem, &unit, &w);
        unit[j] = 0.0;
        w[j] -= mu;
        let moved = debias(problem, &w)?;
        let clamped = WeightVector::clamped(moved);
        trace.push((step, objective(problem, &clamped)?));
        w = clamped.into_vec();
    }

    let w = WeightVector::clamped(w);
    let objective = objective(problem, &w)?;
    Ok(SolveResult { w, objective, trace, selected })
}
