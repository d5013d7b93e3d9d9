use super::linesearch::{debias, line_search_or_zero};
use super::prox::{prox_hard_threshold, ProxMode};
use super::SolveResult;
use crate::error::{Error, Result};
use crate::problem::{objective, SparseApproxProblem, WeightVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IhtConfig {
    pub iterations: usize,
    /// Stop once `‖w − w′‖∞` drops to this value. Zero only stops at an exact
    /// fixed point, which leaves the fixed-iteration result unchanged.
    pub stall_tolerance: f64,
    pub prox_mode: ProxMode,
}

impl Default for IhtConfig {
    fn default() -> Self {
        Self { iterations: 100, stall_tolerance: 0.0, prox_mode: ProxMode::Corrected }
    }
}

impl IhtConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::ConfigInvalid("iterations must be >= 1".into()));
        }
        if self.stall_tolerance.is_nan() || self.stall_tolerance < 0.0 {
            return Err(Error::ConfigInvalid("stall_tolerance must be >= 0".into()));
        }
        Ok(())
    }
}

/// Proximal iterative hard thresholding with momentum.
///
/// Per iteration: exact gradient step from the extrapolated point `z`,
/// proximal hard thresholding, in-support de-bias, clamping, then an exact
/// line search along `w − w′` for the momentum step.
pub fn iht_solve(problem: &SparseApproxProblem, config: &IhtConfig) -> Result<SolveResult> {
    config.validate()?;
    let n = problem.n();
    let b = problem.budget();
    if b > n {
        return Err(Error::BudgetExceedsPool { budget: b, pool: n });
    }
    let sigma2 = problem.sigma2().as_slice().expect("sigma2 is contiguous");
    let alpha = problem.alpha();

    let mut w = WeightVector::zeros(n);
    let mut z = vec![0.0; n];
    let mut trace = Vec::with_capacity(config.iterations);

    for iteration in 1..=config.iterations {
        let previous = w.as_slice().to_vec();

        let residual = problem.residual(&z);
        let grad = problem.grad_from_residual(&z, &residual);
        let mu = line_search_or_zero(problem, &grad, &z);
        let s: Vec<f64> = z.iter().zip(&grad).map(|(zj, gj)| zj - mu * gj).collect();

        let thresholded = prox_hard_threshold(&s, sigma2, alpha, b, config.prox_mode)?;
        w = WeightVector::clamped(debias(problem, thresholded.as_slice())?);

        let step: Vec<f64> = w.as_slice().iter().zip(&previous).map(|(a, p)| a - p).collect();
        let momentum = line_search_or_zero(problem, &step, w.as_slice());
        z = w.as_slice().iter().zip(&step).map(|(wj, dj)| wj - momentum * dj).collect();

        trace.push((iteration, objective(problem, &w)?));

        let change = step.iter().fold(0.0_f64, |acc, d| acc.max(d.abs()));
        if change <= config.stall_tolerance {
            break;
        }
    }

    let objective = objective(problem, &w)?;
    let selected = w.support().to_vec();
    Ok(SolveResult { w, objective, trace, selected })
}
