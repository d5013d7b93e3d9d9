use crate::error::{Error, Result};
use crate::problem::SparseApproxProblem;

/// Denominators at or below this are treated as zero curvature.
pub const DEGENERATE_CURVATURE: f64 = 1e-300;

/// Exact minimizer of `μ ↦ f1(w − μu)`.
///
/// `f1` is quadratic along any line, so the optimal step has the closed form
/// `μ = (⟨Φw − v, Φu⟩ + β⟨w − 1, u⟩) / (‖Φu‖² + β‖u‖²)`.
pub fn line_search(problem: &SparseApproxProblem, direction: &[f64], point: &[f64]) -> Result<f64> {
    let n = problem.n();
    if direction.len() != n || point.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "line search expects vectors of length {n}, got direction {} and point {}",
            direction.len(),
            point.len()
        )));
    }
    let residual = problem.residual(point);
    let phi_u = problem.phi_times(direction);
    let beta = problem.beta();
    let mut reg_num = 0.0;
    let mut reg_den = 0.0;
    for (&u, &w) in direction.iter().zip(point) {
        if u != 0.0 {
            reg_num += (w - 1.0) * u;
            reg_den += u * u;
        }
    }
    let denominator = phi_u.dot(&phi_u) + beta * reg_den;
    if denominator <= DEGENERATE_CURVATURE {
        return Err(Error::DegenerateDirection);
    }
    Ok((residual.dot(&phi_u) + beta * reg_num) / denominator)
}

/// Like [`line_search`] but maps a degenerate direction to a zero step.
pub(crate) fn line_search_or_zero(problem: &SparseApproxProblem, direction: &[f64], point: &[f64]) -> f64 {
    line_search(problem, direction, point).unwrap_or(0.0)
}

/// One exact gradient step restricted to the nonzero coordinates of `point`.
///
/// The result is not clamped, so entries may turn negative; callers clamp.
/// `f1` never increases and the nonzero pattern never grows.
pub fn debias(problem: &SparseApproxProblem, point: &[f64]) -> Result<Vec<f64>> {
    if point.len() != problem.n() {
        return Err(Error::DimensionMismatch(format!(
            "de-bias expects a point of length {}, got {}",
            problem.n(),
            point.len()
        )));
    }
    let mut out = point.to_vec();
    if point.iter().all(|x| *x == 0.0) {
        return Ok(out);
    }
    let residual = problem.residual(point);
    let beta = problem.beta();
    let mut direction = vec![0.0; point.len()];
    let mut any = false;
    for (j, &wj) in point.iter().enumerate() {
        if wj != 0.0 {
            let g = 2.0 * problem.column(j).dot(&residual) + 2.0 * beta * (wj - 1.0);
            direction[j] = g;
            any |= g != 0.0;
        }
    }
    if !any {
        return Ok(out);
    }
    let mu = match line_search(problem, &direction, point) {
        Ok(mu) => mu,
        Err(_) => return Ok(out),
    };
    for (j, u) in direction.iter().enumerate() {
        if *u != 0.0 {
            out[j] -= mu * u;
        }
    }
    Ok(out)
}
