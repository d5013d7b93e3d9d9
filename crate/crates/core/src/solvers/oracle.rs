use super::SolveResult;
use crate::error::{Error, Result};
use crate::problem::{SparseApproxProblem, WeightVector};

/// Maximum number of supports the exhaustive oracle will enumerate.
pub const BRUTE_FORCE_LIMIT: u64 = 1_000_000;

const PG_TOLERANCE: f64 = 1e-10;
const PG_MAX_ITERATIONS: usize = 100_000;

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Exhaustive search over every support of size exactly `b`.
///
/// Each support is scored by the nonnegative minimum of `f1` restricted to it
/// (projected gradient descent with exact, feasibility-capped steps) plus the
/// full variance reward `−α Σ_{j∈S} σ_j²`. The smallest value wins, with the
/// lexicographically first support kept on ties. `objective` reports that
/// infimum value; `selected` is the winning support.
pub fn brute_force_solve(problem: &SparseApproxProblem) -> Result<SolveResult> {
    let n = problem.n();
    let b = problem.budget();
    if b > n {
        return Err(Error::BudgetExceedsPool { budget: b, pool: n });
    }
    if binomial(n, b) > BRUTE_FORCE_LIMIT {
        return Err(Error::ProblemTooLarge { n, b, limit: BRUTE_FORCE_LIMIT });
    }

    let mut support: Vec<usize> = (0..b).collect();
    let mut best: Option<(f64, Vec<usize>, Vec<f64>)> = None;
    let mut trace = Vec::new();
    let mut count = 0;
    loop {
        let (f1_value, x) = restricted_nnls(problem, &support);
        let reward: f64 = support.iter().map(|&j| problem.sigma2()[j]).sum();
        let value = f1_value - problem.alpha() * reward;
        count += 1;
        if best.as_ref().is_none_or(|(v, _, _)| value < *v) {
            best = Some((value, support.clone(), x));
            trace.push((count, value));
        }
        if !next_combination(&mut support, n) {
            break;
        }
    }

    let (value, selected, x) = best.expect("at least one support");
    let mut w = vec![0.0; n];
    for (&j, &xj) in selected.iter().zip(&x) {
        w[j] = xj;
    }
    let w = WeightVector::clamped(w);
    Ok(SolveResult { w, objective: value, trace, selected })
}

/// Advances `c` to the next `k`-combination of `0..n` in lexicographic order.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for t in i + 1..k {
                c[t] = c[t - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Minimizes `f1` over nonnegative `w` supported on `support`.
///
/// Returns the full-length `f1` value and the in-support coordinates.
fn restricted_nnls(problem: &SparseApproxProblem, support: &[usize]) -> (f64, Vec<f64>) {
    let m = problem.m();
    let k = support.len();
    let beta = problem.beta();
    let v = problem.v();
    let cols: Vec<Vec<f64>> = support.iter().map(|&j| problem.column(j).to_vec()).collect();
    // Coordinates outside the support sit at zero and pay β each.
    let outside = beta * (problem.n() - k) as f64;

    let residual = |x: &[f64]| -> Vec<f64> {
        let mut r: Vec<f64> = v.iter().map(|vi| -vi).collect();
        for (col, &xj) in cols.iter().zip(x) {
            for (ri, ci) in r.iter_mut().zip(col) {
                *ri += ci * xj;
            }
        }
        r
    };
    let value = |x: &[f64]| -> f64 {
        let r = residual(x);
        r.iter().map(|t| t * t).sum::<f64>() + beta * x.iter().map(|t| (t - 1.0) * (t - 1.0)).sum::<f64>() + outside
    };

    let mut x = vec![0.0; k];
    let mut phi_u = vec![0.0; m];
    for _ in 0..PG_MAX_ITERATIONS {
        let r = residual(&x);
        let mut u: Vec<f64> = cols
            .iter()
            .zip(&x)
            .map(|(col, &xj)| 2.0 * col.iter().zip(&r).map(|(c, ri)| c * ri).sum::<f64>() + 2.0 * beta * (xj - 1.0))
            .collect();
        // project: a coordinate pinned at zero with an outward gradient stays put
        for (uj, &xj) in u.iter_mut().zip(&x) {
            if xj <= 0.0 && *uj > 0.0 {
                *uj = 0.0;
            }
        }
        let norm = u.iter().map(|t| t * t).sum::<f64>().sqrt();
        if norm <= PG_TOLERANCE {
            break;
        }

        phi_u.iter_mut().for_each(|t| *t = 0.0);
        for (col, &uj) in cols.iter().zip(&u) {
            for (pi, ci) in phi_u.iter_mut().zip(col) {
                *pi += ci * uj;
            }
        }
        let num: f64 = r.iter().zip(&phi_u).map(|(a, c)| a * c).sum::<f64>()
            + beta * x.iter().zip(&u).map(|(xj, uj)| (xj - 1.0) * uj).sum::<f64>();
        let den: f64 = phi_u.iter().map(|t| t * t).sum::<f64>() + beta * u.iter().map(|t| t * t).sum::<f64>();
        if den <= super::DEGENERATE_CURVATURE {
            break;
        }
        let mut mu = num / den;
        // cap the step where the first coordinate reaches zero
        let mut blocking = None;
        for (j, (&xj, &uj)) in x.iter().zip(&u).enumerate() {
            if uj > 0.0 {
                let limit = xj / uj;
                if limit < mu {
                    mu = limit;
                    blocking = Some(j);
                }
            }
        }
        if mu <= 0.0 && blocking.is_none() {
            break;
        }
        for (xj, uj) in x.iter_mut().zip(&u) {
            *xj = (*xj - mu * uj).max(0.0);
        }
        if let Some(j) = blocking {
            x[j] = 0.0;
        }
    }
    (value(&x), x)
}
