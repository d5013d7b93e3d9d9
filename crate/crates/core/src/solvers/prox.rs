use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::problem::WeightVector;

/// Support-selection rule for the proximal hard-thresholding step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProxMode {
    /// Keep the `b` largest benefits `α σ_j² + ½ [s_j]₊²`. This is the exact
    /// minimizer of `½‖w − s‖² + f2(w)` over `b`-sparse nonnegative `w`.
    #[default]
    Corrected,
    /// Keep the `b` smallest `½ [−s_j]₊² − α σ_j²`. Drops the cost `½ s_j²`
    /// paid by every excluded coordinate, so it can pick a worse support.
    PaperLiteral,
}

/// Selects the thresholded support `S*` (sorted ascending).
///
/// Runs in `O(n)` on average via partial selection; ties go to the smaller index.
pub fn prox_select(s: &[f64], sigma2: &[f64], alpha: f64, b: usize, mode: ProxMode) -> Result<Vec<usize>> {
    let n = s.len();
    if sigma2.len() != n {
        return Err(Error::DimensionMismatch(format!("prox: s has length {n}, sigma2 has length {}", sigma2.len())));
    }
    if b > n {
        return Err(Error::BudgetExceedsPool { budget: b, pool: n });
    }
    if b == 0 {
        return Ok(Vec::new());
    }

    // Lower key = better candidate.
    let key: Vec<f64> = match mode {
        ProxMode::Corrected => s
            .iter()
            .zip(sigma2)
            .map(|(&sj, &s2)| {
                let pos = sj.max(0.0);
                -(alpha * s2 + 0.5 * pos * pos)
            })
            .collect(),
        ProxMode::PaperLiteral => s
            .iter()
            .zip(sigma2)
            .map(|(&sj, &s2)| {
                let neg = (-sj).max(0.0);
                0.5 * neg * neg - alpha * s2
            })
            .collect(),
    };
    let order = |a: &usize, c: &usize| -> Ordering { key[*a].total_cmp(&key[*c]).then(a.cmp(c)) };

    let mut idx: Vec<usize> = (0..n).collect();
    if b < n {
        idx.select_nth_unstable_by(b - 1, order);
        idx.truncate(b);
    }
    idx.sort_unstable();
    Ok(idx)
}

/// Proximal hard-thresholding step: `w = [[s]_{S*}]₊`.
///
/// A selected index with `s_j ≤ 0` gets weight 0; the selection still
/// credits its variance reward as an infimum that is not attained.
pub fn prox_hard_threshold(s: &[f64], sigma2: &[f64], alpha: f64, b: usize, mode: ProxMode) -> Result<WeightVector> {
    let support = prox_select(s, sigma2, alpha, b, mode)?;
    let mut w = vec![0.0; s.len()];
    for j in support {
        w[j] = s[j].max(0.0);
    }
    Ok(WeightVector::clamped(w))
}
