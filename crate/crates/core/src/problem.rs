//! The sparse approximation problem and its objective.
//!
//! The objective splits into a smooth quadratic part
//! `f1(w) = ‖v − Φw‖² + β‖w − 1‖²` and a discontinuous variance reward
//! `f2(w) = −α Σ_{w_j > 0} σ_j²`. Candidates are the columns of Φ.

use ndarray::{Array1, Array2, ArrayView1, ShapeBuilder};

use crate::error::{Error, Result};

/// The tuple `(v, Φ, σ², α, β, b)` defining one acquisition problem.
///
/// `phi` is stored column-major so each candidate's column is contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseApproxProblem {
    v: Array1<f64>,
    phi: Array2<f64>,
    sigma2: Array1<f64>,
    alpha: f64,
    beta: f64,
    b: usize,
}

impl SparseApproxProblem {
    /// Builds a problem from a column-major `phi` buffer of length `m * n`.
    pub fn new(
        v: Vec<f64>,
        phi_col_major: Vec<f64>,
        sigma2: Vec<f64>,
        alpha: f64,
        beta: f64,
        b: usize,
    ) -> Result<Self> {
        let m = v.len();
        let n = sigma2.len();
        if m == 0 || n == 0 {
            return Err(Error::InvalidProblem("m and n must be positive".into()));
        }
        if phi_col_major.len() != m * n {
            return Err(Error::DimensionMismatch(format!(
                "phi has {} entries, expected m*n = {}",
                phi_col_major.len(),
                m * n
            )));
        }
        let phi =
            Array2::from_shape_vec((m, n).f(), phi_col_major).map_err(|e| Error::DimensionMismatch(e.to_string()))?;
        Self::from_parts(Array1::from(v), phi, Array1::from(sigma2), alpha, beta, b)
    }

    pub fn from_parts(
        v: Array1<f64>,
        phi: Array2<f64>,
        sigma2: Array1<f64>,
        alpha: f64,
        beta: f64,
        b: usize,
    ) -> Result<Self> {
        let (m, n) = phi.dim();
        if m == 0 || n == 0 {
            return Err(Error::InvalidProblem("m and n must be positive".into()));
        }
        if v.len() != m {
            return Err(Error::DimensionMismatch(format!("v has length {}, expected m = {m}", v.len())));
        }
        if sigma2.len() != n {
            return Err(Error::DimensionMismatch(format!("sigma2 has length {}, expected n = {n}", sigma2.len())));
        }
        if !v.iter().all(|x| x.is_finite()) || !phi.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidProblem("v and phi must be finite".into()));
        }
        if !sigma2.iter().all(|s| s.is_finite() && *s >= 0.0) {
            return Err(Error::InvalidProblem("sigma2 entries must be finite and >= 0".into()));
        }
        if !(alpha.is_finite() && alpha >= 0.0) || !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::InvalidProblem("alpha and beta must be finite and >= 0".into()));
        }
        if b == 0 {
            return Err(Error::InvalidProblem("b must be positive".into()));
        }
        if b > n {
            return Err(Error::BudgetExceedsPool { budget: b, pool: n });
        }
        // Keep the column-major layout regardless of how the caller built phi.
        let phi = if phi.t().is_standard_layout() {
            phi
        } else {
            let mut owned = Array2::zeros((m, n).f());
            owned.assign(&phi);
            owned
        };
        Ok(Self { v, phi, sigma2, alpha, beta, b })
    }

    pub fn m(&self) -> usize {
        self.phi.nrows()
    }

    pub fn n(&self) -> usize {
        self.phi.ncols()
    }

    pub fn v(&self) -> &Array1<f64> {
        &self.v
    }

    pub fn phi(&self) -> &Array2<f64> {
        &self.phi
    }

    pub fn sigma2(&self) -> &Array1<f64> {
        &self.sigma2
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn budget(&self) -> usize {
        self.b
    }

    /// Column `j` of Φ.
    pub fn column(&self, j: usize) -> ArrayView1<'_, f64> {
        self.phi.column(j)
    }

    /// Column-major copy of Φ.
    pub fn phi_col_major(&self) -> Vec<f64> {
        self.phi.t().iter().copied().collect()
    }

    /// Returns a copy with different trade-off weights.
    pub fn with_weights(&self, alpha: f64, beta: f64) -> Result<Self> {
        Self::from_parts(self.v.clone(), self.phi.clone(), self.sigma2.clone(), alpha, beta, self.b)
    }

    pub fn with_budget(&self, b: usize) -> Result<Self> {
        Self::from_parts(self.v.clone(), self.phi.clone(), self.sigma2.clone(), self.alpha, self.beta, b)
    }

    /// `Φx`, touching only the nonzero entries of `x`.
    pub(crate) fn phi_times(&self, x: &[f64]) -> Array1<f64> {
        let mut out = Array1::zeros(self.m());
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                out.scaled_add(xj, &self.phi.column(j));
            }
        }
        out
    }

    /// `Φw − v`.
    pub(crate) fn residual(&self, w: &[f64]) -> Array1<f64> {
        let mut r = self.phi_times(w);
        r -= &self.v;
        r
    }

    /// `2Φᵀr + 2β(w − 1)` given the residual `r = Φw − v`.
    pub(crate) fn grad_from_residual(&self, w: &[f64], r: &Array1<f64>) -> Vec<f64> {
        let two_beta = 2.0 * self.beta;
        w.iter().enumerate().map(|(j, &wj)| 2.0 * self.phi.column(j).dot(r) + two_beta * (wj - 1.0)).collect()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "weight vector has length {len}, problem has n = {}",
                self.n()
            )));
        }
        Ok(())
    }
}

/// Nonnegative weights with a cached support `{ j : w_j > 0 }`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    w: Vec<f64>,
    support: Vec<usize>,
}

impl WeightVector {
    pub fn zeros(n: usize) -> Self {
        Self { w: vec![0.0; n], support: Vec::new() }
    }

    /// Builds a weight vector from nonnegative entries.
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if let Some(j) = w.iter().position(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::InvalidProblem(format!("weight {j} is {} (must be finite and >= 0)", w[j])));
        }
        Ok(Self::from_raw(w))
    }

    /// Clamps negative entries to zero.
    pub fn clamped(mut w: Vec<f64>) -> Self {
        for x in w.iter_mut() {
            // also maps -0.0 to +0.0
            if *x <= 0.0 {
                *x = 0.0;
            }
        }
        Self::from_raw(w)
    }

    fn from_raw(w: Vec<f64>) -> Self {
        let support = w.iter().enumerate().filter(|(_, x)| **x > 0.0).map(|(j, _)| j).collect();
        Self { w, support }
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.w
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn nnz(&self) -> usize {
        self.support.len()
    }
}

pub fn eval_f1(problem: &SparseApproxProblem, w: &WeightVector) -> Result<f64> {
    problem.check_len(w.len())?;
    Ok(f1_raw(problem, w.as_slice()))
}

pub fn eval_f2(problem: &SparseApproxProblem, w: &WeightVector) -> Result<f64> {
    problem.check_len(w.len())?;
    let reward: f64 = w.support().iter().map(|&j| problem.sigma2[j]).sum();
    Ok(-problem.alpha * reward)
}

/// `f1 + f2`.
pub fn objective(problem: &SparseApproxProblem, w: &WeightVector) -> Result<f64> {
    Ok(eval_f1(problem, w)? + eval_f2(problem, w)?)
}

pub fn grad_f1(problem: &SparseApproxProblem, w: &WeightVector) -> Result<Vec<f64>> {
    problem.check_len(w.len())?;
    Ok(grad_f1_raw(problem, w.as_slice()))
}

/// `f1` on an arbitrary (possibly negative) point.
pub(crate) fn f1_raw(problem: &SparseApproxProblem, w: &[f64]) -> f64 {
    let r = problem.residual(w);
    let reg: f64 = w.iter().map(|x| (x - 1.0) * (x - 1.0)).sum();
    r.dot(&r) + problem.beta * reg
}

pub(crate) fn grad_f1_raw(problem: &SparseApproxProblem, w: &[f64]) -> Vec<f64> {
    let r = problem.residual(w);
    problem.grad_from_residual(w, &r)
}
