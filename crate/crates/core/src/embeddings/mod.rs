//! Per-candidate embeddings and assembly of the acquisition problem.
//!
//! Every candidate `j` gets one vector `g_j(k)` per hypothetical label `k`,
//! either from centered losses across posterior samples or from the
//! last-layer loss gradient of the current model. Expectations over the
//! estimated label distribution are exact sums over the `K` classes.

mod calibration;

pub use calibration::{fit_temperature, mean_nll, CalibrationResult, TEMPERATURE_RANGE};

use ndarray::{Array1, Array2, Array3, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{softmax_rows, Classifier, Ensemble};
use crate::problem::SparseApproxProblem;

const SIMPLEX_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmbeddingMode {
    PosteriorSample,
    Gradient,
}

/// Row `j` is the estimated label distribution of candidate `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelDistribution {
    probs: Array2<f64>,
}

impl LabelDistribution {
    pub fn new(probs: Array2<f64>) -> Result<Self> {
        for (j, row) in probs.rows().into_iter().enumerate() {
            check_simplex(row.iter().copied(), j)?;
        }
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &Array2<f64> {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.nrows() == 0
    }

    pub fn classes(&self) -> usize {
        self.probs.ncols()
    }

    /// Shannon entropy of each row, in nats.
    pub fn entropies(&self) -> Vec<f64> {
        self.probs.rows().into_iter().map(|row| row.iter().filter(|p| **p > 0.0).map(|p| -p * p.ln()).sum()).collect()
    }
}

fn check_simplex(row: impl Iterator<Item = f64>, j: usize) -> Result<()> {
    let mut total = 0.0;
    for p in row {
        if !(p.is_finite() && p >= 0.0) {
            return Err(Error::InvalidDistribution(format!("row {j} has entry {p}")));
        }
        total += p;
    }
    if (total - 1.0).abs() > SIMPLEX_TOLERANCE {
        return Err(Error::InvalidDistribution(format!("row {j} sums to {total}")));
    }
    Ok(())
}

/// `g[j, k, :]` is the embedding of candidate `j` under label `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    g: Array3<f64>,
    mode: EmbeddingMode,
}

impl EmbeddingSet {
    pub fn new(g: Array3<f64>, mode: EmbeddingMode) -> Result<Self> {
        if !g.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidProblem("embedding entries must be finite".into()));
        }
        Ok(Self { g, mode })
    }

    pub fn tensor(&self) -> &Array3<f64> {
        &self.g
    }

    pub fn mode(&self) -> EmbeddingMode {
        self.mode
    }

    pub fn candidates(&self) -> usize {
        self.g.dim().0
    }

    pub fn classes(&self) -> usize {
        self.g.dim().1
    }

    pub fn dim(&self) -> usize {
        self.g.dim().2
    }
}

/// Centered, `1/√m`-scaled loss vectors for one candidate.
///
/// `losses` is `m × K` with `losses[i][k]` the loss under posterior sample
/// `i` and label `k`. Returns a `K × m` matrix whose row `k` is `g(k)`, so
/// that `‖g(k)‖²` is the sample variance of the losses.
pub fn build_sample_embedding(losses: ArrayView2<f64>) -> Result<Array2<f64>> {
    let (m, k) = losses.dim();
    if m == 0 {
        return Err(Error::EmptySampleSet);
    }
    let scale = 1.0 / (m as f64).sqrt();
    let mut out = Array2::zeros((k, m));
    for c in 0..k {
        let column = losses.column(c);
        let mean = column.sum() / m as f64;
        for (i, l) in column.iter().enumerate() {
            out[[c, i]] = scale * (l - mean);
        }
    }
    Ok(out)
}

/// Cross-entropy gradient with respect to the last linear layer,
/// `vec((p − e_label) ⊗ h)`, flattened class-major (length `K·d`).
pub fn build_gradient_embedding(probs_row: &[f64], features: &[f64], label: usize) -> Result<Vec<f64>> {
    check_simplex(probs_row.iter().copied(), 0)?;
    let k = probs_row.len();
    if label >= k {
        return Err(Error::LabelOutOfRange { label, classes: k });
    }
    let mut out = Vec::with_capacity(k * features.len());
    for (c, &p) in probs_row.iter().enumerate() {
        let coef = if c == label { p - 1.0 } else { p };
        out.extend(features.iter().map(|h| coef * h));
    }
    Ok(out)
}

/// Gradient embeddings for every row of `inputs` under every label, using
/// the model's own (uncalibrated) predictions.
pub fn gradient_embeddings(model: &Classifier, inputs: ArrayView2<f64>) -> Result<EmbeddingSet> {
    let probs = model.predict_proba(inputs)?;
    let h = model.features(inputs)?;
    let (n, k, d) = (inputs.nrows(), model.classes(), model.feature_dim());
    let mut g = Array3::zeros((n, k, k * d));
    for j in 0..n {
        let p = probs.row(j).to_vec();
        let hj = h.row(j).to_vec();
        for label in 0..k {
            let vector = build_gradient_embedding(&p, &hj, label)?;
            for (slot, x) in g.slice_mut(ndarray::s![j, label, ..]).iter_mut().zip(vector) {
                *slot = x;
            }
        }
    }
    EmbeddingSet::new(g, EmbeddingMode::Gradient)
}

/// Posterior-sample embeddings for every row of `inputs`; ensemble members
/// play the role of the posterior samples.
pub fn sample_embeddings(ensemble: &Ensemble, inputs: ArrayView2<f64>) -> Result<EmbeddingSet> {
    let tables = ensemble.loss_table(inputs)?;
    let (n, k, m) = (inputs.nrows(), ensemble.classes(), ensemble.len());
    let mut g = Array3::zeros((n, k, m));
    for (j, table) in tables.iter().enumerate() {
        let emb = build_sample_embedding(table.view())?;
        g.slice_mut(ndarray::s![j, .., ..]).assign(&emb);
    }
    EmbeddingSet::new(g, EmbeddingMode::PosteriorSample)
}

/// Assembles `(v, Φ, σ²)` from embeddings and label distributions.
///
/// With `ḡ_j = Σ_k P_jk g_j(k)`: `v = (1/n) Σ_j ḡ_j`, column `j` of Φ is
/// `ḡ_j / b`, and `σ_j = (1/n) Σ_k P_jk ‖g_j(k) − ḡ_j‖`.
pub fn assemble_problem(
    embeddings: &EmbeddingSet,
    dist: &LabelDistribution,
    alpha: f64,
    beta: f64,
    b: usize,
) -> Result<SparseApproxProblem> {
    let (n, k, m) = embeddings.g.dim();
    if dist.len() != n || dist.classes() != k {
        return Err(Error::DimensionMismatch(format!(
            "embeddings cover {n} candidates x {k} labels, distribution is {} x {}",
            dist.len(),
            dist.classes()
        )));
    }
    if n == 0 || m == 0 {
        return Err(Error::InvalidProblem("empty embedding set".into()));
    }
    if b == 0 || b > n {
        return Err(Error::BudgetExceedsPool { budget: b, pool: n });
    }
    let inv_n = 1.0 / n as f64;
    let inv_b = 1.0 / b as f64;

    let mut v = Array1::<f64>::zeros(m);
    let mut phi = Vec::with_capacity(m * n);
    let mut sigma2 = Vec::with_capacity(n);
    let mut mean = vec![0.0; m];
    for j in 0..n {
        let p = dist.probs.row(j);
        mean.iter_mut().for_each(|x| *x = 0.0);
        for c in 0..k {
            let g = embeddings.g.slice(ndarray::s![j, c, ..]);
            for (acc, x) in mean.iter_mut().zip(g.iter()) {
                *acc += p[c] * x;
            }
        }
        let mut sigma = 0.0;
        for c in 0..k {
            if p[c] == 0.0 {
                continue;
            }
            let g = embeddings.g.slice(ndarray::s![j, c, ..]);
            let dist_sq: f64 = g.iter().zip(&mean).map(|(x, mu)| (x - mu) * (x - mu)).sum();
            sigma += p[c] * dist_sq.sqrt();
        }
        sigma *= inv_n;
        sigma2.push(sigma * sigma);
        for (vi, x) in v.iter_mut().zip(&mean) {
            *vi += x;
        }
        phi.extend(mean.iter().map(|x| x * inv_b));
    }
    v *= inv_n;
    SparseApproxProblem::new(v.to_vec(), phi, sigma2, alpha, beta, b)
}

/// Source of the label distribution for the unlabeled pool.
#[derive(Debug, Clone, Copy)]
pub enum Predictor<'a> {
    /// A single model with its calibration temperature.
    Calibrated { model: &'a Classifier, temperature: f64 },
    /// Mean of ensemble member predictions (no temperature).
    Ensemble(&'a Ensemble),
}

pub fn predictive_distribution(predictor: Predictor<'_>, inputs: ArrayView2<f64>) -> Result<LabelDistribution> {
    let probs = match predictor {
        Predictor::Calibrated { model, temperature } => {
            if !(temperature.is_finite() && temperature > 0.0) {
                return Err(Error::ConfigInvalid(format!("temperature must be > 0, got {temperature}")));
            }
            let mut z = model.predict_logits(inputs)?;
            softmax_rows(&mut z, temperature);
            z
        }
        Predictor::Ensemble(ensemble) => ensemble.predict_proba(inputs)?,
    };
    LabelDistribution::new(probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::FeatureMap;
    use ndarray::{array, Array3};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_point_centering() {
        let g = build_sample_embedding(array![[1.0], [3.0]].view()).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert_eq!(g, array![[-s, s]]);
        let flat = build_sample_embedding(array![[2.5], [2.5], [2.5]].view()).unwrap();
        assert!(flat.iter().all(|x| *x == 0.0));
        assert_eq!(build_sample_embedding(Array2::zeros((0, 3)).view()), Err(Error::EmptySampleSet));
    }

    #[test]
    fn sample_embedding_is_centered_with_variance_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let losses = Array2::from_shape_fn((5, 3), |_| rng.random_range(0.0..3.0));
        let g = build_sample_embedding(losses.view()).unwrap();
        for c in 0..3 {
            let col = losses.column(c);
            let mean = col.sum() / 5.0;
            let var = col.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / 5.0;
            let row = g.row(c);
            assert!(row.sum().abs() < 1e-12);
            assert!((row.dot(&row) - var).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_embedding_cases() {
        assert_eq!(build_gradient_embedding(&[0.0, 1.0], &[3.0, -1.0], 1).unwrap(), vec![0.0; 4]);
        let g = build_gradient_embedding(&[0.7, 0.3], &[2.0], 0).unwrap();
        assert!((g[0] + 0.6).abs() < 1e-15 && (g[1] - 0.6).abs() < 1e-15);
        assert!(matches!(build_gradient_embedding(&[0.7, 0.2], &[2.0], 0), Err(Error::InvalidDistribution(_))));
    }

    #[test]
    fn gradient_embedding_norm_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let raw: Vec<f64> = (0..4).map(|_| rng.random_range(0.01..1.0)).collect();
            let total: f64 = raw.iter().sum();
            let p: Vec<f64> = raw.iter().map(|x| x / total).collect();
            let h: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let y = rng.random_range(0..4);
            let g = build_gradient_embedding(&p, &h, y).unwrap();
            let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
            let pe: f64 =
                p.iter().enumerate().map(|(c, pc)| (pc - if c == y { 1.0 } else { 0.0 }).powi(2)).sum::<f64>().sqrt();
            let hn = h.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - pe * hn).abs() < 1e-12);
        }
    }

    #[test]
    fn single_candidate_uniform_assembly() {
        let g = Array3::from_shape_vec((1, 2, 2), vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let emb = EmbeddingSet::new(g, EmbeddingMode::Gradient).unwrap();
        let dist = LabelDistribution::new(array![[0.5, 0.5]]).unwrap();
        let p = assemble_problem(&emb, &dist, 1.0, 0.0, 1).unwrap();
        assert_eq!(p.v().to_vec(), vec![0.5, 0.5]);
        assert_eq!(p.phi_col_major(), vec![0.5, 0.5]);
        assert!((p.sigma2()[0].sqrt() - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn point_mass_rows_have_zero_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = Array3::from_shape_fn((4, 3, 5), |_| rng.random_range(-1.0..1.0));
        let emb = EmbeddingSet::new(g, EmbeddingMode::Gradient).unwrap();
        let dist =
            LabelDistribution::new(array![[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]]).unwrap();
        let p = assemble_problem(&emb, &dist, 1.0, 0.0, 2).unwrap();
        assert!(p.sigma2().iter().all(|s| *s == 0.0));
    }

    #[test]
    fn distribution_validation() {
        assert!(LabelDistribution::new(array![[0.5, 0.6]]).is_err());
        assert!(LabelDistribution::new(array![[-0.1, 1.1]]).is_err());
        let d = LabelDistribution::new(array![[0.5, 0.5], [1.0, 0.0]]).unwrap();
        let h = d.entropies();
        assert!((h[0] - 2f64.ln()).abs() < 1e-15);
        assert_eq!(h[1], 0.0);
    }

    #[test]
    fn assembly_dimension_checks() {
        let emb = EmbeddingSet::new(Array3::zeros((2, 2, 3)), EmbeddingMode::Gradient).unwrap();
        let dist = LabelDistribution::new(array![[0.5, 0.5]]).unwrap();
        assert!(matches!(assemble_problem(&emb, &dist, 0.0, 0.0, 1), Err(Error::DimensionMismatch(_))));
    }

    fn toy_model() -> Classifier {
        Classifier::from_parameters(
            array![[1.0, -1.0], [0.5, 2.0], [0.0, 0.3]],
            array![0.1, 0.0, -0.2],
            2,
            FeatureMap::Identity,
        )
        .unwrap()
    }

    #[test]
    fn identical_ensemble_matches_single_member() {
        let m = toy_model();
        let x = array![[0.2, 1.0], [-1.0, 0.5]];
        let ens = Ensemble::from_members(vec![m.clone(), m.clone(), m.clone()]).unwrap();
        let single = predictive_distribution(Predictor::Calibrated { model: &m, temperature: 1.0 }, x.view()).unwrap();
        let mean = predictive_distribution(Predictor::Ensemble(&ens), x.view()).unwrap();
        for (a, b) in single.probs().iter().zip(mean.probs().iter()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn high_temperature_is_nearly_uniform() {
        let m = toy_model();
        let x = array![[5.0, -4.0], [0.0, 9.0]];
        let d = predictive_distribution(Predictor::Calibrated { model: &m, temperature: 1e3 }, x.view()).unwrap();
        for p in d.probs().iter() {
            assert!(*p <= 1.0 / 3.0 + 0.01);
        }
    }

    #[test]
    fn two_member_mean() {
        let a = Classifier::from_parameters(array![[0.0], [0.0]], array![800.0, 0.0], 1, FeatureMap::Identity).unwrap();
        let b = Classifier::from_parameters(array![[0.0], [0.0]], array![0.0, 800.0], 1, FeatureMap::Identity).unwrap();
        let ens = Ensemble::from_members(vec![a, b]).unwrap();
        let d = predictive_distribution(Predictor::Ensemble(&ens), array![[0.0]].view()).unwrap();
        assert_eq!(d.probs(), &array![[0.5, 0.5]]);
    }

    #[test]
    fn untrained_predictor_errors() {
        let m = Classifier::new(2, 1, FeatureMap::Identity).unwrap();
        let r = predictive_distribution(Predictor::Calibrated { model: &m, temperature: 1.0 }, array![[0.0]].view());
        assert_eq!(r, Err(Error::UntrainedModel));
    }
}
