//! Multinomial logistic regression, optionally over a fixed random tanh
//! feature lift, trained by full-batch gradient descent.
//!
//! Besides predictions, the model exposes what the acquisition step needs:
//! penultimate features `h(x)` for gradient embeddings and per-member
//! cross-entropy losses for posterior-sample embeddings.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Input lift applied before the linear layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FeatureMap {
    #[default]
    Identity,
    /// `h(x) = tanh(Ax + c)` with `A ~ N(0, 1/input_dim)` and `c ~ N(0, 1)`
    /// drawn once from `seed`.
    RandomTanh { width: usize, seed: u64 },
}

impl FeatureMap {
    pub fn output_dim(&self, input_dim: usize) -> usize {
        match self {
            FeatureMap::Identity => input_dim,
            FeatureMap::RandomTanh { width, .. } => *width,
        }
    }

    fn materialize(&self, input_dim: usize) -> Result<Option<Lift>> {
        match *self {
            FeatureMap::Identity => Ok(None),
            FeatureMap::RandomTanh { width, seed } => {
                if width == 0 {
                    return Err(Error::ConfigInvalid("feature lift width must be >= 1".into()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let scale = 1.0 / (input_dim.max(1) as f64).sqrt();
                let matrix = Array2::from_shape_fn((width, input_dim), |_| {
                    let x: f64 = StandardNormal.sample(&mut rng);
                    scale * x
                });
                let offset = Array1::from_shape_fn(width, |_| StandardNormal.sample(&mut rng));
                Ok(Some(Lift { matrix, offset }))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Lift {
    matrix: Array2<f64>,
    offset: Array1<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub seed: u64,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::ConfigInvalid("epochs must be >= 1".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::ConfigInvalid("learning_rate must be > 0".into()));
        }
        if !(self.weight_decay.is_finite() && self.weight_decay >= 0.0) {
            return Err(Error::ConfigInvalid("weight_decay must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classifier {
    classes: usize,
    input_dim: usize,
    feature_map: FeatureMap,
    lift: Option<Lift>,
    weights: Array2<f64>,
    bias: Array1<f64>,
    trained: bool,
}

impl Classifier {
    /// An untrained classifier with zero parameters.
    pub fn new(classes: usize, input_dim: usize, feature_map: FeatureMap) -> Result<Self> {
        if classes < 2 {
            return Err(Error::ConfigInvalid("need at least two classes".into()));
        }
        let lift = feature_map.materialize(input_dim)?;
        let d = feature_map.output_dim(input_dim);
        Ok(Self {
            classes,
            input_dim,
            feature_map,
            lift,
            weights: Array2::zeros((classes, d)),
            bias: Array1::zeros(classes),
            trained: false,
        })
    }

    /// A classifier with explicit parameters; `weights` is `K × d`.
    pub fn from_parameters(
        weights: Array2<f64>,
        bias: Array1<f64>,
        input_dim: usize,
        feature_map: FeatureMap,
    ) -> Result<Self> {
        let mut model = Self::new(weights.nrows(), input_dim, feature_map)?;
        if weights.ncols() != feature_map.output_dim(input_dim) || bias.len() != weights.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "weights {:?} and bias {} do not fit feature dimension {}",
                weights.dim(),
                bias.len(),
                feature_map.output_dim(input_dim)
            )));
        }
        if !weights.iter().chain(bias.iter()).all(|x| x.is_finite()) {
            return Err(Error::InvalidProblem("classifier parameters must be finite".into()));
        }
        model.weights = weights;
        model.bias = bias;
        model.trained = true;
        Ok(model)
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn feature_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn feature_map(&self) -> FeatureMap {
        self.feature_map
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn bias(&self) -> &Array1<f64> {
        &self.bias
    }

    pub fn is_trained(&self) -> bool {
        self.trained
    }

    /// `h(x)` for a single input.
    pub fn penultimate_features(&self, input: ArrayView1<f64>) -> Vec<f64> {
        match &self.lift {
            None => input.to_vec(),
            Some(lift) => {
                let pre = lift.matrix.dot(&input) + &lift.offset;
                pre.mapv(f64::tanh).to_vec()
            }
        }
    }

    /// `h(x)` for every row of `inputs`.
    pub fn features(&self, inputs: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_inputs(inputs)?;
        Ok(match &self.lift {
            None => inputs.to_owned(),
            Some(lift) => {
                let mut pre = inputs.dot(&lift.matrix.t());
                pre += &lift.offset;
                pre.mapv_into(f64::tanh)
            }
        })
    }

    pub fn predict_logits(&self, inputs: ArrayView2<f64>) -> Result<Array2<f64>> {
        if !self.trained {
            return Err(Error::UntrainedModel);
        }
        let h = self.features(inputs)?;
        Ok(self.logits_from_features(&h))
    }

    pub fn predict_proba(&self, inputs: ArrayView2<f64>) -> Result<Array2<f64>> {
        let mut z = self.predict_logits(inputs)?;
        softmax_rows(&mut z, 1.0);
        Ok(z)
    }

    pub fn predict(&self, inputs: ArrayView2<f64>) -> Result<Vec<usize>> {
        let z = self.predict_logits(inputs)?;
        Ok(z.rows().into_iter().map(|row| argmax(row.as_slice().unwrap_or(&row.to_vec()))).collect())
    }

    pub fn accuracy(&self, inputs: ArrayView2<f64>, labels: &[usize]) -> Result<f64> {
        if labels.is_empty() {
            return Ok(0.0);
        }
        let predicted = self.predict(inputs)?;
        let hits = predicted.iter().zip(labels).filter(|(p, y)| p == y).count();
        Ok(hits as f64 / labels.len() as f64)
    }

    /// Cross-entropy `−log p(label | input)`.
    pub fn loss(&self, input: ArrayView1<f64>, label: usize) -> Result<f64> {
        if !self.trained {
            return Err(Error::UntrainedModel);
        }
        if label >= self.classes {
            return Err(Error::LabelOutOfRange { label, classes: self.classes });
        }
        let h = Array1::from(self.penultimate_features(input));
        let z = self.weights.dot(&h) + &self.bias;
        Ok(log_sum_exp(z.as_slice().expect("contiguous")) - z[label])
    }

    fn logits_from_features(&self, h: &Array2<f64>) -> Array2<f64> {
        let mut z = h.dot(&self.weights.t());
        z += &self.bias;
        z
    }

    fn check_inputs(&self, inputs: ArrayView2<f64>) -> Result<()> {
        if inputs.ncols() != self.input_dim {
            return Err(Error::DimensionMismatch(format!(
                "inputs have {} columns, model expects {}",
                inputs.ncols(),
                self.input_dim
            )));
        }
        Ok(())
    }
}

/// Trains a classifier from a seeded `U[−0.01, 0.01]` initialization.
pub fn train(
    inputs: ArrayView2<f64>,
    labels: &[usize],
    classes: usize,
    feature_map: FeatureMap,
    config: &TrainConfig,
) -> Result<Classifier> {
    train_with_history(inputs, labels, classes, feature_map, config).map(|(model, _)| model)
}

/// Like [`train`], also returning the training objective before each update.
pub fn train_with_history(
    inputs: ArrayView2<f64>,
    labels: &[usize],
    classes: usize,
    feature_map: FeatureMap,
    config: &TrainConfig,
) -> Result<(Classifier, Vec<f64>)> {
    config.validate()?;
    if inputs.nrows() == 0 {
        return Err(Error::EmptyTrainingSet);
    }
    if labels.len() != inputs.nrows() {
        return Err(Error::DimensionMismatch(format!("{} inputs but {} labels", inputs.nrows(), labels.len())));
    }
    if let Some(&label) = labels.iter().find(|&&y| y >= classes) {
        return Err(Error::LabelOutOfRange { label, classes });
    }

    let mut model = Classifier::new(classes, inputs.ncols(), feature_map)?;
    let h = model.features(inputs)?;
    let (count, d) = h.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    model.weights = Array2::from_shape_fn((classes, d), |_| rng.random_range(-0.01..=0.01));
    model.bias = Array1::from_shape_fn(classes, |_| rng.random_range(-0.01..=0.01));

    let scale = 1.0 / count as f64;
    let mut history = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        let mut p = model.logits_from_features(&h);
        let mut nll = 0.0;
        for (mut row, &y) in p.rows_mut().into_iter().zip(labels) {
            let lse = log_sum_exp(row.as_slice().expect("row-major"));
            nll += lse - row[y];
            row.mapv_inplace(|z| (z - lse).exp());
            row[y] -= 1.0;
        }
        let decay = config.weight_decay * model.weights.iter().map(|w| w * w).sum::<f64>();
        history.push(nll * scale + decay);

        // p now holds P − Y
        let grad_w = p.t().dot(&h) * scale + &model.weights * (2.0 * config.weight_decay);
        let grad_b = p.sum_axis(Axis(0)) * scale;
        model.weights.scaled_add(-config.learning_rate, &grad_w);
        model.bias.scaled_add(-config.learning_rate, &grad_b);
    }
    model.trained = true;
    Ok((model, history))
}

/// Bootstrap ensemble standing in for posterior samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    members: Vec<Classifier>,
    seeds: Vec<u64>,
}

impl Ensemble {
    /// Trains `size` members, member `i` on a bootstrap resample drawn with
    /// seed `config.seed + i` (also used for its initialization).
    pub fn train(
        inputs: ArrayView2<f64>,
        labels: &[usize],
        classes: usize,
        feature_map: FeatureMap,
        config: &TrainConfig,
        size: usize,
    ) -> Result<Self> {
        if size == 0 {
            return Err(Error::ConfigInvalid("ensemble size must be >= 1".into()));
        }
        if inputs.nrows() == 0 {
            return Err(Error::EmptyTrainingSet);
        }
        let count = inputs.nrows();
        let mut members = Vec::with_capacity(size);
        let mut seeds = Vec::with_capacity(size);
        for i in 0..size {
            let seed = config.seed.wrapping_add(i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let picks: Vec<usize> = (0..count).map(|_| rng.random_range(0..count)).collect();
            let sample = inputs.select(Axis(0), &picks);
            let sample_labels: Vec<usize> = picks.iter().map(|&k| labels[k]).collect();
            let member_config = TrainConfig { seed, ..*config };
            members.push(train(sample.view(), &sample_labels, classes, feature_map, &member_config)?);
            seeds.push(seed);
        }
        Ok(Self { members, seeds })
    }

    pub fn from_members(members: Vec<Classifier>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::UntrainedModel);
        }
        let first = members[0].feature_map();
        if members.iter().any(|m| m.feature_map() != first || m.classes() != members[0].classes()) {
            return Err(Error::ConfigInvalid("ensemble members must share feature map and classes".into()));
        }
        let seeds = (0..members.len() as u64).collect();
        Ok(Self { members, seeds })
    }

    pub fn members(&self) -> &[Classifier] {
        &self.members
    }

    pub fn seeds(&self) -> &[u64] {
        &self.seeds
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn classes(&self) -> usize {
        self.members[0].classes()
    }

    /// Uniform average of the member softmax outputs.
    pub fn predict_proba(&self, inputs: ArrayView2<f64>) -> Result<Array2<f64>> {
        let mut mean = self.members[0].predict_proba(inputs)?;
        for member in &self.members[1..] {
            mean += &member.predict_proba(inputs)?;
        }
        mean /= self.members.len() as f64;
        Ok(mean)
    }

    /// Cross-entropy of every member on one labeled input.
    pub fn per_sample_losses(&self, input: ArrayView1<f64>, label: usize) -> Result<Vec<f64>> {
        self.members.iter().map(|m| m.loss(input, label)).collect()
    }

    /// For every input row `j`, the `E × K` matrix of losses
    /// `−log p_i(k | x_j)` under member `i` and hypothetical label `k`.
    pub fn loss_table(&self, inputs: ArrayView2<f64>) -> Result<Vec<Array2<f64>>> {
        let (n, k) = (inputs.nrows(), self.classes());
        let mut tables = vec![Array2::zeros((self.members.len(), k)); n];
        for (i, member) in self.members.iter().enumerate() {
            let z = member.predict_logits(inputs)?;
            for (j, row) in z.rows().into_iter().enumerate() {
                let row = row.to_vec();
                let lse = log_sum_exp(&row);
                for (c, zc) in row.iter().enumerate() {
                    tables[j][[i, c]] = lse - zc;
                }
            }
        }
        Ok(tables)
    }
}

pub fn log_sum_exp(z: &[f64]) -> f64 {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Row-wise `softmax(z / temperature)` in place.
pub fn softmax_rows(z: &mut Array2<f64>, temperature: f64) {
    for mut row in z.rows_mut() {
        row.mapv_inplace(|v| v / temperature);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - max).exp());
        let total = row.sum();
        row.mapv_inplace(|v| v / total);
    }
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}
