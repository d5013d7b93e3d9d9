//! The batch active learning loop with simulated oracle labeling.
//!
//! A random seed batch is labeled and a model trained. Every round then
//! estimates label distributions on the unlabeled pool, builds embeddings,
//! assembles the sparse approximation problem, selects a batch, reveals the
//! held-out labels and retrains from scratch.

use std::time::Instant;

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::SplitDataset;
use crate::embeddings::{
    assemble_problem, fit_temperature, gradient_embeddings, predictive_distribution, sample_embeddings, EmbeddingMode,
    LabelDistribution, Predictor,
};
use crate::error::{Error, Result};
use crate::models::{train, Classifier, Ensemble, FeatureMap, TrainConfig};
use crate::problem::SparseApproxProblem;
use crate::solvers::{greedy_scores, greedy_solve, iht_solve, GreedyConfig, IhtConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    OursGreedy,
    OursIht,
    Random,
    Entropy,
    TopVariance,
    BiasOnlyGreedy,
    BiasOnlyIht,
}

impl Strategy {
    pub const ALL: [Strategy; 7] = [
        Strategy::OursGreedy,
        Strategy::OursIht,
        Strategy::Random,
        Strategy::Entropy,
        Strategy::TopVariance,
        Strategy::BiasOnlyGreedy,
        Strategy::BiasOnlyIht,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::OursGreedy => "ours-greedy",
            Strategy::OursIht => "ours-iht",
            Strategy::Random => "random",
            Strategy::Entropy => "entropy",
            Strategy::TopVariance => "top-variance",
            Strategy::BiasOnlyGreedy => "bias-only-greedy",
            Strategy::BiasOnlyIht => "bias-only-iht",
        }
    }

    /// Whether the strategy needs the assembled problem (and so embeddings).
    pub fn needs_problem(&self) -> bool {
        !matches!(self, Strategy::Random | Strategy::Entropy)
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::ConfigInvalid(format!("unknown strategy `{s}`")))
    }
}

/// Solver and trade-off parameters shared by every acquisition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcquisitionParams {
    pub alpha: f64,
    pub beta: f64,
    pub greedy: GreedyConfig,
    pub iht: IhtConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlConfig {
    pub strategy: Strategy,
    pub embedding_mode: Option<EmbeddingMode>,
    pub seed_size: usize,
    pub batch_size: usize,
    pub rounds: usize,
    pub acquisition: AcquisitionParams,
    pub ensemble_size: usize,
    pub train: TrainConfig,
    pub feature_map: FeatureMap,
    pub rng_seed: u64,
    /// Also record round 0 (the seed batch) in the output.
    pub record_seed_round: bool,
}

impl AlConfig {
    pub fn validate(&self) -> Result<()> {
        if self.seed_size == 0 || self.batch_size == 0 || self.rounds == 0 {
            return Err(Error::ConfigInvalid("seed_size, batch_size and rounds must be >= 1".into()));
        }
        if self.strategy.needs_problem() && self.embedding_mode.is_none() {
            return Err(Error::ConfigInvalid(format!("strategy `{}` needs an embedding_mode", self.strategy)));
        }
        if self.embedding_mode == Some(EmbeddingMode::PosteriorSample) && self.ensemble_size < 2 {
            return Err(Error::ConfigInvalid("posterior-sample embeddings need ensemble_size >= 2".into()));
        }
        let a = &self.acquisition;
        if !(a.alpha.is_finite() && a.alpha >= 0.0 && a.beta.is_finite() && a.beta >= 0.0) {
            return Err(Error::ConfigInvalid("alpha and beta must be finite and >= 0".into()));
        }
        a.greedy.validate()?;
        a.iht.validate()?;
        self.train.validate()
    }
}

/// Labeled/unlabeled partition of the training pool.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlState {
    labeled: Vec<usize>,
    unlabeled: Vec<usize>,
    round: usize,
}

impl AlState {
    pub fn new(pool_size: usize) -> Self {
        Self { labeled: Vec::new(), unlabeled: (0..pool_size).collect(), round: 0 }
    }

    /// Labeled pool indices in ascending order.
    pub fn labeled(&self) -> &[usize] {
        &self.labeled
    }

    /// Unlabeled pool indices in ascending order.
    pub fn unlabeled(&self) -> &[usize] {
        &self.unlabeled
    }

    pub fn round(&self) -> usize {
        self.round
    }

    /// Moves `batch` (pool indices) from unlabeled to labeled.
    pub fn reveal(&mut self, batch: &[usize]) -> Result<()> {
        let mut sorted = batch.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::ConfigInvalid("batch contains duplicate indices".into()));
        }
        for i in &sorted {
            if self.unlabeled.binary_search(i).is_err() {
                return Err(Error::ConfigInvalid(format!("index {i} is not unlabeled")));
            }
        }
        self.unlabeled.retain(|i| sorted.binary_search(i).is_err());
        self.labeled.extend(sorted);
        self.labeled.sort_unstable();
        Ok(())
    }

    fn advance(&mut self) {
        self.round += 1;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: usize,
    pub labeled_count: usize,
    pub test_accuracy: f64,
    pub acquisition_seconds: f64,
    /// Pool indices queried this round.
    pub selected_indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlRun {
    pub strategy: Strategy,
    pub seed: u64,
    pub records: Vec<RoundRecord>,
    pub auc: f64,
}

/// Scores available to the selection rules.
#[derive(Debug, Clone, Copy, Default)]
pub struct SelectionInputs<'a> {
    pub candidates: usize,
    pub entropies: Option<&'a [f64]>,
    pub problem: Option<&'a SparseApproxProblem>,
}

/// Chooses exactly `b` distinct candidate positions in `0..candidates`.
pub fn select_batch(
    strategy: Strategy,
    inputs: &SelectionInputs<'_>,
    params: &AcquisitionParams,
    b: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<usize>> {
    let n = inputs.candidates;
    if b > n {
        return Err(Error::BudgetExceedsPool { budget: b, pool: n });
    }
    let problem =
        || inputs.problem.ok_or_else(|| Error::ConfigInvalid(format!("strategy `{strategy}` needs a problem")));
    let selected = match strategy {
        Strategy::Random => index::sample(rng, n, b).into_vec(),
        Strategy::Entropy => {
            let h = inputs
                .entropies
                .ok_or_else(|| Error::ConfigInvalid("entropy selection needs predictive entropies".into()))?;
            top_k(h, b)
        }
        Strategy::TopVariance => top_k(problem()?.sigma2().as_slice().expect("contiguous"), b),
        Strategy::OursGreedy => solve_greedy(&problem()?.with_budget(b)?, params)?,
        Strategy::BiasOnlyGreedy => solve_greedy(&problem()?.with_budget(b)?.with_weights(0.0, params.beta)?, params)?,
        Strategy::OursIht => solve_iht(&problem()?.with_budget(b)?, params)?,
        Strategy::BiasOnlyIht => solve_iht(&problem()?.with_budget(b)?.with_weights(0.0, params.beta)?, params)?,
    };
    debug_assert_eq!(selected.len(), b);
    Ok(selected)
}

fn solve_greedy(problem: &SparseApproxProblem, params: &AcquisitionParams) -> Result<Vec<usize>> {
    Ok(greedy_solve(problem, &params.greedy)?.selected)
}

/// IHT support, topped up to `b` by the greedy score at the final iterate
/// when thresholding and clamping left fewer than `b` positive weights.
fn solve_iht(problem: &SparseApproxProblem, params: &AcquisitionParams) -> Result<Vec<usize>> {
    let result = iht_solve(problem, &params.iht)?;
    let mut selected = result.selected;
    let b = problem.budget();
    if selected.len() < b {
        let scores = greedy_scores(problem, result.w.as_slice(), params.greedy.tau);
        let mut order: Vec<usize> = (0..problem.n()).filter(|j| result.w.as_slice()[*j] == 0.0).collect();
        order.sort_by(|a, c| scores[*a].total_cmp(&scores[*c]).then(a.cmp(c)));
        selected.extend(order.into_iter().take(b - selected.len()));
    }
    Ok(selected)
}

/// Indices of the `k` largest values, ties to the smaller index.
fn top_k(values: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|a, c| values[*c].total_cmp(&values[*a]).then(a.cmp(c)));
    order.truncate(k);
    order
}

/// One acquisition from label distributions and (optionally) embeddings.
pub fn acquire(
    strategy: Strategy,
    dist: &LabelDistribution,
    embeddings: Option<&crate::embeddings::EmbeddingSet>,
    params: &AcquisitionParams,
    b: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<usize>> {
    let n = dist.len();
    if b > n {
        return Err(Error::BudgetExceedsPool { budget: b, pool: n });
    }
    let entropies = (strategy == Strategy::Entropy).then(|| dist.entropies());
    let problem = match (strategy.needs_problem(), embeddings) {
        (true, Some(emb)) => Some(assemble_problem(emb, dist, params.alpha, params.beta, b)?),
        (true, None) => return Err(Error::ConfigInvalid(format!("strategy `{strategy}` needs embeddings"))),
        (false, _) => None,
    };
    let inputs = SelectionInputs { candidates: n, entropies: entropies.as_deref(), problem: problem.as_ref() };
    select_batch(strategy, &inputs, params, b, rng)
}

/// Runs the full acquisition loop on `dataset.train` as the pool.
pub fn run_loop(dataset: &SplitDataset, config: &AlConfig) -> Result<AlRun> {
    config.validate()?;
    let pool = &dataset.train;
    let needed = config.seed_size + config.rounds * config.batch_size;
    if pool.len() < needed {
        return Err(Error::PoolExhausted(format!(
            "pool has {} points but seed_size + rounds * batch_size = {needed}",
            pool.len()
        )));
    }
    let classes = pool.classes;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut state = AlState::new(pool.len());

    let mut seed_batch: Vec<usize> = (0..pool.len()).collect();
    seed_batch.shuffle(&mut rng);
    seed_batch.truncate(config.seed_size);
    state.reveal(&seed_batch)?;

    let fit = |state: &AlState| -> Result<Classifier> {
        let labeled = pool.subset(state.labeled());
        train(labeled.features.view(), &labeled.labels, classes, config.feature_map, &config.train)
    };
    let test_accuracy = |model: &Classifier| model.accuracy(dataset.test.features.view(), &dataset.test.labels);

    let mut model = fit(&state)?;
    let mut records = Vec::with_capacity(config.rounds + 1);
    if config.record_seed_round {
        records.push(RoundRecord {
            round: 0,
            labeled_count: state.labeled().len(),
            test_accuracy: test_accuracy(&model)?,
            acquisition_seconds: 0.0,
            selected_indices: seed_batch.clone(),
        });
    }

    for _ in 0..config.rounds {
        state.advance();
        let unlabeled = pool.subset(state.unlabeled());
        let candidates = unlabeled.features.view();

        // Model fitting (ensemble members, temperature) is not acquisition time.
        let uses_ensemble = config.embedding_mode == Some(EmbeddingMode::PosteriorSample);
        let ensemble = if uses_ensemble {
            let labeled = pool.subset(state.labeled());
            Some(Ensemble::train(
                labeled.features.view(),
                &labeled.labels,
                classes,
                config.feature_map,
                &config.train,
                config.ensemble_size,
            )?)
        } else {
            None
        };
        let temperature = if ensemble.is_none() && config.strategy != Strategy::Random {
            let logits = model.predict_logits(dataset.validation.features.view())?;
            fit_temperature(logits.view(), &dataset.validation.labels)?.temperature
        } else {
            1.0
        };

        let started = Instant::now();
        let positions = if config.strategy == Strategy::Random {
            index::sample(&mut rng, unlabeled.len(), config.batch_size).into_vec()
        } else {
            let predictor = match &ensemble {
                Some(ens) => Predictor::Ensemble(ens),
                None => Predictor::Calibrated { model: &model, temperature },
            };
            let dist = predictive_distribution(predictor, candidates)?;
            let embeddings = match (config.strategy.needs_problem(), config.embedding_mode) {
                (false, _) | (true, None) => None,
                (true, Some(EmbeddingMode::Gradient)) => Some(gradient_embeddings(&model, candidates)?),
                (true, Some(EmbeddingMode::PosteriorSample)) => {
                    Some(sample_embeddings(ensemble.as_ref().expect("trained above"), candidates)?)
                }
            };
            acquire(config.strategy, &dist, embeddings.as_ref(), &config.acquisition, config.batch_size, &mut rng)?
        };
        let acquisition_seconds = started.elapsed().as_secs_f64();

        let selected: Vec<usize> = positions.iter().map(|&p| state.unlabeled()[p]).collect();
        state.reveal(&selected)?;
        model = fit(&state)?;
        records.push(RoundRecord {
            round: state.round(),
            labeled_count: state.labeled().len(),
            test_accuracy: test_accuracy(&model)?,
            acquisition_seconds,
            selected_indices: selected,
        });
    }

    let auc = learning_curve_auc(&records)?;
    Ok(AlRun { strategy: config.strategy, seed: config.rng_seed, records, auc })
}

/// `100 ×` the mean test accuracy across the given rounds.
pub fn learning_curve_auc(records: &[RoundRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::EmptyRecordList);
    }
    let total: f64 = records.iter().map(|r| r.test_accuracy).sum();
    Ok(100.0 * total / records.len() as f64)
}
