//! Acquisition-time benchmark on synthetic embeddings.
//!
//! Each cell of the (strategy, pool size, batch size) grid times one first
//! query: assembling the problem and running the selection rule. Random and
//! Entropy skip the assembly since they never read the problem. The reported
//! figure is the median over repetitions.

use std::time::Instant;

use ndarray::{Array2, Array3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::embeddings::{EmbeddingMode, EmbeddingSet, LabelDistribution};
use crate::error::{Error, Result};
use crate::harness::{acquire, AcquisitionParams, Strategy};
use crate::models::softmax_rows;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub strategies: Vec<Strategy>,
    pub pool_sizes: Vec<usize>,
    pub batch_sizes: Vec<usize>,
    pub repetitions: usize,
    pub classes: usize,
    pub embedding_dim: usize,
    pub acquisition: AcquisitionParams,
    pub seed: u64,
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.strategies.is_empty() || self.pool_sizes.is_empty() || self.batch_sizes.is_empty() {
            return Err(Error::ConfigInvalid("strategies, pool_sizes and batch_sizes must be non-empty".into()));
        }
        if self.repetitions < 5 {
            return Err(Error::ConfigInvalid("repetitions must be >= 5".into()));
        }
        if self.classes < 2 || self.embedding_dim == 0 {
            return Err(Error::ConfigInvalid("need classes >= 2 and embedding_dim >= 1".into()));
        }
        if self.batch_sizes.contains(&0) {
            return Err(Error::ConfigInvalid("batch sizes must be >= 1".into()));
        }
        self.acquisition.greedy.validate()?;
        self.acquisition.iht.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub strategy: Strategy,
    pub pool_size: usize,
    pub batch_size: usize,
    pub median_seconds: f64,
    pub repetitions: usize,
}

/// Standard-normal embeddings and softmax-of-Gaussian label distributions.
pub fn synthetic_pool(n: usize, classes: usize, dim: usize, seed: u64) -> Result<(EmbeddingSet, LabelDistribution)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let g = Array3::from_shape_simple_fn((n, classes, dim), &mut normal);
    let mut logits = Array2::from_shape_simple_fn((n, classes), || 2.0 * normal());
    softmax_rows(&mut logits, 1.0);
    Ok((EmbeddingSet::new(g, EmbeddingMode::Gradient)?, LabelDistribution::new(logits)?))
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Runs the whole grid; rows are ordered by pool size, batch size, strategy.
pub fn run_bench(config: &BenchConfig) -> Result<Vec<BenchRow>> {
    config.validate()?;
    let mut rows = Vec::new();
    for &n in &config.pool_sizes {
        let (emb, dist) = synthetic_pool(n, config.classes, config.embedding_dim, config.seed)?;
        for &b in &config.batch_sizes {
            if b > n {
                return Err(Error::BudgetExceedsPool { budget: b, pool: n });
            }
            for &strategy in &config.strategies {
                let mut times = Vec::with_capacity(config.repetitions);
                for rep in 0..config.repetitions {
                    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(rep as u64));
                    let started = Instant::now();
                    let picked = acquire(strategy, &dist, Some(&emb), &config.acquisition, b, &mut rng)?;
                    times.push(started.elapsed().as_secs_f64());
                    std::hint::black_box(picked);
                }
                rows.push(BenchRow {
                    strategy,
                    pool_size: n,
                    batch_size: b,
                    median_seconds: median(&mut times),
                    repetitions: config.repetitions,
                });
            }
        }
    }
    Ok(rows)
}
