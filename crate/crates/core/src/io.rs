//! Text formats for problems, solver results, run configs and outputs.
//!
//! Problems, configs and summaries are TOML; learning curves and benchmark
//! tables are CSV. Parsing is strict: unknown keys are rejected and every
//! diagnostic names the key and, where known, the line. Floats are written
//! with 17 significant digits so a canonical file survives
//! parse-then-serialize byte for byte.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;
use toml::Spanned;

use crate::bench::{BenchConfig, BenchRow};
use crate::data::{format_float, make_blobs, BlobSpec, Dataset, SplitDataset};
use crate::embeddings::EmbeddingMode;
use crate::harness::{AcquisitionParams, AlConfig, AlRun, Strategy};
use crate::models::{FeatureMap, TrainConfig};
use crate::problem::SparseApproxProblem;
use crate::solvers::{GreedyConfig, IhtConfig, ProxMode, SolveResult};

/// A malformed input file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: Option<usize>,
    pub message: String,
}

impl ParseError {
    fn new(message: impl Into<String>) -> Self {
        Self { line: None, message: message.into() }
    }

    fn at(text: &str, offset: usize, message: impl Into<String>) -> Self {
        Self { line: Some(line_of(text, offset)), message: message.into() }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ParseError {}

fn line_of(text: &str, offset: usize) -> usize {
    text.as_bytes()[..offset.min(text.len())].iter().filter(|&&c| c == b'\n').count() + 1
}

fn parse_toml<T: DeserializeOwned>(text: &str) -> Result<T, ParseError> {
    toml::from_str(text).map_err(|e| {
        let message = e.message().trim_end().to_string();
        match e.span() {
            Some(span) => ParseError::at(text, span.start, message),
            None => ParseError::new(message),
        }
    })
}

fn check_finite(text: &str, key: &str, values: &Spanned<Vec<f64>>) -> Result<(), ParseError> {
    match values.get_ref().iter().position(|x| !x.is_finite()) {
        Some(i) => Err(ParseError::at(text, values.span().start, format!("`{key}`[{i}] is not finite"))),
        None => Ok(()),
    }
}

fn float_list(values: &[f64]) -> String {
    let items: Vec<String> = values.iter().map(|x| format_float(*x)).collect();
    format!("[{}]", items.join(", "))
}

fn index_list(values: &[usize]) -> String {
    let items: Vec<String> = values.iter().map(usize::to_string).collect();
    format!("[{}]", items.join(", "))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    m: usize,
    n: usize,
    b: usize,
    alpha: Spanned<f64>,
    beta: Spanned<f64>,
    v: Spanned<Vec<f64>>,
    phi: Spanned<Vec<f64>>,
    sigma2: Spanned<Vec<f64>>,
}

/// A problem instance as stored on disk; `phi` is column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemFile {
    pub m: usize,
    pub n: usize,
    pub b: usize,
    pub alpha: f64,
    pub beta: f64,
    pub v: Vec<f64>,
    pub phi: Vec<f64>,
    pub sigma2: Vec<f64>,
}

impl ProblemFile {
    /// Parses and schema-checks a problem file. The budget is not compared
    /// against `n` here; that is a solver-domain error.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let raw: RawProblem = parse_toml(text)?;
        let length = |key: &str, values: &Spanned<Vec<f64>>, want: usize, rule: &str| {
            if values.get_ref().len() == want {
                Ok(())
            } else {
                Err(ParseError::at(
                    text,
                    values.span().start,
                    format!("`{key}` has {} entries, expected {rule} = {want}", values.get_ref().len()),
                ))
            }
        };
        if raw.m == 0 || raw.n == 0 {
            return Err(ParseError::new("`m` and `n` must be positive"));
        }
        length("v", &raw.v, raw.m, "m")?;
        length("phi", &raw.phi, raw.m * raw.n, "m*n")?;
        length("sigma2", &raw.sigma2, raw.n, "n")?;
        for (key, values) in [("v", &raw.v), ("phi", &raw.phi), ("sigma2", &raw.sigma2)] {
            check_finite(text, key, values)?;
        }
        if let Some(i) = raw.sigma2.get_ref().iter().position(|s| *s < 0.0) {
            return Err(ParseError::at(text, raw.sigma2.span().start, format!("`sigma2`[{i}] is negative")));
        }
        for (key, value) in [("alpha", &raw.alpha), ("beta", &raw.beta)] {
            if !(value.get_ref().is_finite() && *value.get_ref() >= 0.0) {
                return Err(ParseError::at(text, value.span().start, format!("`{key}` must be finite and >= 0")));
            }
        }
        if raw.b == 0 {
            return Err(ParseError::new("`b` must be positive"));
        }
        Ok(Self {
            m: raw.m,
            n: raw.n,
            b: raw.b,
            alpha: raw.alpha.into_inner(),
            beta: raw.beta.into_inner(),
            v: raw.v.into_inner(),
            phi: raw.phi.into_inner(),
            sigma2: raw.sigma2.into_inner(),
        })
    }

    pub fn from_problem(problem: &SparseApproxProblem) -> Self {
        Self {
            m: problem.m(),
            n: problem.n(),
            b: problem.budget(),
            alpha: problem.alpha(),
            beta: problem.beta(),
            v: problem.v().to_vec(),
            phi: problem.phi_col_major(),
            sigma2: problem.sigma2().to_vec(),
        }
    }

    pub fn to_problem(&self) -> crate::Result<SparseApproxProblem> {
        SparseApproxProblem::new(self.v.clone(), self.phi.clone(), self.sigma2.clone(), self.alpha, self.beta, self.b)
    }

    /// Canonical serialization.
    pub fn to_toml(&self) -> String {
        let mut out = String::new();
        writeln!(out, "m = {}", self.m).unwrap();
        writeln!(out, "n = {}", self.n).unwrap();
        writeln!(out, "b = {}", self.b).unwrap();
        writeln!(out, "alpha = {}", format_float(self.alpha)).unwrap();
        writeln!(out, "beta = {}", format_float(self.beta)).unwrap();
        writeln!(out, "v = {}", float_list(&self.v)).unwrap();
        writeln!(out, "phi = {}", float_list(&self.phi)).unwrap();
        writeln!(out, "sigma2 = {}", float_list(&self.sigma2)).unwrap();
        out
    }
}

/// Solver output as written by `solve`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultDocument {
    pub solver: String,
    pub objective: f64,
    pub w: Vec<f64>,
    pub support: Vec<usize>,
    pub selected: Vec<usize>,
    pub trace_step: Vec<usize>,
    pub trace_objective: Vec<f64>,
}

impl ResultDocument {
    pub fn from_result(solver: &str, result: &SolveResult) -> Self {
        Self {
            solver: solver.to_string(),
            objective: result.objective,
            w: result.w.as_slice().to_vec(),
            support: result.w.support().to_vec(),
            selected: result.selected.clone(),
            trace_step: result.trace.iter().map(|(t, _)| *t).collect(),
            trace_objective: result.trace.iter().map(|(_, f)| *f).collect(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        parse_toml(text)
    }

    pub fn to_toml(&self) -> String {
        let mut out = String::new();
        writeln!(out, "solver = \"{}\"", self.solver).unwrap();
        writeln!(out, "objective = {}", format_float(self.objective)).unwrap();
        writeln!(out, "w = {}", float_list(&self.w)).unwrap();
        writeln!(out, "support = {}", index_list(&self.support)).unwrap();
        writeln!(out, "selected = {}", index_list(&self.selected)).unwrap();
        writeln!(out, "trace_step = {}", index_list(&self.trace_step)).unwrap();
        writeln!(out, "trace_objective = {}", float_list(&self.trace_objective)).unwrap();
        out
    }
}

/// Where the AL dataset comes from.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DatasetSource {
    /// Gaussian blobs; split with the same seed.
    Blobs { classes: usize, samples: usize, radius: f64, noise: f64, seed: u64 },
    /// A dataset CSV. Relative paths resolve against the config's directory.
    /// `classes` defaults to `max(label) + 1`.
    Csv { path: PathBuf, classes: Option<usize>, split_seed: u64 },
}

impl DatasetSource {
    pub fn load(&self, base_dir: &Path) -> Result<SplitDataset, ParseError> {
        match self {
            DatasetSource::Blobs { classes, samples, radius, noise, seed } => {
                make_blobs(&BlobSpec::balanced(*classes, *samples, *radius, *noise, *seed))
                    .map_err(|e| ParseError::new(format!("[dataset]: {e}")))
            }
            DatasetSource::Csv { path, classes, split_seed } => {
                let path = base_dir.join(path);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| ParseError::new(format!("[dataset] path `{}`: {e}", path.display())))?;
                let data = Dataset::from_csv(&text, *classes)
                    .map_err(|e| ParseError::new(format!("{}: {e}", path.display())))?;
                Ok(data.split(*split_seed))
            }
        }
    }
}

fn default_ensemble_size() -> usize {
    5
}

fn default_tau() -> f64 {
    1.0
}

fn default_iht_iterations() -> usize {
    100
}

/// The `[al]` table. Each (strategy, seed) pair is one run.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlSection {
    pub strategies: Vec<Strategy>,
    pub seeds: Vec<u64>,
    /// Required by every strategy except `random` and `entropy`.
    pub embedding_mode: Option<EmbeddingMode>,
    pub seed_size: usize,
    pub batch_size: usize,
    pub rounds: usize,
    pub alpha: f64,
    pub beta: f64,
    /// Default 5. Only read in posterior-sample mode.
    #[serde(default = "default_ensemble_size")]
    pub ensemble_size: usize,
    /// Default identity.
    #[serde(default)]
    pub feature_map: FeatureMap,
    /// Default 1.
    #[serde(default = "default_tau")]
    pub tau: f64,
    /// Default 100.
    #[serde(default = "default_iht_iterations")]
    pub iht_iterations: usize,
    /// Default 0.
    #[serde(default)]
    pub stall_tolerance: f64,
    /// Default false.
    #[serde(default)]
    pub paper_literal_prox: bool,
    /// Default false.
    #[serde(default)]
    pub record_seed_round: bool,
}

impl AlSection {
    pub fn acquisition(&self) -> AcquisitionParams {
        AcquisitionParams {
            alpha: self.alpha,
            beta: self.beta,
            greedy: GreedyConfig { tau: self.tau },
            iht: IhtConfig {
                iterations: self.iht_iterations,
                stall_tolerance: self.stall_tolerance,
                prox_mode: if self.paper_literal_prox { ProxMode::PaperLiteral } else { ProxMode::Corrected },
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Learning-curve CSV.
    pub curves: PathBuf,
    /// Summary TOML; defaults to the curves path with extension `summary.toml`.
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub dataset: DatasetSource,
    pub al: AlSection,
    pub train: TrainConfig,
    pub output: OutputSection,
}

impl RunConfigFile {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let config: Self = parse_toml(text)?;
        if config.al.strategies.is_empty() {
            return Err(ParseError::new("[al] `strategies` must be non-empty"));
        }
        if config.al.seeds.is_empty() {
            return Err(ParseError::new("[al] `seeds` must be non-empty"));
        }
        for run in config.al_configs() {
            run.validate().map_err(|e| ParseError::new(format!("[al]: {e}")))?;
        }
        config.train.validate().map_err(|e| ParseError::new(format!("[train]: {e}")))?;
        Ok(config)
    }

    /// One harness config per (strategy, seed), strategies outermost.
    pub fn al_configs(&self) -> Vec<AlConfig> {
        let al = &self.al;
        let mut out = Vec::new();
        for &strategy in &al.strategies {
            for &seed in &al.seeds {
                out.push(AlConfig {
                    strategy,
                    embedding_mode: al.embedding_mode,
                    seed_size: al.seed_size,
                    batch_size: al.batch_size,
                    rounds: al.rounds,
                    acquisition: al.acquisition(),
                    ensemble_size: al.ensemble_size,
                    train: self.train,
                    feature_map: al.feature_map,
                    rng_seed: seed,
                    record_seed_round: al.record_seed_round,
                });
            }
        }
        out
    }

    pub fn summary_path(&self, curves: &Path) -> PathBuf {
        match &self.output.summary {
            Some(p) => p.clone(),
            None => curves.with_extension("summary.toml"),
        }
    }
}

pub const CURVE_HEADER: &str = "round,labeled_count,test_accuracy,acquisition_seconds,method,seed";

pub fn curves_csv(runs: &[AlRun]) -> String {
    let mut out = format!("{CURVE_HEADER}\n");
    for run in runs {
        for r in &run.records {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.round,
                r.labeled_count,
                format_float(r.test_accuracy),
                format_float(r.acquisition_seconds),
                run.strategy,
                run.seed
            )
            .unwrap();
        }
    }
    out
}

/// Per-run AUCs followed by the mean AUC of each method, in first-seen order.
pub fn summary_toml(runs: &[AlRun]) -> String {
    let mut out = String::new();
    for run in runs {
        writeln!(
            out,
            "[[runs]]\nmethod = \"{}\"\nseed = {}\nauc = {}\n",
            run.strategy,
            run.seed,
            format_float(run.auc)
        )
        .unwrap();
    }
    let mut methods: Vec<Strategy> = Vec::new();
    for run in runs {
        if !methods.contains(&run.strategy) {
            methods.push(run.strategy);
        }
    }
    for method in methods {
        let aucs: Vec<f64> = runs.iter().filter(|r| r.strategy == method).map(|r| r.auc).collect();
        let mean = aucs.iter().sum::<f64>() / aucs.len() as f64;
        writeln!(out, "[[methods]]\nmethod = \"{method}\"\nruns = {}\nmean_auc = {}\n", aucs.len(), format_float(mean))
            .unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSection {
    pub strategies: Vec<Strategy>,
    pub pool_sizes: Vec<usize>,
    pub batch_sizes: Vec<usize>,
    /// At least 5.
    pub repetitions: usize,
    pub classes: usize,
    pub embedding_dim: usize,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_iht_iterations")]
    pub iht_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchOutput {
    /// Timing CSV. The table is always printed to stdout as well.
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfigFile {
    pub bench: BenchSection,
    pub output: Option<BenchOutput>,
}

impl BenchConfigFile {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let file: Self = parse_toml(text)?;
        file.to_config().validate().map_err(|e| ParseError::new(format!("[bench]: {e}")))?;
        Ok(file)
    }

    pub fn to_config(&self) -> BenchConfig {
        let b = &self.bench;
        BenchConfig {
            strategies: b.strategies.clone(),
            pool_sizes: b.pool_sizes.clone(),
            batch_sizes: b.batch_sizes.clone(),
            repetitions: b.repetitions,
            classes: b.classes,
            embedding_dim: b.embedding_dim,
            acquisition: AcquisitionParams {
                alpha: b.alpha,
                beta: b.beta,
                greedy: GreedyConfig { tau: b.tau },
                iht: IhtConfig { iterations: b.iht_iterations, ..IhtConfig::default() },
            },
            seed: b.seed,
        }
    }
}

pub const BENCH_HEADER: &str = "strategy,pool_size,batch_size,median_seconds,repetitions";

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = format!("{BENCH_HEADER}\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.strategy,
            r.pool_size,
            r.batch_size,
            format_float(r.median_seconds),
            r.repetitions
        )
        .unwrap();
    }
    out
}

/// Fixed-width table for the terminal.
pub fn bench_table(rows: &[BenchRow]) -> String {
    let mut out = format!("{:<18} {:>10} {:>8} {:>14}\n", "strategy", "pool", "batch", "median_s");
    for r in rows {
        writeln!(out, "{:<18} {:>10} {:>8} {:>14.6}", r.strategy.name(), r.pool_size, r.batch_size, r.median_seconds)
            .unwrap();
    }
    out
}
