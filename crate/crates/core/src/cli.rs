//! The `sparse-al` command line.
//!
//! Exit codes: 0 on success, 2 for unreadable or malformed input, 3 for
//! domain and runtime failures (for example a budget larger than the pool).

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::bench::run_bench;
use crate::data::{generate_blobs, BlobSpec};
use crate::error::Error;
use crate::harness::run_loop;
use crate::io::{
    bench_csv, bench_table, curves_csv, summary_toml, BenchConfigFile, ProblemFile, ResultDocument, RunConfigFile,
};
use crate::solvers::{brute_force_solve, greedy_solve, iht_solve, GreedyConfig, IhtConfig, ProxMode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "sparse-al", version, about = "Batch active learning as sparse approximation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverKind {
    Greedy,
    Iht,
    Oracle,
}

impl SolverKind {
    fn name(self) -> &'static str {
        match self {
            SolverKind::Greedy => "greedy",
            SolverKind::Iht => "iht",
            SolverKind::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a problem file and write the result document.
    Solve {
        problem: PathBuf,
        #[arg(long, value_enum, default_value = "greedy")]
        solver: SolverKind,
        /// Use the literal thresholding score instead of the corrected one (IHT only).
        #[arg(long)]
        paper_literal_prox: bool,
        /// Greedy scoring step size.
        #[arg(long)]
        tau: Option<f64>,
        /// IHT iteration count.
        #[arg(long)]
        iters: Option<usize>,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the active learning loop described by a config file.
    Al {
        config: PathBuf,
        /// Run this single seed instead of the config's seed list.
        #[arg(long)]
        seed: Option<u64>,
        /// Learning-curve CSV path, overriding the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time first-query acquisition over a pool-size sweep.
    Bench {
        config: PathBuf,
        /// Timing CSV path, overriding the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a Gaussian-blob dataset CSV.
    Gen {
        #[arg(long, default_value_t = 2)]
        classes: usize,
        /// Total number of points, spread evenly over the classes.
        #[arg(long)]
        samples: usize,
        #[arg(long, default_value_t = 6.0)]
        radius: f64,
        #[arg(long, default_value_t = 1.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A failure with its exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, message: message.into() }
    }

    fn domain(message: impl Into<String>) -> Self {
        Self { code: EXIT_DOMAIN, message: message.into() }
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

pub fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Solve { problem, solver, paper_literal_prox, tau, iters, out } => {
            cmd_solve(&problem, solver, paper_literal_prox, tau, iters, out.as_deref())
        }
        Command::Al { config, seed, out } => cmd_al(&config, seed, out),
        Command::Bench { config, out } => cmd_bench(&config, out),
        Command::Gen { classes, samples, radius, noise, seed, out } => {
            cmd_gen(&BlobSpec::balanced(classes, samples, radius, noise, seed), out.as_deref())
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn write(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::domain(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn domain(e: Error) -> Failure {
    Failure::domain(e.to_string())
}

pub fn cmd_solve(
    path: &Path,
    solver: SolverKind,
    paper_literal_prox: bool,
    tau: Option<f64>,
    iters: Option<usize>,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let text = read(path)?;
    let file = ProblemFile::parse(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let problem = file.to_problem().map_err(|e| match e {
        Error::BudgetExceedsPool { .. } => domain(e),
        other => Failure::input(format!("{}: {other}", path.display())),
    })?;

    let greedy = GreedyConfig { tau: tau.unwrap_or(GreedyConfig::default().tau) };
    let iht = IhtConfig {
        iterations: iters.unwrap_or(IhtConfig::default().iterations),
        prox_mode: if paper_literal_prox { ProxMode::PaperLiteral } else { ProxMode::Corrected },
        ..IhtConfig::default()
    };
    greedy.validate().map_err(|e| Failure::input(format!("--tau: {e}")))?;
    iht.validate().map_err(|e| Failure::input(format!("--iters: {e}")))?;

    let result = match solver {
        SolverKind::Greedy => greedy_solve(&problem, &greedy),
        SolverKind::Iht => iht_solve(&problem, &iht),
        SolverKind::Oracle => brute_force_solve(&problem),
    }
    .map_err(domain)?;
    write(out, &ResultDocument::from_result(solver.name(), &result).to_toml())
}

pub fn cmd_al(path: &Path, seed: Option<u64>, out: Option<PathBuf>) -> Result<(), Failure> {
    let text = read(path)?;
    let mut config = RunConfigFile::parse(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    if let Some(seed) = seed {
        config.al.seeds = vec![seed];
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let dataset = config.dataset.load(base).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;

    let runs = config
        .al_configs()
        .iter()
        .map(|run| run_loop(&dataset, run))
        .collect::<crate::Result<Vec<_>>>()
        .map_err(domain)?;

    let curves = match out {
        Some(p) => p,
        None => base.join(&config.output.curves),
    };
    let summary = match &config.output.summary {
        Some(s) => base.join(s),
        None => config.summary_path(&curves),
    };
    write(Some(&curves), &curves_csv(&runs))?;
    write(Some(&summary), &summary_toml(&runs))?;
    for run in &runs {
        eprintln!("{:<18} seed {:<6} auc {:.3}", run.strategy.name(), run.seed, run.auc);
    }
    Ok(())
}

pub fn cmd_bench(path: &Path, out: Option<PathBuf>) -> Result<(), Failure> {
    let text = read(path)?;
    let file = BenchConfigFile::parse(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let rows = run_bench(&file.to_config()).map_err(domain)?;
    print!("{}", bench_table(&rows));
    let base = path.parent().unwrap_or(Path::new("."));
    let target = out.or_else(|| file.output.as_ref().and_then(|o| o.path.as_ref()).map(|p| base.join(p)));
    if let Some(target) = target {
        write(Some(&target), &bench_csv(&rows))?;
    }
    Ok(())
}

pub fn cmd_gen(spec: &BlobSpec, out: Option<&Path>) -> Result<(), Failure> {
    let data = generate_blobs(spec).map_err(|e| Failure::input(e.to_string()))?;
    write(out, &data.to_csv())
}
