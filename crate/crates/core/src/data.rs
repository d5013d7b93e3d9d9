//! Labeled datasets, the Gaussian-blob generator and the dataset CSV format.
//!
//! CSV layout: header `label,f1,f2,…`, one row per example, integer class
//! index then features written with 17 significant digits.

use std::fmt::Write as _;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Array2<f64>,
    pub labels: Vec<usize>,
    pub classes: usize,
}

impl Dataset {
    pub fn new(features: Array2<f64>, labels: Vec<usize>, classes: usize) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} feature rows but {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        if let Some(&label) = labels.iter().find(|&&y| y >= classes) {
            return Err(Error::LabelOutOfRange { label, classes });
        }
        Ok(Self { features, labels, classes })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select(Axis(0), indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            classes: self.classes,
        }
    }

    /// Seeded 70/10/20 train/validation/test split.
    pub fn split(&self, seed: u64) -> SplitDataset {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let n_train = self.len() * 7 / 10;
        let n_val = self.len() / 10;
        SplitDataset {
            train: self.subset(&order[..n_train]),
            validation: self.subset(&order[n_train..n_train + n_val]),
            test: self.subset(&order[n_train + n_val..]),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("label");
        for i in 1..=self.dim() {
            write!(out, ",f{i}").unwrap();
        }
        out.push('\n');
        for (row, label) in self.features.rows().into_iter().zip(&self.labels) {
            write!(out, "{label}").unwrap();
            for x in row {
                out.push(',');
                out.push_str(&format_float(*x));
            }
            out.push('\n');
        }
        out
    }

    /// Parses the dataset CSV. `classes` defaults to `max(label) + 1`.
    pub fn from_csv(text: &str, classes: Option<usize>) -> std::result::Result<Self, String> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| "line 1: missing header".to_string())?;
        let columns: Vec<&str> = header.split(',').collect();
        if columns.first() != Some(&"label") {
            return Err("line 1: first column must be `label`".into());
        }
        for (i, name) in columns.iter().enumerate().skip(1) {
            if *name != format!("f{i}") {
                return Err(format!("line 1: column {} must be `f{i}`, found `{name}`", i + 1));
            }
        }
        let dim = columns.len() - 1;
        if dim == 0 {
            return Err("line 1: no feature columns".into());
        }
        let mut values = Vec::new();
        let mut labels = Vec::new();
        for (idx, line) in lines {
            let lineno = idx + 1;
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != dim + 1 {
                return Err(format!("line {lineno}: expected {} fields, found {}", dim + 1, fields.len()));
            }
            let label: usize = fields[0]
                .parse()
                .map_err(|_| format!("line {lineno}: `label` is not a class index: `{}`", fields[0]))?;
            labels.push(label);
            for (i, f) in fields[1..].iter().enumerate() {
                let x: f64 = f.parse().map_err(|_| format!("line {lineno}: `f{}` is not a number: `{f}`", i + 1))?;
                if !x.is_finite() {
                    return Err(format!("line {lineno}: `f{}` is not finite", i + 1));
                }
                values.push(x);
            }
        }
        let max_label = labels.iter().copied().max().unwrap_or(0);
        let classes = classes.unwrap_or(max_label + 1).max(2);
        if max_label >= classes {
            return Err(format!("label {max_label} out of range for {classes} classes"));
        }
        let features = Array2::from_shape_vec((labels.len(), dim), values).map_err(|e| e.to_string())?;
        Dataset::new(features, labels, classes).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitDataset {
    pub train: Dataset,
    pub validation: Dataset,
    pub test: Dataset,
}

/// Parameters of the 2-D Gaussian-blob generator.
#[derive(Debug, Clone, PartialEq)]
pub struct BlobSpec {
    /// Number of points in each class; its length is the class count.
    pub per_class: Vec<usize>,
    /// Radius of the circle carrying the class centers.
    pub radius: f64,
    /// Standard deviation of the isotropic noise.
    pub noise: f64,
    pub seed: u64,
}

impl BlobSpec {
    /// `total` points spread as evenly as possible over `classes` classes.
    pub fn balanced(classes: usize, total: usize, radius: f64, noise: f64, seed: u64) -> Self {
        let per_class = (0..classes).map(|k| total / classes + usize::from(k < total % classes)).collect();
        Self { per_class, radius, noise, seed }
    }
}

/// Isotropic Gaussian clusters in the plane, class `k` centered at angle
/// `φ + 2πk/K` on the circle, with the phase `φ` drawn from the seed.
/// Rows are grouped by class.
pub fn generate_blobs(spec: &BlobSpec) -> Result<Dataset> {
    let classes = spec.per_class.len();
    if classes < 2 {
        return Err(Error::ConfigInvalid("blobs need at least 2 classes".into()));
    }
    if !(spec.radius.is_finite() && spec.radius >= 0.0) || !(spec.noise.is_finite() && spec.noise >= 0.0) {
        return Err(Error::ConfigInvalid("radius and noise must be finite and >= 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let total: usize = spec.per_class.iter().sum();
    let mut values = Vec::with_capacity(total * 2);
    let mut labels = Vec::with_capacity(total);
    for (k, &count) in spec.per_class.iter().enumerate() {
        let angle = phase + std::f64::consts::TAU * k as f64 / classes as f64;
        let (cx, cy) = (spec.radius * angle.cos(), spec.radius * angle.sin());
        for _ in 0..count {
            let dx: f64 = StandardNormal.sample(&mut rng);
            let dy: f64 = StandardNormal.sample(&mut rng);
            values.push(cx + spec.noise * dx);
            values.push(cy + spec.noise * dy);
            labels.push(k);
        }
    }
    let features = Array2::from_shape_vec((total, 2), values).expect("two columns");
    Dataset::new(features, labels, classes)
}

/// Generates blobs and splits them with the same seed.
pub fn make_blobs(spec: &BlobSpec) -> Result<SplitDataset> {
    Ok(generate_blobs(spec)?.split(spec.seed))
}

/// Scientific notation with 17 significant digits, which round-trips every `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}
