//! Temperature scaling.

use ndarray::ArrayView2;

use crate::error::{Error, Result};
use crate::models::log_sum_exp;

/// Search interval for the temperature.
pub const TEMPERATURE_RANGE: (f64, f64) = (0.05, 10.0);
const RESOLUTION: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationResult {
    pub temperature: f64,
    pub nll_before: f64,
    pub nll_after: f64,
}

/// Mean negative log-likelihood of `softmax(z / temperature)`.
pub fn mean_nll(logits: ArrayView2<f64>, labels: &[usize], temperature: f64) -> f64 {
    let mut total = 0.0;
    let mut scaled = Vec::with_capacity(logits.ncols());
    for (row, &y) in logits.rows().into_iter().zip(labels) {
        scaled.clear();
        scaled.extend(row.iter().map(|z| z / temperature));
        total += log_sum_exp(&scaled) - scaled[y];
    }
    total / labels.len() as f64
}

/// Fits a single temperature on validation logits by golden-section search.
///
/// NLL is convex in `1/T`, hence unimodal in `T` on the search interval. The
/// result never does worse than `T = 1`; constant-logit rows make the
/// objective flat and return `T = 1`.
pub fn fit_temperature(val_logits: ArrayView2<f64>, val_labels: &[usize]) -> Result<CalibrationResult> {
    if val_labels.is_empty() || val_logits.nrows() == 0 {
        return Err(Error::EmptyValidationSet);
    }
    if val_logits.nrows() != val_labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} logit rows but {} labels",
            val_logits.nrows(),
            val_labels.len()
        )));
    }
    let classes = val_logits.ncols();
    if let Some(&label) = val_labels.iter().find(|&&y| y >= classes) {
        return Err(Error::LabelOutOfRange { label, classes });
    }

    let nll = |t: f64| mean_nll(val_logits, val_labels, t);
    let nll_before = nll(1.0);
    let flat = val_logits.rows().into_iter().all(|row| row.iter().all(|z| *z == row[0]));
    if flat {
        return Ok(CalibrationResult { temperature: 1.0, nll_before, nll_after: nll_before });
    }

    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = TEMPERATURE_RANGE;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut f1 = nll(x1);
    let mut f2 = nll(x2);
    while hi - lo > RESOLUTION {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = nll(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = nll(x2);
        }
    }
    let mut temperature = 0.5 * (lo + hi);
    let mut nll_after = nll(temperature);
    if nll_after > nll_before {
        temperature = 1.0;
        nll_after = nll_before;
    }
    Ok(CalibrationResult { temperature, nll_before, nll_after })
}
