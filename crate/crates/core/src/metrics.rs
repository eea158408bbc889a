//! Error metrics for surrogate predictions on full space–time grids, and the
//! relative gain of one method over a baseline.
//!
//! Fields are stored slice-major: value `it * space + i` is spatial point `i`
//! of time slice `it`, matching [`FieldLayout`].
//!
//! ```
//! use smartpde::metrics::{gain, rmse};
//!
//! assert!((rmse(&[1.0, 2.0], &[0.0, 0.0]).unwrap() - 2.5_f64.sqrt()).abs() < 1e-15);
//! assert!((gain(0.00284, 0.00506).unwrap() - 43.87).abs() < 0.01);
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Error, Result};
use crate::pde::FieldLayout;

fn check(pred: &[f64], truth: &[f64]) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(shape_err(format!("{} predictions for {} reference values", pred.len(), truth.len())));
    }
    if pred.is_empty() {
        return Err(shape_err("metrics need at least one value"));
    }
    Ok(())
}

fn check_layout(pred: &[f64], truth: &[f64], layout: &FieldLayout) -> Result<()> {
    check(pred, truth)?;
    if pred.len() != layout.len() || layout.boundary.len() != layout.space {
        return Err(shape_err(format!(
            "field of {} values does not match a {} x {} layout",
            pred.len(),
            layout.slices,
            layout.space
        )));
    }
    Ok(())
}

/// `sqrt(mean((pred − truth)²))`
pub fn rmse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check(pred, truth)?;
    let sq: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok((sq / pred.len() as f64).sqrt())
}

/// RMSE divided by the RMS of the reference values.
pub fn n_rmse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    let e = rmse(pred, truth)?;
    let rms = (truth.iter().map(|t| t * t).sum::<f64>() / truth.len() as f64).sqrt();
    if rms == 0.0 {
        return Err(Error::DegenerateTruth);
    }
    Ok(e / rms)
}

/// `Σ u · cell_measure` for every slice.
pub fn conserved_series(field: &[f64], layout: &FieldLayout) -> Vec<f64> {
    field
        .chunks(layout.space)
        .map(|slice| slice.iter().sum::<f64>() * layout.cell_measure)
        .collect()
}

/// RMSE between the predicted and reference mass time series.
pub fn rmse_conserved(pred: &[f64], truth: &[f64], layout: &FieldLayout) -> Result<f64> {
    check_layout(pred, truth, layout)?;
    rmse(&conserved_series(pred, layout), &conserved_series(truth, layout))
}

/// RMSE over spatial boundary points of every slice.
pub fn rmse_boundary(pred: &[f64], truth: &[f64], layout: &FieldLayout) -> Result<f64> {
    check_layout(pred, truth, layout)?;
    let (mut sq, mut n) = (0.0, 0usize);
    for (i, (p, t)) in pred.iter().zip(truth).enumerate() {
        if layout.boundary[i % layout.space] {
            sq += (p - t) * (p - t);
            n += 1;
        }
    }
    if n == 0 {
        return Err(shape_err("layout has no boundary points"));
    }
    Ok((sq / n as f64).sqrt())
}

/// Largest per-slice spatial RMSE.
pub fn max_error(pred: &[f64], truth: &[f64], layout: &FieldLayout) -> Result<f64> {
    check_layout(pred, truth, layout)?;
    let mut worst = 0.0_f64;
    for (p, t) in pred.chunks(layout.space).zip(truth.chunks(layout.space)) {
        worst = worst.max(rmse(p, t)?);
    }
    Ok(worst)
}

/// Percentage error reduction `(1 − e_ours / e_baseline) · 100`.
pub fn gain(e_ours: f64, e_baseline: f64) -> Result<f64> {
    if !(e_baseline > 0.0) {
        return Err(Error::DegenerateBaseline(e_baseline));
    }
    Ok((1.0 - e_ours / e_baseline) * 100.0)
}

/// Interleaves several channels into one field whose slices hold every
/// channel's spatial points back to back.
pub fn stack_channels(channels: &[&[f64]], layout: &FieldLayout) -> Result<(Vec<f64>, FieldLayout)> {
    if channels.iter().any(|c| c.len() != layout.len()) {
        return Err(shape_err("channel length does not match layout"));
    }
    let mut out = Vec::with_capacity(layout.len() * channels.len());
    for it in 0..layout.slices {
        for c in channels {
            out.extend_from_slice(&c[it * layout.space..(it + 1) * layout.space]);
        }
    }
    let stacked = FieldLayout {
        slices: layout.slices,
        space: layout.space * channels.len(),
        boundary: layout.boundary.repeat(channels.len()),
        cell_measure: layout.cell_measure,
    };
    Ok((out, stacked))
}

/// One row of the metrics CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub task: String,
    pub method: String,
    pub num_points: usize,
    pub seed: u64,
    pub rmse: f64,
    pub n_rmse: f64,
    pub rmse_c: f64,
    pub rmse_b: f64,
    pub max_error: f64,
}

/// Names of the error columns, in CSV order.
pub const METRIC_NAMES: [&str; 5] = ["rmse", "n_rmse", "rmse_c", "rmse_b", "max_error"];

/// Error values of one evaluation, without run metadata.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldErrors {
    pub rmse: f64,
    pub n_rmse: f64,
    pub rmse_c: f64,
    pub rmse_b: f64,
    pub max_error: f64,
}

impl FieldErrors {
    /// Metrics over all output channels.
    ///
    /// RMSE, N RMSE, RMSE B and Max Error pool every channel; RMSE C averages
    /// the per-channel RMSE of the channels listed in `conserved`.
    pub fn compute(
        pred: &[&[f64]],
        truth: &[&[f64]],
        layout: &FieldLayout,
        conserved: &[usize],
    ) -> Result<Self> {
        if pred.len() != truth.len() || pred.is_empty() {
            return Err(shape_err("prediction and reference channel counts differ"));
        }
        let (p, stacked) = stack_channels(pred, layout)?;
        let (t, _) = stack_channels(truth, layout)?;
        let mut rmse_c = 0.0;
        for &c in conserved {
            let (pc, tc) = (pred.get(c), truth.get(c));
            let (Some(pc), Some(tc)) = (pc, tc) else {
                return Err(shape_err(format!("no output channel {c}")));
            };
            rmse_c += rmse_conserved(pc, tc, layout)?;
        }
        if !conserved.is_empty() {
            rmse_c /= conserved.len() as f64;
        }
        Ok(Self {
            rmse: rmse(&p, &t)?,
            n_rmse: n_rmse(&p, &t)?,
            rmse_c,
            rmse_b: rmse_boundary(&p, &t, &stacked)?,
            max_error: max_error(&p, &t, &stacked)?,
        })
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        match name {
            "rmse" => Some(self.rmse),
            "n_rmse" => Some(self.n_rmse),
            "rmse_c" => Some(self.rmse_c),
            "rmse_b" => Some(self.rmse_b),
            "max_error" => Some(self.max_error),
            _ => None,
        }
    }
}

impl MetricsRecord {
    pub fn new(task: &str, method: &str, num_points: usize, seed: u64, e: FieldErrors) -> Self {
        Self {
            task: task.to_string(),
            method: method.to_string(),
            num_points,
            seed,
            rmse: e.rmse,
            n_rmse: e.n_rmse,
            rmse_c: e.rmse_c,
            rmse_b: e.rmse_b,
            max_error: e.max_error,
        }
    }

    pub fn errors(&self) -> FieldErrors {
        FieldErrors {
            rmse: self.rmse,
            n_rmse: self.n_rmse,
            rmse_c: self.rmse_c,
            rmse_b: self.rmse_b,
            max_error: self.max_error,
        }
    }

    pub fn is_valid(&self) -> bool {
        METRIC_NAMES.iter().all(|m| self.errors().get(m).is_some_and(|v| v.is_finite() && v >= 0.0))
    }
}

/// Median of a non-empty sample (mean of the middle pair for even sizes).
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len().is_multiple_of(2) { (v[mid - 1] + v[mid]) / 2.0 } else { v[mid] })
}
