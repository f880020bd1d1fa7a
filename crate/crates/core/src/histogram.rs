//! Binned estimates of the gap density `G(x,t)` and pair correlation `P₂(r,t)`.

use serde::{Deserialize, Serialize};

/// What a histogram estimates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistogramKind {
    GapDensity,
    PairCorrelation,
}

/// Normalization metadata carried alongside the bin values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    /// Box length (1D) or area (2D) of a single replica, in reduced units.
    pub box_measure: f64,
    /// Number of replicas merged into the bin values.
    pub replicas: usize,
    /// Number density at the snapshot (mean over replicas).
    pub density: f64,
}

/// A uniformly binned distribution starting at zero.
///
/// `values[k]` is the estimate on `[k·w, (k+1)·w)`; for a single replica
/// `std_errors` is all zeros. Lengths are in units of the final object size
/// and times in units of `τ`, so gap-density values are `ℓ(∞)²·G`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionHistogram {
    pub kind: HistogramKind,
    pub bin_width: f64,
    pub snapshot_time: f64,
    pub values: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub normalization: Normalization,
}

impl DistributionHistogram {
    pub fn new(
        kind: HistogramKind,
        bin_width: f64,
        snapshot_time: f64,
        values: Vec<f64>,
        normalization: Normalization,
    ) -> Self {
        let std_errors = vec![0.0; values.len()];
        Self { kind, bin_width, snapshot_time, values, std_errors, normalization }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn bin_center(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.bin_width
    }

    pub fn bin_bounds(&self, k: usize) -> (f64, f64) {
        (k as f64 * self.bin_width, (k + 1) as f64 * self.bin_width)
    }

    /// `Σ values·w`; equals `n(t)` for a gap-density histogram.
    pub fn zeroth_moment(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.bin_width
    }

    /// `Σ x_mid·values·w`.
    pub fn first_moment(&self) -> f64 {
        self.values.iter().enumerate().map(|(k, v)| self.bin_center(k) * v).sum::<f64>() * self.bin_width
    }

    /// Largest bin value, or 0 for an empty histogram.
    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// `(bin_center, value, std_error)` triples.
    pub fn points(&self) -> Vec<(f64, f64, f64)> {
        (0..self.len()).map(|k| (self.bin_center(k), self.values[k], self.std_errors[k])).collect()
    }

    pub(crate) fn pad_to(&mut self, len: usize) {
        if self.values.len() < len {
            self.values.resize(len, 0.0);
            self.std_errors.resize(len, 0.0);
        }
    }
}
