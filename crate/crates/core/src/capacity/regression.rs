use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::gram::{gram_matrices, Readout};
use super::linalg::{psd_pinv, thin_svd};
use super::DEFAULT_RANK_TOLERANCE;
use crate::readout::SignalMatrix;
use crate::{Error, Result};

const CLIP_EPS: f64 = 1e-9;

/// Cut below which a capacity is treated as finite-sample overfitting.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CapacityThreshold {
    /// `4 / sqrt(T)` for sampled rows; 0 for quadrature-weighted rows,
    /// which carry no sampling error.
    #[default]
    Auto,
    Fixed(f64),
}

impl CapacityThreshold {
    pub fn value(self, signals: &SignalMatrix) -> f64 {
        match self {
            CapacityThreshold::Fixed(v) => v,
            CapacityThreshold::Auto if signals.weights().is_some() => 0.0,
            CapacityThreshold::Auto => 4.0 / (signals.rows() as f64).sqrt(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CapacityReport {
    pub capacity: f64,
    /// Readout weights over all signal columns (zero on dropped ones).
    pub weights: Vec<f64>,
    pub rows: usize,
    pub threshold: f64,
    pub below_threshold: bool,
    pub clipped: bool,
}

fn weighted_column(signals: &SignalMatrix, y: &[f64]) -> Vec<f64> {
    y.iter().enumerate().map(|(t, v)| v * signals.weight(t).sqrt()).collect()
}

/// Noiseless least-squares readout shared across targets.
pub(crate) struct LeastSquares {
    u: DMatrix<f64>,
    // V S^{-1}, mapped back onto all columns
    back: DMatrix<f64>,
    cols: usize,
}

impl LeastSquares {
    pub(crate) fn new(signals: &SignalMatrix) -> Result<Self> {
        let (t, d) = (signals.rows(), signals.cols());
        let keep: Vec<usize> = (0..d).filter(|&j| (0..t).any(|r| signals.get(r, j) != 0.0)).collect();
        if keep.is_empty() {
            return Err(Error::DegenerateSignals);
        }
        if keep.len() < d {
            log::info!("dropping {} all-zero signal columns", d - keep.len());
        }
        if t < keep.len() {
            log::warn!("{t} rows for {} signal columns; capacities will overfit", keep.len());
        }
        let a = DMatrix::from_fn(t, keep.len(), |r, c| signals.get(r, keep[c]) * signals.weight(r).sqrt());
        let (u, sv, vt) = thin_svd(&a);
        let smax = sv.first().copied().unwrap_or(0.0);
        let tol = smax * f64::EPSILON * (t.max(keep.len()) as f64);
        let rank: Vec<usize> = (0..sv.len()).filter(|&k| sv[k] > tol).collect();
        let u = DMatrix::from_fn(t, rank.len(), |r, c| u[(r, rank[c])]);
        let back = DMatrix::from_fn(d, rank.len(), |j, c| match keep.iter().position(|&k| k == j) {
            Some(i) => vt[(rank[c], i)] / sv[rank[c]],
            None => 0.0,
        });
        Ok(Self { u, back, cols: d })
    }

    /// Capacity before clipping, and readout weights.
    pub(crate) fn solve(&self, yw: &[f64]) -> (f64, Vec<f64>) {
        let y = DVector::from_row_slice(yw);
        let norm = y.norm_squared();
        let proj = self.u.transpose() * &y;
        let w = &self.back * &proj;
        debug_assert_eq!(w.len(), self.cols);
        (proj.norm_squared() / norm, w.iter().copied().collect())
    }
}

/// Noise-aware readout: `C = b^T g2^+ b / avg(y^2)` with `b = avg(<X> y)`.
pub(crate) struct NoisyProjector {
    pinv: DMatrix<f64>,
}

impl NoisyProjector {
    pub(crate) fn new(signals: &SignalMatrix, readout: Readout) -> Result<Self> {
        let gram = gram_matrices(signals, readout)?;
        Ok(Self { pinv: psd_pinv(&gram.g2, DEFAULT_RANK_TOLERANCE) })
    }

    pub(crate) fn solve(&self, signals: &SignalMatrix, y: &[f64]) -> (f64, Vec<f64>) {
        let d = signals.cols();
        let mut b = DVector::zeros(d);
        let mut norm = 0.0;
        for (t, &v) in y.iter().enumerate() {
            let w = signals.weight(t);
            norm += w * v * v;
            for (j, x) in signals.row(t).iter().enumerate() {
                b[j] += w * x * v;
            }
        }
        let omega = &self.pinv * &b;
        (b.dot(&omega) / norm, omega.iter().copied().collect())
    }
}

fn check_target(signals: &SignalMatrix, y: &[f64]) -> Result<()> {
    if y.len() != signals.rows() {
        return Err(Error::DimensionMismatch(format!("target has {} rows, signals {}", y.len(), signals.rows())));
    }
    if let Some(t) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite target at row {t}")));
    }
    if y.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroTarget);
    }
    Ok(())
}

pub(crate) fn finish(raw: f64, weights: Vec<f64>, rows: usize, threshold: f64) -> CapacityReport {
    let clipped = !(0.0..=1.0).contains(&raw);
    if clipped {
        if !(-CLIP_EPS..=1.0 + CLIP_EPS).contains(&raw) {
            log::warn!("capacity {raw} outside [0, 1] beyond round-off; clipped");
        } else {
            log::debug!("capacity {raw:e} clipped to [0, 1]");
        }
    }
    let capacity = raw.clamp(0.0, 1.0);
    CapacityReport { capacity, weights, rows, threshold, below_threshold: capacity < threshold, clipped }
}

/// `1 - min_w sum_t (X w - y)^2 / sum_t y^2` over the signal rows, solved
/// through a rank-revealing SVD. Row weights, when present, weight the sums.
pub fn capacity(signals: &SignalMatrix, target: &[f64]) -> Result<CapacityReport> {
    capacity_with_readout(signals, target, Readout::Noiseless, CapacityThreshold::Auto)
}

/// Capacity of the best linear readout of sampled outputs.
///
/// With `Readout::Noiseless` this is the least-squares capacity on the
/// expected signals; otherwise the readout is trained against sampled
/// outputs whose second moments are given by the readout semantics.
pub fn capacity_with_readout(
    signals: &SignalMatrix,
    target: &[f64],
    readout: Readout,
    threshold: CapacityThreshold,
) -> Result<CapacityReport> {
    check_target(signals, target)?;
    let cut = threshold.value(signals);
    let (raw, w) = match readout {
        Readout::Noiseless => LeastSquares::new(signals)?.solve(&weighted_column(signals, target)),
        _ => NoisyProjector::new(signals, readout)?.solve(signals, target),
    };
    Ok(finish(raw, w, signals.rows(), cut))
}

pub(crate) fn weighted_target(signals: &SignalMatrix, y: &[f64]) -> Vec<f64> {
    weighted_column(signals, y)
}
