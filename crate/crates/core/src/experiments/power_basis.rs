use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::capacity::linalg::thin_svd;
use crate::capacity::{total_capacity, CapacityThreshold, IpcReport, Readout, TargetBasis};
use crate::readout::{SignalMatrix, SignalMode};
use crate::reservoir::InputMeasure;
use crate::{Error, Result};

const MAX_POWER_BITS: usize = 6;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PowerBasisReport {
    pub n: usize,
    pub rows: usize,
    /// Numeric rank of the product columns.
    pub rank: usize,
    pub expected_rank: usize,
    /// Singular values of the normalized signal matrix, descending.
    pub singular_values: Vec<f64>,
    pub rank_tolerance: f64,
    pub capacity: IpcReport,
}

/// Signals `x^(2^i)` for `i < n` and all their products `x^j`, `j < 2^n`.
///
/// The products of distinct powers of two reach every degree below `2^n`
/// exactly once, so a deterministic `n`-signal reservoir spans `2^n`
/// independent polynomials. Reports the numeric rank and the basis-sum
/// capacity against Legendre targets of degree `< 2^n`.
pub fn power_basis_demo(n: usize, rows: usize, measure: &InputMeasure) -> Result<PowerBasisReport> {
    if n == 0 || n > MAX_POWER_BITS {
        return Err(Error::InvalidParameter(format!("power basis needs 1 <= n <= {MAX_POWER_BITS}, got {n}")));
    }
    let dim = 1usize << n;
    let inputs = measure.sequence(rows, 0, 0);
    let xs = inputs.drives();
    let (lo, hi) = measure.support();
    let columns: Vec<Vec<f64>> = (0..dim)
        .map(|j| xs.iter().map(|u| ((2.0 * u - lo - hi) / (hi - lo)).powi(j as i32)).collect())
        .collect();
    let signals = SignalMatrix::from_columns(n, SignalMode::Raw, (0..dim as u64).collect(), &columns)?;

    // rank from the column-normalized matrix so scale does not matter
    let a = DMatrix::from_fn(rows, dim, |r, c| columns[c][r]);
    let norms: Vec<f64> = (0..dim).map(|c| a.column(c).norm()).collect();
    let a = DMatrix::from_fn(rows, dim, |r, c| a[(r, c)] / norms[c]);
    let (_, singular_values, _) = thin_svd(&a);
    let rank_tolerance = f64::EPSILON * rows.max(dim) as f64;
    let rank = singular_values.iter().filter(|s| **s > rank_tolerance * singular_values[0]).count();
    if rank < dim {
        let ratio = singular_values.last().copied().unwrap_or(0.0) / singular_values[0];
        return Err(Error::ConditioningFailure { rank, expected: dim, ratio });
    }

    let basis = TargetBasis::legendre(0, dim - 1, measure.clone())?;
    let capacity = total_capacity(&signals, &basis, &inputs, Readout::Noiseless, CapacityThreshold::Auto)?;
    Ok(PowerBasisReport { n, rows, rank, expected_rank: dim, singular_values, rank_tolerance, capacity })
}
