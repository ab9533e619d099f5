use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::linalg::{is_diagonal, sym_eigen, symmetrize};
use crate::{Error, Result};

/// Relative eigenvalue cut used for rank decisions.
pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-10;
const PSD_TOL: f64 = 1e-8;
const CLIP_TOL: f64 = 1e-10;

/// Noise-to-signal spectrum of a reservoir and the eigentasks behind it.
///
/// `sigma_sq[k]` is the noise-to-signal ratio of eigentask `k`, ascending.
/// `eigentasks` are orthonormal in the noise-whitened signal coordinates;
/// `readout_weights[k]` maps the raw signals onto eigentask `k`, normalized
/// so that its readout has unit second moment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigentaskDecomposition {
    pub sigma_sq: Vec<f64>,
    pub eigentasks: Vec<Vec<f64>>,
    pub readout_weights: Vec<Vec<f64>>,
    pub retained_rank: usize,
    /// Signal-space directions dropped as rank-deficient or pure noise.
    pub dropped_dims: usize,
    pub rank_tolerance: f64,
    /// Rank of the second-moment matrix.
    pub noise_rank: usize,
    pub signal_dim: usize,
}

/// Solves the generalized problem `g2 v = (1 + sigma^2) g1 v`.
///
/// The second-moment matrix `g2` is whitened first (it dominates `g1`, so
/// its range contains every signal direction), then the whitened `g1` is
/// diagonalized. Its eigenvalues `mu = 1 / (1 + sigma^2)` lie in `[0, 1]`;
/// those below `rank_tolerance * max(mu)` are dropped.
pub fn eigentask_decomposition(g1: &DMatrix<f64>, g2: &DMatrix<f64>, rank_tolerance: f64) -> Result<EigentaskDecomposition> {
    let d = g1.nrows();
    if g1.ncols() != d || g2.nrows() != d || g2.ncols() != d {
        return Err(Error::DimensionMismatch(format!("g1 {}x{}, g2 {}x{}", g1.nrows(), g1.ncols(), g2.nrows(), g2.ncols())));
    }
    if d == 0 {
        return Err(Error::EmptyRank);
    }
    let g1 = symmetrize(g1);
    let g2 = symmetrize(g2);
    check_psd("g1", &g1)?;

    // whitening basis for g2: columns scaled by lambda^{-1/2}
    let (whitening, condition): (DMatrix<f64>, f64) = if is_diagonal(&g2) {
        let diag: Vec<f64> = (0..d).map(|i| g2[(i, i)]).collect();
        if let Some(v) = diag.iter().find(|v| **v < 0.0) {
            return Err(Error::NotPsd { which: "g2", eigenvalue: *v });
        }
        let kept: Vec<usize> = (0..d).filter(|&i| diag[i] > 0.0).collect();
        let w = DMatrix::from_fn(d, kept.len(), |r, c| if r == kept[c] { diag[r].powf(-0.5) } else { 0.0 });
        (w, 1.0)
    } else {
        let (vals, vecs) = sym_eigen(&g2);
        let max = vals.last().copied().unwrap_or(0.0);
        if vals[0] < -PSD_TOL * max.abs().max(f64::MIN_POSITIVE) {
            return Err(Error::NotPsd { which: "g2", eigenvalue: vals[0] });
        }
        let kept: Vec<usize> = (0..d).filter(|&k| vals[k] > rank_tolerance * max && vals[k] > 0.0).collect();
        let w = DMatrix::from_fn(d, kept.len(), |r, c| vecs[(r, kept[c])] / vals[kept[c]].sqrt());
        let cond = kept.first().map_or(1.0, |&k| max / vals[k]);
        (w, cond)
    };
    // whitening through an eigenbasis amplifies rounding by the condition number
    let psd_tol = PSD_TOL.max(64.0 * f64::EPSILON * condition);
    let noise_rank = whitening.ncols();
    if noise_rank == 0 {
        return Err(Error::EmptyRank);
    }
    let whitened = whitening.transpose() * &g1 * &whitening;
    let (mu, vecs) = sym_eigen(&whitened);
    let mu_max = mu.last().copied().unwrap_or(0.0);
    if !(mu_max > 0.0) {
        return Err(Error::EmptyRank);
    }
    let mut sigma_sq = Vec::new();
    let mut eigentasks = Vec::new();
    let mut readout_weights = Vec::new();
    for k in (0..mu.len()).rev() {
        if mu[k] <= rank_tolerance * mu_max {
            break;
        }
        let mut s2 = 1.0 / mu[k] - 1.0;
        if s2 < 0.0 {
            if s2 < -psd_tol {
                return Err(Error::NotPsd { which: "g2 - g1", eigenvalue: s2 });
            }
            if s2 < -CLIP_TOL {
                log::debug!("clipping noise-to-signal ratio {s2:e} to 0");
            }
            s2 = 0.0;
        }
        let u = vecs.column(k);
        sigma_sq.push(s2);
        eigentasks.push(u.iter().copied().collect());
        readout_weights.push((&whitening * u).iter().copied().collect());
    }
    let retained_rank = sigma_sq.len();
    Ok(EigentaskDecomposition {
        sigma_sq,
        eigentasks,
        readout_weights,
        retained_rank,
        dropped_dims: d - retained_rank,
        rank_tolerance,
        noise_rank,
        signal_dim: d,
    })
}

fn check_psd(which: &'static str, m: &DMatrix<f64>) -> Result<()> {
    let (vals, _) = sym_eigen(m);
    let max = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    match vals.first() {
        Some(&v) if v < -PSD_TOL * max => Err(Error::NotPsd { which, eigenvalue: v }),
        _ => Ok(()),
    }
}
