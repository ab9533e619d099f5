use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::readout::{probability_signals_from_moments, SignalMatrix, SignalMode};
use crate::{Error, Result};

/// What the trained readout actually sees at each step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Readout {
    /// The expected signals themselves, without sampling noise.
    Noiseless,
    /// One sampled bitstring per step as a one-hot vector.
    SingleShot,
    /// Frequencies over this many shots per step.
    Shots(u64),
}

/// `g1 = avg(<X><X>^T)` and `g2 = avg(<X X^T>)` of a signal matrix.
#[derive(Clone, Debug)]
pub struct GramMatrices {
    pub g1: DMatrix<f64>,
    pub g2: DMatrix<f64>,
    /// Time-averaged expected signals.
    pub mean: Vec<f64>,
    pub readout: Readout,
    /// Shots behind empirical input signals, when they were empirical.
    pub source_shots: Option<u64>,
}

/// Weighted `X^T W X`.
fn weighted_outer(signals: &SignalMatrix) -> DMatrix<f64> {
    let (t, d) = (signals.rows(), signals.cols());
    let scaled = DMatrix::from_fn(t, d, |r, c| signals.get(r, c) * signals.weight(r).sqrt());
    scaled.transpose() * &scaled
}

/// Builds both Gram matrices under the given readout semantics.
///
/// A one-hot sample `x` satisfies `x x^T = diag(x)`, so a single-shot readout
/// has `g2 = diag(mean)`; an `S`-shot frequency readout has
/// `g2 = g1 + (diag(mean) - g1) / S`. Empirical frequencies are first turned
/// into an unbiased estimate of `g1` using their recorded shot count.
pub fn gram_matrices(signals: &SignalMatrix, readout: Readout) -> Result<GramMatrices> {
    if let Readout::Shots(0) = readout {
        return Err(Error::InvalidParameter("readout with zero shots".into()));
    }
    let (g1, mean) = match signals.mode() {
        SignalMode::ExactProbability => (weighted_outer(signals), signals.column_means()),
        SignalMode::EmpiricalFrequency => {
            let s = signals.shots().ok_or(Error::MissingShotMetadata)?;
            let raw = weighted_outer(signals);
            let mean = signals.column_means();
            let g1 = if s >= 2 {
                let sf = s as f64;
                let mut g = raw * (sf / (sf - 1.0));
                for (k, m) in mean.iter().enumerate() {
                    g[(k, k)] -= m / (sf - 1.0);
                }
                g
            } else {
                log::warn!("single-shot frequencies: g1 uses the biased plug-in estimate");
                raw
            };
            (g1, mean)
        }
        SignalMode::Moment if readout != Readout::Noiseless => {
            // moments are a fixed linear map Z of the probabilities, so both
            // Gram matrices transform as Z G Z^T
            let probs = probability_signals_from_moments(signals)?;
            let mut gram = gram_matrices(&probs, readout)?;
            gram.g1 = zeta_both_sides(&gram.g1);
            gram.g2 = zeta_both_sides(&gram.g2);
            gram.mean = signals.column_means();
            return Ok(gram);
        }
        SignalMode::Moment | SignalMode::Raw => {
            if readout != Readout::Noiseless {
                return Err(Error::ModeMismatch { expected: "probability or moment", found: signals.mode().name() });
            }
            (weighted_outer(signals), signals.column_means())
        }
    };
    let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(mean.clone()));
    let g2 = match readout {
        Readout::Noiseless => g1.clone(),
        Readout::SingleShot => diag,
        Readout::Shots(s) => &g1 + (diag - &g1) / s as f64,
    };
    let source_shots = if signals.mode() == SignalMode::EmpiricalFrequency { signals.shots() } else { None };
    Ok(GramMatrices { g1, g2, mean, readout, source_shots })
}

fn zeta_both_sides(g: &DMatrix<f64>) -> DMatrix<f64> {
    let d = g.nrows();
    let mut out = g.clone();
    for r in 0..d {
        let mut row: Vec<f64> = out.row(r).iter().copied().collect();
        crate::readout::superset_zeta(&mut row);
        for (c, v) in row.into_iter().enumerate() {
            out[(r, c)] = v;
        }
    }
    for c in 0..d {
        let mut col: Vec<f64> = out.column(c).iter().copied().collect();
        crate::readout::superset_zeta(&mut col);
        for (r, v) in col.into_iter().enumerate() {
            out[(r, c)] = v;
        }
    }
    out
}
