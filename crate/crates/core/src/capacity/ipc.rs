use serde::{Deserialize, Serialize};

use super::basis::TargetBasis;
use super::eigentask::EigentaskDecomposition;
use super::gram::Readout;
use super::regression::{finish, weighted_target, CapacityThreshold, LeastSquares, NoisyProjector};
use crate::readout::{SignalMatrix, SignalMode};
use crate::reservoir::InputSequence;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IpcMethod {
    Spectral,
    ProbabilityTrace,
    BasisSum,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncation {
    pub max_delay: usize,
    pub max_degree: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IpcReport {
    pub ipc: f64,
    pub method: IpcMethod,
    /// Per-eigentask, per-bitstring or per-target contributions.
    pub terms: Vec<f64>,
    /// Number of signal columns `d`.
    pub signal_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub retained_rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    /// Terms left out of the sum: zero-mean columns or sub-threshold targets.
    pub excluded: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation: Option<Truncation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// `sum_k 1 / (1 + sigma_k^2)` over the retained eigentasks.
pub fn ipc_spectral(decomp: &EigentaskDecomposition) -> IpcReport {
    let terms: Vec<f64> = decomp.sigma_sq.iter().map(|s| 1.0 / (1.0 + s)).collect();
    let mut notes = Vec::new();
    if decomp.dropped_dims > 0 {
        notes.push(format!(
            "sum runs over the {} retained eigentasks of {} signals",
            decomp.retained_rank, decomp.signal_dim
        ));
    }
    IpcReport {
        ipc: terms.iter().sum(),
        method: IpcMethod::Spectral,
        terms,
        signal_count: decomp.signal_dim,
        retained_rank: Some(decomp.retained_rank),
        threshold: Some(decomp.rank_tolerance),
        excluded: decomp.dropped_dims,
        truncation: None,
        notes,
    }
}

/// `sum_k avg(p_k^2) / avg(p_k)` for exact probabilities under single-shot
/// readout. Columns with zero mean are never populated and are skipped.
pub fn ipc_probability_rep(signals: &SignalMatrix) -> Result<IpcReport> {
    if signals.mode() != SignalMode::ExactProbability {
        return Err(Error::ModeMismatch { expected: "exact-probability", found: signals.mode().name() });
    }
    let mean = signals.column_means();
    let mut sq = vec![0.0; signals.cols()];
    for t in 0..signals.rows() {
        let w = signals.weight(t);
        for (s, p) in sq.iter_mut().zip(signals.row(t)) {
            *s += w * p * p;
        }
    }
    let mut terms = Vec::with_capacity(mean.len());
    let mut excluded = 0;
    for (s, m) in sq.iter().zip(&mean) {
        if *m > 0.0 {
            terms.push(s / m);
        } else {
            excluded += 1;
            terms.push(0.0);
        }
    }
    if excluded > 0 {
        log::debug!("{excluded} bitstrings never populated; skipped");
    }
    Ok(IpcReport {
        ipc: terms.iter().sum(),
        method: IpcMethod::ProbabilityTrace,
        terms,
        signal_count: signals.cols(),
        retained_rank: None,
        threshold: None,
        excluded,
        truncation: None,
        notes: Vec::new(),
    })
}

/// Capacities summed over a truncated orthonormal target basis.
///
/// `inputs` must be the sequence that produced `signals`: its kept steps
/// line up with the signal rows. Capacities below the threshold are
/// reported in `terms` but left out of the total.
pub fn total_capacity(
    signals: &SignalMatrix,
    basis: &TargetBasis,
    inputs: &InputSequence,
    readout: Readout,
    threshold: CapacityThreshold,
) -> Result<IpcReport> {
    basis.check_orthonormal()?;
    if inputs.kept() != signals.rows() {
        return Err(Error::DimensionMismatch(format!(
            "{} kept inputs for {} signal rows",
            inputs.kept(),
            signals.rows()
        )));
    }
    let targets = basis.targets(inputs)?;
    let cut = threshold.value(signals);
    type Solver<'a> = Box<dyn Fn(&[f64]) -> (f64, Vec<f64>) + 'a>;
    let solve: Solver = match readout {
        Readout::Noiseless => {
            let ls = LeastSquares::new(signals)?;
            Box::new(move |y| ls.solve(&weighted_target(signals, y)))
        }
        _ => {
            let np = NoisyProjector::new(signals, readout)?;
            Box::new(move |y| np.solve(signals, y))
        }
    };
    let mut terms = Vec::with_capacity(targets.len());
    let mut excluded = 0;
    let mut total = 0.0;
    for y in &targets {
        if y.iter().all(|v| *v == 0.0) {
            excluded += 1;
            terms.push(0.0);
            continue;
        }
        let (raw, w) = solve(y);
        let report = finish(raw, w, signals.rows(), cut);
        if report.below_threshold {
            excluded += 1;
        } else {
            total += report.capacity;
        }
        terms.push(report.capacity);
    }
    Ok(IpcReport {
        ipc: total,
        method: IpcMethod::BasisSum,
        terms,
        signal_count: signals.cols(),
        retained_rank: None,
        threshold: Some(cut),
        excluded,
        truncation: Some(Truncation { max_delay: basis.max_delay, max_degree: basis.max_degree }),
        notes: Vec::new(),
    })
}
