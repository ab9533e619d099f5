//! Reconstruction capacities, the noise-to-signal spectrum and IPC.
//!
//! Three routes to the information processing capacity are provided and are
//! expected to agree on exact-mode signals:
//!
//! * `spectral`: eigenvalues of the generalized noise-to-signal problem
//!   built from the Gram matrices of the signals,
//! * `probability-trace`: `sum_k avg(p_k^2) / avg(p_k)` over bitstrings,
//! * `basis-sum`: capacities summed over a truncated orthonormal target basis.

mod basis;
mod eigentask;
mod gram;
mod ipc;
pub(crate) mod linalg;
mod regression;

pub use basis::TargetBasis;
pub use eigentask::{eigentask_decomposition, EigentaskDecomposition, DEFAULT_RANK_TOLERANCE};
pub use gram::{gram_matrices, GramMatrices, Readout};
pub use ipc::{ipc_probability_rep, ipc_spectral, total_capacity, IpcMethod, IpcReport, Truncation};
pub use regression::{capacity, capacity_with_readout, CapacityReport, CapacityThreshold};

/// Ideal spectral IPC of a signal matrix under the given readout semantics.
pub fn spectral_ipc(signals: &crate::readout::SignalMatrix, readout: Readout) -> crate::Result<IpcReport> {
    let gram = gram_matrices(signals, readout)?;
    let decomp = eigentask_decomposition(&gram.g1, &gram.g2, DEFAULT_RANK_TOLERANCE)?;
    Ok(ipc_spectral(&decomp))
}
