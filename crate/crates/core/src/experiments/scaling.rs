use serde::{Deserialize, Serialize};

use super::{line_fit, LineFit};
use crate::capacity::ipc_probability_rep;
use crate::readout::probability_signals;
use crate::reservoir::{DriveFn, InputMeasure, Reservoir, ReservoirSpec, StochasticGate};
use crate::{Error, Result};

/// Largest register scanned in exact mode.
pub const MAX_SCAN_BITS: usize = 12;
const MAX_ENUMERATED_LEAVES: f64 = (1u64 << 22) as f64;

/// How the input average inside the IPC is taken.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Averaging {
    /// Time average along one sampled input sequence; the error bar comes
    /// from the spread of per-block IPC values.
    Sampled { steps: usize, washout: usize, blocks: usize },
    /// Exact expectation over every input history of length `window` from
    /// the initial state. Needs a discrete measure.
    Enumerated { window: usize },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalingCurve {
    pub lambda: f64,
    pub n: Vec<usize>,
    pub ipc: Vec<f64>,
    pub ipc_stderr: Vec<f64>,
    /// log IPC against n.
    pub exponential_fit: LineFit,
    /// log IPC against log n.
    pub polynomial_fit: LineFit,
    pub subexponential_consistent: bool,
    /// Whether IPC / 2^n decreased at every step of the scan.
    pub ratio_decreasing: bool,
}

/// Shift register whose first bit is redrawn from the drive every step,
/// followed by an independent flip of every bit with probability `lambda`.
///
/// Per step: bit `i - 1` is copied into bit `i` from the top down, bit 0 is
/// set with probability `(1 + u) / 2`, then every bit flips.
pub fn noisy_shift_register(n: usize, lambda: f64) -> Result<ReservoirSpec> {
    if !(0.0..=0.5).contains(&lambda) {
        return Err(Error::InvalidParameter(format!("flip rate {lambda} outside [0, 0.5]")));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("register needs at least one bit".into()));
    }
    let mut gates: Vec<StochasticGate> = (1..n).rev().map(|i| StochasticGate::copy(i - 1, i)).collect();
    gates.push(StochasticGate::set_bit(0, DriveFn::linear(1.0)));
    gates.extend((0..n).map(|i| StochasticGate::flip(i, lambda)));
    Ok(ReservoirSpec::new(n, gates))
}

/// Closed form for [`noisy_shift_register`] under +-1 inputs once every bit
/// has been written: the bits are independent with biases
/// `(1 - 2 lambda)^(i + 1) u(t - i)`, so the IPC factorizes.
pub fn noisy_shift_register_ipc(n: usize, lambda: f64) -> f64 {
    let a = 1.0 - 2.0 * lambda;
    (0..n).map(|i| 1.0 + a.powi(2 * (i as i32 + 1))).product()
}

fn sampled_ipc(res: &Reservoir, measure: &InputMeasure, steps: usize, washout: usize, blocks: usize, stream: u64) -> Result<(f64, f64)> {
    if blocks == 0 || steps < blocks {
        return Err(Error::InvalidParameter(format!("{steps} steps cannot fill {blocks} blocks")));
    }
    let dists = res.run_exact(&measure.sequence(steps, washout, stream))?;
    let ipc = ipc_probability_rep(&probability_signals(&dists)?)?.ipc;
    if blocks == 1 {
        return Ok((ipc, f64::NAN));
    }
    let size = steps / blocks;
    let per_block = dists
        .chunks(size)
        .take(blocks)
        .map(|c| Ok(ipc_probability_rep(&probability_signals(c)?)?.ipc))
        .collect::<Result<Vec<f64>>>()?;
    let mean = per_block.iter().sum::<f64>() / blocks as f64;
    let var = per_block.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (blocks as f64 - 1.0);
    Ok((ipc, (var / blocks as f64).sqrt()))
}

fn enumerated_ipc(res: &Reservoir, measure: &InputMeasure, window: usize) -> Result<f64> {
    let (atoms, weights) = measure
        .atoms()
        .ok_or_else(|| Error::InvalidMeasure("enumerated averaging needs a discrete measure".into()))?;
    if (atoms.len() as f64).powi(window as i32) > MAX_ENUMERATED_LEAVES {
        return Err(Error::InvalidParameter(format!("{} histories of length {window} is too many", atoms.len())));
    }
    for (t, &u) in atoms.iter().enumerate() {
        res.check_drive(u, t)?;
    }
    let start = res.initial_distribution()?.into_probs();
    let dim = start.len();
    let mut sq = vec![0.0; dim];
    let mut mean = vec![0.0; dim];
    // depth-first over histories, one scratch vector per level
    let mut levels = vec![start];
    levels.resize(window + 1, vec![0.0; dim]);
    #[allow(clippy::too_many_arguments)]
    fn walk(res: &Reservoir, atoms: &[f64], weights: &[f64], levels: &mut [Vec<f64>], depth: usize, w: f64, sq: &mut [f64], mean: &mut [f64]) {
        if depth + 1 == levels.len() {
            for (k, p) in levels[depth].iter().enumerate() {
                sq[k] += w * p * p;
                mean[k] += w * p;
            }
            return;
        }
        for (&u, &wu) in atoms.iter().zip(weights) {
            let (head, tail) = levels.split_at_mut(depth + 1);
            tail[0].copy_from_slice(&head[depth]);
            res.step_in_place(&mut tail[0], u);
            walk(res, atoms, weights, levels, depth + 1, w * wu, sq, mean);
        }
    }
    walk(res, &atoms, &weights, &mut levels, 0, 1.0, &mut sq, &mut mean);
    Ok(sq.iter().zip(&mean).filter(|(_, m)| **m > 0.0).map(|(s, m)| s / m).sum())
}

/// Exact-mode IPC of `family(n, lambda)` for every `n`, with exponential and
/// polynomial fits of the growth.
///
/// The curve is flagged subexponential-consistent when the slope of log IPC
/// against n is below `ln 2` by more than three standard errors.
pub fn scan_system_size(
    family: &(dyn Fn(usize, f64) -> Result<ReservoirSpec> + Sync),
    ns: &[usize],
    lambda: f64,
    measure: &InputMeasure,
    averaging: Averaging,
) -> Result<ScalingCurve> {
    measure.validate()?;
    if ns.len() < 3 {
        return Err(Error::InvalidParameter("a scan needs at least three sizes".into()));
    }
    if let Some(&n) = ns.iter().find(|&&n| n > MAX_SCAN_BITS) {
        return Err(Error::ExactModeOverflow { n, max: MAX_SCAN_BITS });
    }
    let point = |n: usize| -> Result<(f64, f64)> {
        let res = Reservoir::new(family(n, lambda)?)?;
        match averaging {
            Averaging::Sampled { steps, washout, blocks } => sampled_ipc(&res, measure, steps, washout, blocks, n as u64),
            Averaging::Enumerated { window } => Ok((enumerated_ipc(&res, measure, window.max(n))?, 0.0)),
        }
    };
    #[cfg(feature = "parallel")]
    let points: Vec<Result<(f64, f64)>> = {
        use rayon::prelude::*;
        ns.par_iter().map(|&n| point(n)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let points: Vec<Result<(f64, f64)>> = ns.iter().map(|&n| point(n)).collect();
    let (ipc, ipc_stderr): (Vec<f64>, Vec<f64>) = points.into_iter().collect::<Result<Vec<_>>>()?.into_iter().unzip();

    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let logs: Vec<f64> = ipc.iter().map(|v| v.ln()).collect();
    let exponential_fit = line_fit(&xs, &logs);
    let polynomial_fit = line_fit(&xs.iter().map(|x| x.ln()).collect::<Vec<_>>(), &logs);
    let subexponential_consistent = exponential_fit.slope < std::f64::consts::LN_2 - 3.0 * exponential_fit.slope_stderr;
    let ratio: Vec<f64> = ipc.iter().zip(ns).map(|(v, &n)| v / 2f64.powi(n as i32)).collect();
    let ratio_decreasing = ratio.windows(2).all(|w| w[1] < w[0]);
    Ok(ScalingCurve { lambda, n: ns.to_vec(), ipc, ipc_stderr, exponential_fit, polynomial_fit, subexponential_consistent, ratio_decreasing })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerated_matches_closed_form() {
        let m = InputMeasure::binary(0);
        for lambda in [0.0, 0.05, 0.2, 0.5] {
            let c = scan_system_size(&noisy_shift_register, &[2, 3, 4, 5], lambda, &m, Averaging::Enumerated { window: 0 }).unwrap();
            for (n, v) in c.n.iter().zip(&c.ipc) {
                assert!((v - noisy_shift_register_ipc(*n, lambda)).abs() < 1e-10, "n={n} lambda={lambda} {v}");
            }
        }
    }

    #[test]
    fn deterministic_register_visits_everything() {
        let m = InputMeasure::binary(0);
        let c = scan_system_size(&noisy_shift_register, &[2, 4, 6, 8], 0.0, &m, Averaging::Enumerated { window: 0 }).unwrap();
        for (n, v) in c.n.iter().zip(&c.ipc) {
            assert!((v - 2f64.powi(*n as i32)).abs() < 1e-9);
        }
        assert!(!c.subexponential_consistent);
    }

    #[test]
    fn sampled_scan_is_close() {
        let m = InputMeasure::binary(5);
        let c = scan_system_size(&noisy_shift_register, &[2, 3, 4], 0.1, &m, Averaging::Sampled { steps: 4000, washout: 8, blocks: 10 }).unwrap();
        for ((n, v), e) in c.n.iter().zip(&c.ipc).zip(&c.ipc_stderr) {
            let want = noisy_shift_register_ipc(*n, 0.1);
            assert!((v - want).abs() < 0.05 * want, "{n} {v} {want} {e}");
            assert!(*e > 0.0);
        }
    }

    #[test]
    fn rejects_large_and_bad_rates() {
        let m = InputMeasure::binary(0);
        assert!(matches!(
            scan_system_size(&noisy_shift_register, &[2, 3, 13], 0.1, &m, Averaging::Enumerated { window: 0 }),
            Err(Error::ExactModeOverflow { n: 13, .. })
        ));
        assert!(noisy_shift_register(3, 0.7).is_err());
    }
}
