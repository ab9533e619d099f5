use serde::{Deserialize, Serialize};

use super::input::InputMeasure;
use super::spec::Reservoir;
use crate::rng::derive_seed;
use crate::{Error, Result};

const MIN_TRIALS: usize = 10;

/// Sampling plan for the fading-memory estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FadingMemoryProbe {
    /// Total history fed before reading the state; older inputs are ignored.
    pub history_len: usize,
    /// Independent older histories drawn per recent window.
    pub resamples: usize,
}

impl Default for FadingMemoryProbe {
    fn default() -> Self {
        Self { history_len: 64, resamples: 16 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FadingMemoryEstimate {
    pub h: usize,
    pub trials: usize,
    /// Mean squared error per output probability.
    pub per_output: Vec<f64>,
    /// Average of `per_output`.
    pub mean: f64,
}

impl Reservoir {
    /// Error of the best predictor that only sees the last `h` inputs.
    ///
    /// For each trial a recent window of `h` inputs is drawn and held fixed
    /// while the older history is redrawn; the spread of the resulting states
    /// around their mean is the squared error of the conditional-mean
    /// predictor for that window.
    pub fn fading_memory_error(&self, h: usize, measure: &InputMeasure, trials: usize) -> Result<FadingMemoryEstimate> {
        self.fading_memory_error_with(h, measure, trials, FadingMemoryProbe::default())
    }

    pub fn fading_memory_error_with(
        &self,
        h: usize,
        measure: &InputMeasure,
        trials: usize,
        probe: FadingMemoryProbe,
    ) -> Result<FadingMemoryEstimate> {
        self.require_exact()?;
        if h == 0 {
            return Err(Error::InvalidParameter("history window h must be at least 1".into()));
        }
        if trials < MIN_TRIALS {
            return Err(Error::InsufficientTrials(trials, MIN_TRIALS));
        }
        if probe.resamples < 2 {
            return Err(Error::InvalidParameter("need at least 2 resamples per window".into()));
        }
        measure.validate()?;
        let window_len = h.min(probe.history_len);
        let prefix_len = probe.history_len - window_len;
        let start = self.initial_distribution()?.into_probs();
        let d = start.len();
        let mut acc = vec![0.0; d];
        let bound = self.spec().drive.magnitude_bound(self.n());
        for trial in 0..trials {
            let trial_seed = derive_seed(measure.seed, &[h as u64, trial as u64]);
            let window = InputMeasure { seed: trial_seed, ..measure.clone() }.sample(window_len, 0);
            let mut finals = Vec::with_capacity(probe.resamples);
            for r in 0..probe.resamples {
                let mut drives = InputMeasure { seed: trial_seed, ..measure.clone() }.sample(prefix_len, r as u64 + 1);
                drives.extend_from_slice(&window);
                if let Some((t, u)) = drives.iter().enumerate().find(|(_, u)| u.abs() > bound + 1e-12) {
                    return Err(Error::DriveOutOfBounds { value: *u, step: t, bound });
                }
                finals.push(self.final_exact(&start, &drives));
            }
            let m = probe.resamples as f64;
            for k in 0..d {
                let mean = finals.iter().map(|f| f[k]).sum::<f64>() / m;
                let var = finals.iter().map(|f| (f[k] - mean).powi(2)).sum::<f64>() / (m - 1.0);
                acc[k] += var;
            }
        }
        let per_output: Vec<f64> = acc.into_iter().map(|a| a / trials as f64).collect();
        let mean = per_output.iter().sum::<f64>() / d as f64;
        Ok(FadingMemoryEstimate { h, trials, per_output, mean })
    }
}

#[cfg(test)]
mod tests {
    use super::super::gate::{DriveFn, StochasticGate};
    use super::super::spec::ReservoirSpec;
    use super::*;

    #[test]
    fn input_independent_reservoir_has_no_error() {
        let r = Reservoir::new(ReservoirSpec::new(2, vec![StochasticGate::flip(0, 0.2), StochasticGate::copy(0, 1)])).unwrap();
        let m = InputMeasure::uniform(-1.0, 1.0, 1).unwrap();
        for h in [1, 3, 8] {
            assert!(r.fading_memory_error(h, &m, 20).unwrap().mean < 1e-28);
        }
    }

    #[test]
    fn memoryless_reservoir_is_exact_at_h1() {
        let r = Reservoir::new(ReservoirSpec::new(1, vec![StochasticGate::set_bit(0, DriveFn::linear(0.8))])).unwrap();
        let m = InputMeasure::uniform(-1.0, 1.0, 5).unwrap();
        assert!(r.fading_memory_error(1, &m, 30).unwrap().mean < 1e-28);
    }

    #[test]
    fn too_few_trials() {
        let r = Reservoir::new(ReservoirSpec::new(1, vec![StochasticGate::flip(0, 0.2)])).unwrap();
        let m = InputMeasure::binary(0);
        assert!(matches!(r.fading_memory_error(1, &m, 9), Err(Error::InsufficientTrials(9, 10))));
    }
}
