use super::input::InputSequence;
use super::spec::Reservoir;
use super::state::BitstringDistribution;
use crate::{Error, Result};

/// Applies a local kernel to a dense distribution in place.
pub(crate) fn apply_kernel(probs: &mut [f64], kernel: &[f64], mask: usize, offsets: &[usize]) {
    let dim = offsets.len();
    let mut local = vec![0.0; dim];
    let mut out = vec![0.0; dim];
    for base in 0..probs.len() {
        if base & mask != 0 {
            continue;
        }
        for (l, off) in offsets.iter().enumerate() {
            local[l] = probs[base | off];
        }
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &p) in local.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let row = &kernel[i * dim..(i + 1) * dim];
            for (o, k) in out.iter_mut().zip(row) {
                *o += p * k;
            }
        }
        for (l, off) in offsets.iter().enumerate() {
            probs[base | off] = out[l];
        }
    }
}

impl Reservoir {
    /// One time step of the exact distribution under drive `u`.
    pub fn step_exact(&self, state: &BitstringDistribution, u: f64) -> Result<BitstringDistribution> {
        self.require_exact()?;
        if state.n() != self.n() {
            return Err(Error::MixedDimensions(state.n(), self.n()));
        }
        if !u.is_finite() {
            return Err(Error::NonfiniteDrive(u, 0));
        }
        let mut probs = state.probs().to_vec();
        self.step_in_place(&mut probs, u);
        Ok(BitstringDistribution::from_raw(self.n(), probs))
    }

    pub(crate) fn step_in_place(&self, probs: &mut [f64], u: f64) {
        for (gate, (mask, offsets)) in self.gates().iter().zip(self.layout()) {
            apply_kernel(probs, &gate.kernel_at(u), *mask, offsets);
        }
    }

    /// Exact distributions after every post-washout step.
    pub fn run_exact(&self, inputs: &InputSequence) -> Result<Vec<BitstringDistribution>> {
        self.run_exact_from(self.initial_distribution()?, inputs)
    }

    pub fn run_exact_from(&self, start: BitstringDistribution, inputs: &InputSequence) -> Result<Vec<BitstringDistribution>> {
        self.require_exact()?;
        inputs.validate()?;
        if inputs.len() <= inputs.washout {
            return Err(Error::EmptyAfterWashout { len: inputs.len(), washout: inputs.washout });
        }
        let mut probs = start.into_probs();
        let mut out = Vec::with_capacity(inputs.kept());
        for t in 0..inputs.len() {
            let u = inputs.drive(t);
            self.check_drive(u, t)?;
            self.step_in_place(&mut probs, u);
            if t >= inputs.washout {
                out.push(BitstringDistribution::from_raw(self.n(), probs.clone()));
            }
        }
        Ok(out)
    }

    /// Final exact distribution after feeding `drives` from `start`.
    pub(crate) fn final_exact(&self, start: &[f64], drives: &[f64]) -> Vec<f64> {
        let mut probs = start.to_vec();
        for &u in drives {
            self.step_in_place(&mut probs, u);
        }
        probs
    }
}

#[cfg(test)]
mod tests {
    use super::super::gate::{DriveFn, Kernel, StochasticGate};
    use super::super::spec::ReservoirSpec;
    use super::*;

    #[test]
    fn flip_on_point_mass() {
        let r = Reservoir::new(ReservoirSpec::new(1, vec![StochasticGate::flip(0, 0.3)])).unwrap();
        let out = r.step_exact(&BitstringDistribution::point(1, 0).unwrap(), 0.0).unwrap();
        assert!((out.probs()[0] - 0.7).abs() < 1e-15);
        assert!((out.probs()[1] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn identity_keeps_state() {
        let r = Reservoir::new(ReservoirSpec::new(2, vec![StochasticGate::new(vec![1], Kernel::Identity)])).unwrap();
        let s = BitstringDistribution::new(2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(r.step_exact(&s, 0.7).unwrap(), s);
        let seq = InputSequence::scalar(vec![0.1, -0.4, 0.9], 0).unwrap();
        let mut spec = r.spec().clone();
        spec.initial_state = super::super::spec::InitialState::Probs(s.probs().to_vec());
        let r = Reservoir::new(spec).unwrap();
        assert!(r.run_exact(&seq).unwrap().iter().all(|d| d == &s));
    }

    #[test]
    fn washout_must_leave_steps() {
        let r = Reservoir::new(ReservoirSpec::new(1, vec![StochasticGate::flip(0, 0.3)])).unwrap();
        let seq = InputSequence::scalar(vec![0.0; 3], 3).unwrap();
        assert!(matches!(r.run_exact(&seq), Err(Error::EmptyAfterWashout { .. })));
        assert!(matches!(r.step_exact(&BitstringDistribution::uniform(1).unwrap(), f64::NAN), Err(Error::NonfiniteDrive(..))));
    }

    #[test]
    fn memoryless_reservoir_ignores_history() {
        let spec = ReservoirSpec::new(
            2,
            vec![StochasticGate::set_bit(0, DriveFn::linear(1.0)), StochasticGate::set_bit(1, DriveFn::linear(-0.5))],
        );
        let r = Reservoir::new(spec).unwrap();
        let a = r.run_exact(&InputSequence::scalar(vec![0.3, -0.9, 0.5, 0.2], 0).unwrap()).unwrap();
        let b = r.run_exact(&InputSequence::scalar(vec![0.5, 0.3, -0.9, 0.2], 0).unwrap()).unwrap();
        for (x, y) in a[3].probs().iter().zip(b[3].probs()) {
            assert!((x - y).abs() < 1e-15);
        }
    }
}
