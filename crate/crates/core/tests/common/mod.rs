#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use stochres_core::reservoir::{DriveFn, Kernel, ReservoirSpec, StochasticGate};

pub fn rng(seed: u64) -> ChaCha8Rng {
    stochres_core::rng::stream(seed, 0)
}

fn stochastic_rows(r: &mut ChaCha8Rng, bits: usize) -> Vec<Vec<f64>> {
    let dim = 1 << bits;
    (0..dim)
        .map(|_| {
            let raw: Vec<f64> = (0..dim).map(|_| r.gen::<f64>() + 0.05).collect();
            let s: f64 = raw.iter().sum();
            raw.into_iter().map(|v| v / s).collect()
        })
        .collect()
}

/// A random k <= 2 local circuit on `n` bits with at least one driven gate
/// and at most `4 n` gates per step.
pub fn random_reservoir(r: &mut ChaCha8Rng, n: usize) -> ReservoirSpec {
    let count = r.gen_range(n..=(2 * n).max(2));
    let mut gates = vec![StochasticGate::set_bit(r.gen_range(0..n), DriveFn::linear(r.gen_range(0.3..1.0)))];
    for _ in 1..count {
        let a = r.gen_range(0..n);
        let b = (a + r.gen_range(1..n.max(2))) % n;
        let gate = match r.gen_range(0..6) {
            0 => StochasticGate::set_bit(a, DriveFn::Logistic { bias: r.gen_range(-1.0..1.0), gain: r.gen_range(-2.0..2.0) }),
            1 => StochasticGate::flip(a, r.gen_range(0.0..0.3)),
            2 if n > 1 => StochasticGate::copy(a, b),
            3 => StochasticGate::new(vec![a], Kernel::Relax { keep: r.gen_range(0.0..0.95), prob: DriveFn::linear(r.gen_range(-1.0..1.0)) }),
            4 if n > 1 => StochasticGate::new(vec![a, b], Kernel::Matrix { rows: stochastic_rows(r, 2) }),
            _ => StochasticGate::new(vec![a], Kernel::Matrix { rows: stochastic_rows(r, 1) }),
        };
        gates.push(gate);
    }
    ReservoirSpec::new(n, gates)
}
