use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::input::InputSequence;
use super::spec::{InitialState, Reservoir};
use crate::readout::{SignalMatrix, SignalMode};
use crate::rng;
use crate::{Error, Result, MAX_EXACT_BITS};

/// Sampled bitstrings, `shots x steps`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryEnsemble {
    pub n: usize,
    pub shots: usize,
    pub steps: usize,
    pub seed_root: u64,
    pub samples: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSidecar {
    pub n: usize,
    #[serde(rename = "S")]
    pub shots: usize,
    #[serde(rename = "T")]
    pub steps: usize,
    pub seed: u64,
    pub dtype: String,
    pub layout: String,
}

impl TrajectoryEnsemble {
    pub fn trajectory(&self, shot: usize) -> &[u32] {
        &self.samples[shot * self.steps..(shot + 1) * self.steps]
    }

    pub fn sample(&self, shot: usize, step: usize) -> u32 {
        self.samples[shot * self.steps + step]
    }

    pub fn sidecar_path(bin: &Path) -> PathBuf {
        bin.with_extension("json")
    }

    /// Writes the little-endian `u32` array and its JSON sidecar.
    pub fn write(&self, bin: &Path) -> Result<()> {
        let mut bytes = Vec::with_capacity(self.samples.len() * 4);
        for s in &self.samples {
            bytes.extend_from_slice(&s.to_le_bytes());
        }
        fs::write(bin, bytes).map_err(|e| Error::io(bin, e))?;
        let side = EnsembleSidecar {
            n: self.n,
            shots: self.shots,
            steps: self.steps,
            seed: self.seed_root,
            dtype: "u32le".into(),
            layout: "row-major shots x steps".into(),
        };
        let path = Self::sidecar_path(bin);
        let text = serde_json::to_string_pretty(&side).expect("sidecar serializes");
        fs::write(&path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read(bin: &Path) -> Result<Self> {
        let path = Self::sidecar_path(bin);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let side: EnsembleSidecar = serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        if side.dtype != "u32le" {
            return Err(Error::Format(format!("unsupported dtype {}", side.dtype)));
        }
        let bytes = fs::read(bin).map_err(|e| Error::io(bin, e))?;
        if bytes.len() != side.shots * side.steps * 4 {
            return Err(Error::Format(format!("{}: {} bytes for {}x{} samples", bin.display(), bytes.len(), side.shots, side.steps)));
        }
        let samples: Vec<u32> = bytes.chunks_exact(4).map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
        if let Some(s) = samples.iter().find(|s| u64::from(**s) >> side.n != 0) {
            return Err(Error::Format(format!("sample {s} needs more than {} bits", side.n)));
        }
        Ok(Self { n: side.n, shots: side.shots, steps: side.steps, seed_root: side.seed, samples })
    }
}

/// Kernels of every gate at every step, evaluated once for all shots.
struct StepKernels {
    dims: Vec<usize>,
    per_step: Vec<Vec<Vec<f64>>>,
}

impl Reservoir {
    fn step_kernels(&self, inputs: &InputSequence) -> Result<StepKernels> {
        inputs.validate()?;
        if inputs.len() <= inputs.washout {
            return Err(Error::EmptyAfterWashout { len: inputs.len(), washout: inputs.washout });
        }
        let mut per_step = Vec::with_capacity(inputs.len());
        for t in 0..inputs.len() {
            let u = inputs.drive(t);
            self.check_drive(u, t)?;
            per_step.push(self.gates().iter().map(|g| g.kernel_at(u)).collect());
        }
        let dims = self.gates().iter().map(|g| 1usize << g.support.len()).collect();
        Ok(StepKernels { dims, per_step })
    }

    fn draw_initial(&self, r: &mut ChaCha8Rng) -> u32 {
        match &self.spec().initial_state {
            InitialState::Point(k) => *k as u32,
            InitialState::Probs(p) => pick(p, r.gen()) as u32,
        }
    }

    /// Runs one shot, calling `sink(step, bitstring)` after every step.
    fn run_shot(&self, kernels: &StepKernels, seed: u64, shot: usize, mut sink: impl FnMut(usize, u32)) {
        let mut r = rng::stream(seed, shot as u64);
        rng::seek_block(&mut r, 0);
        let mut state = self.draw_initial(&mut r);
        for (t, ks) in kernels.per_step.iter().enumerate() {
            rng::seek_block(&mut r, t as u64 + 1);
            for ((gate, k), dim) in self.gates().iter().zip(ks).zip(&kernels.dims) {
                let mut local = 0usize;
                for (j, &b) in gate.support.iter().enumerate() {
                    local |= ((state >> b & 1) as usize) << j;
                }
                let out = pick(&k[local * dim..(local + 1) * dim], r.gen());
                for (j, &b) in gate.support.iter().enumerate() {
                    let bit = (out >> j & 1) as u32;
                    state = (state & !(1 << b)) | (bit << b);
                }
            }
            sink(t, state);
        }
    }

    /// Samples `shots` independent trajectories. Shot `s` at step `t` draws
    /// from the stream addressed by `(seed, s, t + 1)`, so the result does not
    /// depend on `lanes`.
    pub fn sample_trajectories(&self, inputs: &InputSequence, shots: usize, seed: u64, lanes: usize) -> Result<TrajectoryEnsemble> {
        if shots == 0 {
            return Err(Error::InvalidParameter("shots must be at least 1".into()));
        }
        let kernels = self.step_kernels(inputs)?;
        let washout = inputs.washout;
        let steps = inputs.kept();
        let mut samples = vec![0u32; shots * steps];
        let fill = |shot: usize, row: &mut [u32]| {
            self.run_shot(&kernels, seed, shot, |t, s| {
                if t >= washout {
                    row[t - washout] = s;
                }
            })
        };
        for_each_chunk(&mut samples, steps, lanes, fill);
        Ok(TrajectoryEnsemble { n: self.n(), shots, steps, seed_root: seed, samples })
    }

    /// Per-step bitstring frequencies over `shots` trajectories without
    /// storing the trajectories. Same streams as [`Self::sample_trajectories`].
    pub fn sample_frequencies(&self, inputs: &InputSequence, shots: usize, seed: u64, lanes: usize) -> Result<SignalMatrix> {
        if self.n() > MAX_EXACT_BITS {
            return Err(Error::ExactModeOverflow { n: self.n(), max: MAX_EXACT_BITS });
        }
        if shots == 0 {
            return Err(Error::InvalidParameter("shots must be at least 1".into()));
        }
        let kernels = self.step_kernels(inputs)?;
        let washout = inputs.washout;
        let steps = inputs.kept();
        let d = 1usize << self.n();
        let count_range = |range: std::ops::Range<usize>| {
            let mut counts = vec![0u64; steps * d];
            for shot in range {
                self.run_shot(&kernels, seed, shot, |t, s| {
                    if t >= washout {
                        counts[(t - washout) * d + s as usize] += 1;
                    }
                });
            }
            counts
        };
        let counts = reduce_counts(shots, lanes, count_range);
        let data = counts.iter().map(|&c| c as f64 / shots as f64).collect();
        SignalMatrix::new(self.n(), SignalMode::EmpiricalFrequency, (0..d as u64).collect(), steps, data)
            .map(|m| m.with_shots(shots as u64))
    }
}

fn pick(row: &[f64], draw: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (i, p) in row.iter().enumerate() {
        if *p > 0.0 {
            acc += p;
            last = i;
            if draw < acc {
                return i;
            }
        }
    }
    last
}

#[cfg(feature = "parallel")]
fn with_lanes<R: Send>(lanes: usize, f: impl FnOnce() -> R + Send) -> R {
    match rayon::ThreadPoolBuilder::new().num_threads(lanes.max(1)).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

fn for_each_chunk(samples: &mut [u32], steps: usize, lanes: usize, fill: impl Fn(usize, &mut [u32]) + Sync) {
    if steps == 0 {
        return;
    }
    #[cfg(feature = "parallel")]
    if lanes > 1 {
        use rayon::prelude::*;
        with_lanes(lanes, || samples.par_chunks_mut(steps).enumerate().for_each(|(s, row)| fill(s, row)));
        return;
    }
    let _ = lanes;
    for (s, row) in samples.chunks_mut(steps).enumerate() {
        fill(s, row);
    }
}

/// Sums integer count vectors over shot ranges; integer addition keeps the
/// result independent of how shots are split.
fn reduce_counts(shots: usize, lanes: usize, count: impl Fn(std::ops::Range<usize>) -> Vec<u64> + Sync) -> Vec<u64> {
    #[cfg(feature = "parallel")]
    if lanes > 1 {
        use rayon::prelude::*;
        let chunk = shots.div_ceil(lanes * 4).max(1);
        let ranges: Vec<_> = (0..shots).step_by(chunk).map(|s| s..(s + chunk).min(shots)).collect();
        return with_lanes(lanes, || {
            ranges
                .into_par_iter()
                .map(&count)
                .reduce_with(|mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                })
                .unwrap_or_default()
        });
    }
    let _ = lanes;
    count(0..shots)
}
