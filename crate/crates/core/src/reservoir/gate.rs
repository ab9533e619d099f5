use serde::{Deserialize, Serialize};

/// A probability-valued function of the drive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DriveFn {
    Constant { value: f64 },
    /// `clamp(sum_j coeffs[j] * u^j, 0, 1)`.
    ClippedPoly { coeffs: Vec<f64> },
    /// `1 / (1 + exp(-(bias + gain * u)))`.
    Logistic { bias: f64, gain: f64 },
}

impl DriveFn {
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            DriveFn::Constant { value } => *value,
            DriveFn::ClippedPoly { coeffs } => {
                coeffs.iter().rev().fold(0.0, |acc, c| acc * u + c).clamp(0.0, 1.0)
            }
            DriveFn::Logistic { bias, gain } => 1.0 / (1.0 + (-(bias + gain * u)).exp()),
        }
    }

    /// Affine map `p = (1 + gain * u) / 2`, clipped to [0, 1].
    pub fn linear(gain: f64) -> Self {
        DriveFn::ClippedPoly { coeffs: vec![0.5, 0.5 * gain] }
    }
}

/// Transition kernel of a gate. Row index is the local input state, column
/// index the local output state; local bit `j` is register bit `support[j]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kernel_kind", content = "params", rename_all = "snake_case")]
pub enum Kernel {
    Identity,
    /// Constant matrix, one row per local input state.
    Matrix { rows: Vec<Vec<f64>> },
    /// `K(u) = sum_j u^j * coeffs[j]`.
    Polynomial { coeffs: Vec<Vec<Vec<f64>>> },
    /// Single bit, output 1 with probability `prob(u)` whatever the input.
    SetBit { prob: DriveFn },
    /// Single bit, flipped with probability `prob(u)`.
    FlipBit { prob: DriveFn },
    /// Two bits `[src, dst]`: dst takes the value of src.
    Copy,
    /// Single bit kept with probability `keep`, otherwise redrawn as
    /// `SetBit { prob }`.
    Relax { keep: f64, prob: DriveFn },
}

impl Kernel {
    /// Number of bits the kernel expects, when fixed by its kind.
    pub fn arity(&self) -> Option<usize> {
        match self {
            Kernel::SetBit { .. } | Kernel::FlipBit { .. } | Kernel::Relax { .. } => Some(1),
            Kernel::Copy => Some(2),
            Kernel::Matrix { rows } => Some(rows.len().trailing_zeros() as usize),
            Kernel::Polynomial { coeffs } => coeffs.first().map(|c| c.len().trailing_zeros() as usize),
            Kernel::Identity => None,
        }
    }

    /// Kernel at drive `u` for a support of `s` bits, flattened row-major.
    pub fn at(&self, s: usize, u: f64) -> Vec<f64> {
        let dim = 1usize << s;
        let mut out = vec![0.0; dim * dim];
        match self {
            Kernel::Identity => {
                for i in 0..dim {
                    out[i * dim + i] = 1.0;
                }
            }
            Kernel::Matrix { rows } => {
                for (i, row) in rows.iter().enumerate() {
                    out[i * dim..(i + 1) * dim].copy_from_slice(row);
                }
            }
            Kernel::Polynomial { coeffs } => {
                let mut power = 1.0;
                for c in coeffs {
                    for (i, row) in c.iter().enumerate() {
                        for (j, v) in row.iter().enumerate() {
                            out[i * dim + j] += power * v;
                        }
                    }
                    power *= u;
                }
            }
            Kernel::SetBit { prob } => {
                let p = prob.eval(u);
                out.copy_from_slice(&[1.0 - p, p, 1.0 - p, p]);
            }
            Kernel::FlipBit { prob } => {
                let p = prob.eval(u);
                out.copy_from_slice(&[1.0 - p, p, p, 1.0 - p]);
            }
            Kernel::Copy => {
                // local state = src | dst << 1; output dst = src
                out[0] = 1.0;
                out[dim + 3] = 1.0;
                out[2 * dim] = 1.0;
                out[3 * dim + 3] = 1.0;
            }
            Kernel::Relax { keep, prob } => {
                let p = (1.0 - keep) * prob.eval(u);
                out.copy_from_slice(&[1.0 - p, p, 1.0 - p - keep, p + keep]);
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StochasticGate {
    pub support: Vec<usize>,
    #[serde(flatten)]
    pub kernel: Kernel,
    /// Per-gate override of the reservoir-wide drive-slope bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derivative_bound: Option<f64>,
}

impl StochasticGate {
    pub fn new(support: Vec<usize>, kernel: Kernel) -> Self {
        Self { support, kernel, derivative_bound: None }
    }

    pub fn set_bit(bit: usize, prob: DriveFn) -> Self {
        Self::new(vec![bit], Kernel::SetBit { prob })
    }

    pub fn flip(bit: usize, p: f64) -> Self {
        Self::new(vec![bit], Kernel::FlipBit { prob: DriveFn::Constant { value: p } })
    }

    pub fn copy(src: usize, dst: usize) -> Self {
        Self::new(vec![src, dst], Kernel::Copy)
    }

    pub fn kernel_at(&self, u: f64) -> Vec<f64> {
        self.kernel.at(self.support.len(), u)
    }
}
