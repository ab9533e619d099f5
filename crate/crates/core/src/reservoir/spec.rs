use serde::{Deserialize, Serialize};

use super::gate::StochasticGate;
use super::state::BitstringDistribution;
use super::PROBE_POINTS;
use crate::{Error, Result, MAX_EXACT_BITS};

const ROW_TOL: f64 = 1e-12;

/// How the drive is allowed to scale with the register size `n`.
///
/// Both bounds are polynomials in `n`, given by ascending coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrivePolicy {
    /// Interval of drives probed by the slope check.
    pub range: [f64; 2],
    /// Bound on `|d kernel entry / du|`.
    pub derivative_poly: Vec<f64>,
    /// Bound on `|u(t)|` for inputs fed to the reservoir.
    pub magnitude_poly: Vec<f64>,
}

impl Default for DrivePolicy {
    fn default() -> Self {
        Self { range: [-1.0, 1.0], derivative_poly: vec![1.0, 0.0, 1.0], magnitude_poly: vec![1.0] }
    }
}

fn poly_at(coeffs: &[f64], n: usize) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * n as f64 + c)
}

impl DrivePolicy {
    pub fn derivative_bound(&self, n: usize) -> f64 {
        poly_at(&self.derivative_poly, n)
    }

    pub fn magnitude_bound(&self, n: usize) -> f64 {
        poly_at(&self.magnitude_poly, n)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// All mass on one bitstring.
    Point(u64),
    Probs(Vec<f64>),
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState::Point(0)
    }
}

fn default_k_max() -> usize {
    2
}

/// Serializable description of a reservoir circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReservoirSpec {
    pub n: usize,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    /// Gates per step; defaults to `4 n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth_bound: Option<usize>,
    /// Gates applied in order at every time step.
    pub gates: Vec<StochasticGate>,
    #[serde(default)]
    pub initial_state: InitialState,
    #[serde(default)]
    pub drive: DrivePolicy,
}

impl ReservoirSpec {
    pub fn new(n: usize, gates: Vec<StochasticGate>) -> Self {
        Self { n, k_max: 2, depth_bound: None, gates, initial_state: InitialState::Point(0), drive: DrivePolicy::default() }
    }

    pub fn depth_bound(&self) -> usize {
        self.depth_bound.unwrap_or(4 * self.n)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(format!("reservoir spec: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }
}

/// A reservoir that passed the physicality checks.
#[derive(Clone, Debug)]
pub struct Reservoir {
    spec: ReservoirSpec,
    /// `(support mask, scatter offsets)` per gate.
    layout: Vec<(usize, Vec<usize>)>,
}

/// Validates `spec` against explicit locality and depth bounds.
pub fn build_reservoir(mut spec: ReservoirSpec, k_max: usize, depth_bound: usize) -> Result<Reservoir> {
    spec.k_max = k_max;
    spec.depth_bound = Some(depth_bound);
    Reservoir::new(spec)
}

impl Reservoir {
    pub fn new(spec: ReservoirSpec) -> Result<Self> {
        let n = spec.n;
        if n == 0 || n > 32 {
            return Err(Error::MalformedReservoir(format!("n = {n} outside 1..=32")));
        }
        let depth = spec.depth_bound();
        if spec.gates.len() > depth {
            return Err(Error::DepthViolation { gates: spec.gates.len(), depth_bound: depth });
        }
        let mut layout = Vec::with_capacity(spec.gates.len());
        for (g, gate) in spec.gates.iter().enumerate() {
            let s = gate.support.len();
            if s == 0 {
                return Err(Error::MalformedReservoir(format!("gate {g} has empty support")));
            }
            if s > spec.k_max {
                return Err(Error::LocalityViolation { gate: g, support: s, k_max: spec.k_max });
            }
            let mut mask = 0usize;
            for &b in &gate.support {
                if b >= n {
                    return Err(Error::MalformedReservoir(format!("gate {g} touches bit {b} of {n}")));
                }
                if mask >> b & 1 == 1 {
                    return Err(Error::MalformedReservoir(format!("gate {g} repeats bit {b}")));
                }
                mask |= 1 << b;
            }
            if let Some(a) = gate.kernel.arity() {
                if a != s {
                    return Err(Error::MalformedReservoir(format!("gate {g}: kernel expects {a} bits, support has {s}")));
                }
            }
            check_kernel_shape(g, gate)?;
            let offsets = (0..1usize << s)
                .map(|local| gate.support.iter().enumerate().fold(0, |acc, (j, &b)| acc | ((local >> j & 1) << b)))
                .collect();
            layout.push((mask, offsets));
        }
        let reservoir = Self { spec, layout };
        reservoir.check_kernels()?;
        reservoir.initial_state_check()?;
        Ok(reservoir)
    }

    fn check_kernels(&self) -> Result<()> {
        let [lo, hi] = self.spec.drive.range;
        if !(lo <= hi) {
            return Err(Error::MalformedReservoir(format!("drive range [{lo}, {hi}]")));
        }
        let default_bound = self.spec.drive.derivative_bound(self.spec.n);
        let step = (hi - lo) / (PROBE_POINTS - 1) as f64;
        let h = 1e-6 * (hi - lo).abs().max(1.0);
        for (g, gate) in self.spec.gates.iter().enumerate() {
            let s = gate.support.len();
            let dim = 1usize << s;
            let bound = gate.derivative_bound.unwrap_or(default_bound);
            for i in 0..PROBE_POINTS {
                let u = lo + step * i as f64;
                let k = gate.kernel_at(u);
                for r in 0..dim {
                    let row = &k[r * dim..(r + 1) * dim];
                    if let Some(v) = row.iter().find(|v| !(**v >= -ROW_TOL && **v <= 1.0 + ROW_TOL)) {
                        return Err(Error::StochasticityViolation { gate: g, at: u, detail: format!("entry {v} in row {r}") });
                    }
                    let sum: f64 = row.iter().sum();
                    if (sum - 1.0).abs() > ROW_TOL {
                        return Err(Error::StochasticityViolation { gate: g, at: u, detail: format!("row {r} sums to {sum}") });
                    }
                }
                let up = gate.kernel_at(u + h);
                let down = gate.kernel_at(u - h);
                let slope = up.iter().zip(&down).map(|(a, b)| ((a - b) / (2.0 * h)).abs()).fold(0.0, f64::max);
                if slope > bound {
                    return Err(Error::DriveDerivativeViolation { gate: g, slope, at: u, bound });
                }
            }
        }
        Ok(())
    }

    fn initial_state_check(&self) -> Result<()> {
        match &self.spec.initial_state {
            InitialState::Point(k) if *k >> self.spec.n != 0 => {
                Err(Error::InvalidDistribution(format!("initial bitstring {k} needs more than {} bits", self.spec.n)))
            }
            InitialState::Point(_) => Ok(()),
            InitialState::Probs(p) => BitstringDistribution::new(self.spec.n, p.clone()).map(|_| ()),
        }
    }

    pub fn spec(&self) -> &ReservoirSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn gates(&self) -> &[StochasticGate] {
        &self.spec.gates
    }

    pub(crate) fn layout(&self) -> &[(usize, Vec<usize>)] {
        &self.layout
    }

    pub fn initial_distribution(&self) -> Result<BitstringDistribution> {
        match &self.spec.initial_state {
            InitialState::Point(k) => BitstringDistribution::point(self.spec.n, *k as usize),
            InitialState::Probs(p) => BitstringDistribution::new(self.spec.n, p.clone()),
        }
    }

    pub(crate) fn require_exact(&self) -> Result<()> {
        if self.spec.n > MAX_EXACT_BITS {
            Err(Error::ExactModeOverflow { n: self.spec.n, max: MAX_EXACT_BITS })
        } else {
            Ok(())
        }
    }

    pub(crate) fn check_drive(&self, u: f64, step: usize) -> Result<()> {
        if !u.is_finite() {
            return Err(Error::NonfiniteDrive(u, step));
        }
        let bound = self.spec.drive.magnitude_bound(self.spec.n);
        if u.abs() > bound + 1e-12 {
            return Err(Error::DriveOutOfBounds { value: u, step, bound });
        }
        Ok(())
    }
}

fn check_kernel_shape(g: usize, gate: &StochasticGate) -> Result<()> {
    use super::gate::Kernel;
    let dim = 1usize << gate.support.len();
    let square = |rows: &Vec<Vec<f64>>| rows.len() == dim && rows.iter().all(|r| r.len() == dim);
    let ok = match &gate.kernel {
        Kernel::Matrix { rows } => square(rows),
        Kernel::Polynomial { coeffs } => !coeffs.is_empty() && coeffs.iter().all(square),
        Kernel::Relax { keep, .. } => (0.0..=1.0).contains(keep),
        _ => true,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::MalformedReservoir(format!("gate {g}: kernel parameters do not fit a {dim}x{dim} matrix")))
    }
}
