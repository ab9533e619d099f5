//! Unitary-pair embedding of Bernoulli bit dynamics.
//!
//! A bit that is 0 with probability `p` is produced from `|0>` by averaging
//! the conjugations by `U1 = exp(-i theta X)` and `U2 = exp(+i theta X)` with
//! `theta = arccos(sqrt p)`. The checks here confirm that construction, its
//! vectorized form `vec(U rho U^dag) = (conj(U) kron U) vec(rho)` (column
//! stacking), the two-bit correlated flip, and the amplitude rate relation
//! `d sqrt(p)/dt = p' / (2 sqrt p)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng;
use crate::{Error, Result};

type CMatrix = DMatrix<Complex64>;

const MAX_QUBITS: usize = 4;
const STATE_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;
const PATH_TOL: f64 = 1e-12;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

/// `cos(theta) I + i sign sin(theta) G` for an involution `G`.
fn involution_exp(g: &CMatrix, theta: f64, sign: f64) -> CMatrix {
    let id = CMatrix::identity(g.nrows(), g.ncols());
    id * c(theta.cos(), 0.0) + g * c(0.0, sign * theta.sin())
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn unitarity_residual(u: &CMatrix) -> f64 {
    max_abs(&(u * u.adjoint() - CMatrix::identity(u.nrows(), u.ncols())))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    qubits: usize,
    rho: CMatrix,
}

impl DensityMatrix {
    /// Validates hermiticity, unit trace and positivity.
    pub fn new(rho: CMatrix) -> Result<Self> {
        let dim = rho.nrows();
        if dim != rho.ncols() || !dim.is_power_of_two() || dim < 2 {
            return Err(Error::InvalidState(format!("{}x{} is not a qubit-register matrix", rho.nrows(), rho.ncols())));
        }
        let qubits = dim.trailing_zeros() as usize;
        if qubits > MAX_QUBITS {
            return Err(Error::InvalidState(format!("{qubits} qubits; at most {MAX_QUBITS} supported")));
        }
        let herm = max_abs(&(&rho - rho.adjoint()));
        if herm > STATE_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (residual {herm:e})")));
        }
        let tr = rho.trace();
        if (tr - c(1.0, 0.0)).norm() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let low = min_eigenvalue(&rho);
        if low < -PSD_TOL {
            return Err(Error::InvalidState(format!("eigenvalue {low:e}")));
        }
        Ok(Self { qubits, rho })
    }

    /// `|k><k|` on `qubits` qubits.
    pub fn basis(qubits: usize, k: usize) -> Result<Self> {
        let dim = 1usize << qubits;
        if k >= dim {
            return Err(Error::InvalidState(format!("basis index {k} on {qubits} qubits")));
        }
        Self::new(CMatrix::from_fn(dim, dim, |i, j| if i == k && j == k { c(1.0, 0.0) } else { c(0.0, 0.0) }))
    }

    pub fn maximally_mixed(qubits: usize) -> Result<Self> {
        let dim = 1usize << qubits;
        Self::new(CMatrix::identity(dim, dim) * c(1.0 / dim as f64, 0.0))
    }

    /// Single-qubit state with Bloch vector `r`, `|r| <= 1`.
    pub fn bloch(r: [f64; 3]) -> Result<Self> {
        let [x, y, z] = r;
        Self::new(CMatrix::from_row_slice(2, 2, &[c((1.0 + z) / 2.0, 0.0), c(x / 2.0, -y / 2.0), c(x / 2.0, y / 2.0), c((1.0 - z) / 2.0, 0.0)]))
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    /// Computational-basis populations.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.rho.nrows()).map(|i| self.rho[(i, i)].re).collect()
    }
}

fn min_eigenvalue(m: &CMatrix) -> f64 {
    let herm = (m + m.adjoint()) * c(0.5, 0.0);
    herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Debug)]
pub struct UnitaryPair {
    pub p: f64,
    pub theta: f64,
    pub u1: CMatrix,
    pub u2: CMatrix,
}

impl UnitaryPair {
    pub fn unitarity_residual(&self) -> f64 {
        unitarity_residual(&self.u1).max(unitarity_residual(&self.u2))
    }
}

/// `U1 = exp(-i theta X)`, `U2 = exp(+i theta X)`, `theta = arccos(sqrt p)`.
pub fn rotation_pair(p: f64) -> Result<UnitaryPair> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange(p));
    }
    let theta = p.sqrt().acos();
    let x = pauli_x();
    Ok(UnitaryPair { p, theta, u1: involution_exp(&x, theta, -1.0), u2: involution_exp(&x, theta, 1.0) })
}

/// Column-stacking vectorization.
fn vec_of(m: &CMatrix) -> CMatrix {
    CMatrix::from_iterator(m.nrows() * m.ncols(), 1, m.iter().copied())
}

fn unvec(v: &CMatrix, dim: usize) -> CMatrix {
    CMatrix::from_iterator(dim, dim, v.iter().copied())
}

/// Output of the pair-averaged channel along both routes.
#[derive(Clone, Debug)]
pub struct ChannelPaths {
    pub direct: CMatrix,
    pub vectorized: CMatrix,
    pub residual: f64,
}

pub fn channel_paths(p: f64, rho: &DensityMatrix) -> Result<ChannelPaths> {
    if rho.qubits() != 1 {
        return Err(Error::InvalidState(format!("channel acts on one qubit, state has {}", rho.qubits())));
    }
    let pair = rotation_pair(p)?;
    let half = c(0.5, 0.0);
    let r = rho.matrix();
    let direct = (&pair.u1 * r * pair.u1.adjoint() + &pair.u2 * r * pair.u2.adjoint()) * half;
    let super_op = (pair.u1.conjugate().kronecker(&pair.u1) + pair.u2.conjugate().kronecker(&pair.u2)) * half;
    let vectorized = unvec(&(super_op * vec_of(r)), 2);
    let residual = max_abs(&(&direct - &vectorized));
    Ok(ChannelPaths { direct, vectorized, residual })
}

/// `(U1 rho U1^dag + U2 rho U2^dag) / 2`, computed directly and through the
/// vectorized superoperator; the two must agree to 1e-12.
pub fn bernoulli_channel(p: f64, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let paths = channel_paths(p, rho)?;
    if paths.residual > PATH_TOL {
        return Err(Error::InvalidState(format!("channel routes disagree by {:e}", paths.residual)));
    }
    DensityMatrix::new(paths.direct)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RateCheck {
    pub points: usize,
    pub max_relative_deviation: f64,
}

/// Compares the central difference of `sqrt(p)` with `p' / (2 sqrt p)`
/// (central difference of `p`) at every interior grid point.
pub fn verify_rate_relation(p_path: &[f64], dt: f64) -> Result<RateCheck> {
    if !(dt > 0.0) || p_path.len() < 3 {
        return Err(Error::InvalidParameter("rate check needs dt > 0 and at least three samples".into()));
    }
    if let Some(i) = p_path.iter().position(|p| !(*p > 0.0)) {
        return Err(Error::SingularPath(i));
    }
    if let Some(p) = p_path.iter().find(|p| **p > 1.0) {
        return Err(Error::OutOfRange(*p));
    }
    let mut worst = 0.0f64;
    for i in 1..p_path.len() - 1 {
        let da = (p_path[i + 1].sqrt() - p_path[i - 1].sqrt()) / (2.0 * dt);
        let dp = (p_path[i + 1] - p_path[i - 1]) / (2.0 * dt);
        let rhs = dp / (2.0 * p_path[i].sqrt());
        let scale = da.abs().max(rhs.abs());
        if scale > 0.0 {
            worst = worst.max((da - rhs).abs() / scale);
        }
    }
    Ok(RateCheck { points: p_path.len() - 2, max_relative_deviation: worst })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorrelatedFlipReport {
    pub theta: f64,
    /// Populations of |00>, |01>, |10>, |11>.
    pub populations: [f64; 4],
    /// Largest population on |01> or |10>.
    pub leak: f64,
    pub expected_transfer: f64,
}

/// Pair-averaged `exp(-+i theta X kron X)` applied to `|00><00|`.
pub fn correlated_flip_check(theta: f64) -> Result<CorrelatedFlipReport> {
    let xx = pauli_x().kronecker(&pauli_x());
    let rho = DensityMatrix::basis(2, 0)?;
    let r = rho.matrix();
    let (a, b) = (involution_exp(&xx, theta, -1.0), involution_exp(&xx, theta, 1.0));
    let out = DensityMatrix::new((&a * r * a.adjoint() + &b * r * b.adjoint()) * c(0.5, 0.0))?;
    let pops = out.populations();
    let populations = [pops[0], pops[1], pops[2], pops[3]];
    Ok(CorrelatedFlipReport { theta, populations, leak: pops[1].abs().max(pops[2].abs()), expected_transfer: theta.sin().powi(2) })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EmbedCheck {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EmbedReport {
    pub seed: u64,
    pub checks: Vec<EmbedCheck>,
}

impl EmbedReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    fn push(&mut self, name: &str, residual: f64, tolerance: f64) {
        self.checks.push(EmbedCheck { name: name.into(), residual, tolerance, pass: residual <= tolerance });
    }
}

/// Random single-qubit state: uniform direction, radius uniform in [0, 1].
pub fn random_qubit(r: &mut impl Rng) -> Result<DensityMatrix> {
    let z: f64 = r.gen_range(-1.0..=1.0);
    let phi: f64 = r.gen_range(0.0..std::f64::consts::TAU);
    let len: f64 = r.gen();
    let s = (1.0 - z * z).sqrt();
    DensityMatrix::bloch([len * s * phi.cos(), len * s * phi.sin(), len * z])
}

/// Order of convergence of the rate check from successive halvings of dt
/// on `p(t) = cos^2 t`, `t` in [0.1, 1.4].
pub fn rate_convergence_order(dts: &[f64]) -> Result<(Vec<f64>, f64)> {
    let devs = dts
        .iter()
        .map(|&dt| {
            let steps = ((1.4 - 0.1) / dt).round() as usize;
            let path: Vec<f64> = (0..=steps).map(|i| (0.1 + i as f64 * dt).cos().powi(2)).collect();
            Ok(verify_rate_relation(&path, dt)?.max_relative_deviation)
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = devs.iter().map(|d| d.ln()).collect();
    Ok((devs, crate::experiments::LineFit::fit(&xs, &ys).slope))
}

/// Runs every appendix check with its tolerance.
pub fn verification_report(seed: u64, random_cases: usize) -> Result<EmbedReport> {
    let mut report = EmbedReport { seed, checks: Vec::new() };
    let zero = DensityMatrix::basis(1, 0)?;
    for p in [0.0, 0.25, 0.5, 1.0] {
        report.push(&format!("unitarity p={p}"), rotation_pair(p)?.unitarity_residual(), 1e-14);
        let out = bernoulli_channel(p, &zero)?;
        let m = out.matrix();
        let diag = (m[(0, 0)] - c(p, 0.0)).norm().max((m[(1, 1)] - c(1.0 - p, 0.0)).norm());
        report.push(&format!("diagonal p={p}"), diag, 1e-12);
        report.push(&format!("coherence p={p}"), m[(0, 1)].norm().max(m[(1, 0)].norm()), 1e-12);
    }
    let mixed = DensityMatrix::maximally_mixed(1)?;
    let unital = (0..=10)
        .map(|i| Ok(max_abs(&(bernoulli_channel(i as f64 / 10.0, &mixed)?.matrix() - mixed.matrix()))))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    report.push("unital", unital, 1e-12);

    let mut r = rng::stream(seed, 0);
    let (mut path_gap, mut trace_gap, mut psd_gap) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..random_cases {
        let p: f64 = r.gen();
        let rho = random_qubit(&mut r)?;
        let paths = channel_paths(p, &rho)?;
        path_gap = path_gap.max(paths.residual);
        trace_gap = trace_gap.max((paths.direct.trace() - c(1.0, 0.0)).norm());
        psd_gap = psd_gap.max((-min_eigenvalue(&paths.direct)).max(0.0));
    }
    report.push("vectorized vs direct", path_gap, 1e-12);
    report.push("trace preserved", trace_gap, 1e-12);
    report.push("positivity", psd_gap, PSD_TOL);

    let steps = ((1.4 - 0.1) / 1e-4f64).round() as usize;
    let path: Vec<f64> = (0..=steps).map(|i| (0.1 + i as f64 * 1e-4).cos().powi(2)).collect();
    report.push("rate relation dt=1e-4", verify_rate_relation(&path, 1e-4)?.max_relative_deviation, 1e-6);
    let (_, order) = rate_convergence_order(&[1e-2, 5e-3, 2.5e-3, 1.25e-3])?;
    report.push("rate relation order - 2", (order - 2.0).abs(), 0.1);

    for theta in [0.0, std::f64::consts::FRAC_PI_6, std::f64::consts::FRAC_PI_2] {
        let f = correlated_flip_check(theta)?;
        report.push(&format!("flip leak theta={theta:.6}"), f.leak, 1e-12);
        report.push(&format!("flip transfer theta={theta:.6}"), (f.populations[3] - f.expected_transfer).abs(), 1e-12);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_limits() {
        let id = rotation_pair(1.0).unwrap();
        assert!(max_abs(&(&id.u1 - CMatrix::identity(2, 2))) < 1e-15);
        assert!(max_abs(&(&id.u2 - CMatrix::identity(2, 2))) < 1e-15);
        let flip = rotation_pair(0.0).unwrap();
        assert!(max_abs(&(&flip.u1 - pauli_x() * c(0.0, -1.0))) < 1e-15);
        let q = rotation_pair(0.25).unwrap();
        assert!((q.theta - std::f64::consts::FRAC_PI_3).abs() < 1e-15);
        assert!(q.unitarity_residual() < 1e-14);
        assert!(matches!(rotation_pair(1.5), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn quarter_from_zero() {
        let out = bernoulli_channel(0.25, &DensityMatrix::basis(1, 0).unwrap()).unwrap();
        let pops = out.populations();
        assert!((pops[0] - 0.25).abs() < 1e-12 && (pops[1] - 0.75).abs() < 1e-12);
        assert!(out.matrix()[(0, 1)].norm() < 1e-12);
    }

    #[test]
    fn invalid_states() {
        assert!(DensityMatrix::bloch([0.0, 0.0, 1.5]).is_err());
        let nonherm = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.0), c(0.0, 0.0), c(0.5, 0.0)]);
        assert!(DensityMatrix::new(nonherm).is_err());
        assert!(bernoulli_channel(0.5, &DensityMatrix::basis(2, 0).unwrap()).is_err());
    }

    #[test]
    fn rate_relation() {
        let flat = vec![0.3; 50];
        assert_eq!(verify_rate_relation(&flat, 0.01).unwrap().max_relative_deviation, 0.0);
        let dt = 1e-3;
        let lin: Vec<f64> = (0..=800).map(|i| 0.1 + i as f64 * dt).collect();
        assert!(verify_rate_relation(&lin, dt).unwrap().max_relative_deviation < 1e-4);
        assert!(matches!(verify_rate_relation(&[0.5, 0.0, 0.5], 0.1), Err(Error::SingularPath(1))));
        let (_, order) = rate_convergence_order(&[1e-2, 5e-3, 2.5e-3]).unwrap();
        assert!((order - 2.0).abs() < 0.1, "{order}");
    }

    #[test]
    fn correlated_flip() {
        let f = correlated_flip_check(std::f64::consts::FRAC_PI_6).unwrap();
        assert!((f.populations[3] - 0.25).abs() < 1e-12);
        assert!(f.leak < 1e-12);
        let f = correlated_flip_check(0.0).unwrap();
        assert!((f.populations[0] - 1.0).abs() < 1e-15);
        let f = correlated_flip_check(std::f64::consts::FRAC_PI_2).unwrap();
        assert!((f.populations[3] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn full_report_passes() {
        let r = verification_report(1, 100).unwrap();
        for c in &r.checks {
            assert!(c.pass, "{c:?}");
        }
    }
}
