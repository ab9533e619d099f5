//! Signal matrices and the subset product transforms between bitstring
//! probabilities and product-of-bits moments.
//!
//! Moment column `S` (a bit mask) holds `E[prod_{i in S} b_i]`, which is the
//! sum of `p_k` over all bitstrings `k` that contain `S`. The forward map is a
//! superset-sum (zeta) transform and the inverse its Moebius inversion, both
//! `O(n 2^n)`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::reservoir::{BitstringDistribution, TrajectoryEnsemble};
use crate::{Error, Result, MAX_EXACT_BITS};

const ROW_SUM_TOL: f64 = 1e-10;
const NEGATIVE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignalMode {
    ExactProbability,
    EmpiricalFrequency,
    /// Columns indexed by subset mask; mask 0 is the constant 1.
    Moment,
    /// Arbitrary real signals.
    Raw,
}

impl SignalMode {
    pub fn name(self) -> &'static str {
        match self {
            SignalMode::ExactProbability => "exact-probability",
            SignalMode::EmpiricalFrequency => "empirical-frequency",
            SignalMode::Moment => "moment",
            SignalMode::Raw => "raw",
        }
    }
}

/// `rows x cols` real signals, one row per time step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalMatrix {
    n: usize,
    mode: SignalMode,
    /// Bitstring index (probability modes) or subset mask (moment mode).
    labels: Vec<u64>,
    rows: usize,
    data: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    shots: Option<u64>,
    /// Averaging weights over rows, summing to 1. Uniform when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
}

impl SignalMatrix {
    pub fn new(n: usize, mode: SignalMode, labels: Vec<u64>, rows: usize, data: Vec<f64>) -> Result<Self> {
        let m = Self { n, mode, labels, rows, data, shots: None, weights: None };
        m.validate()?;
        Ok(m)
    }

    /// Builds a matrix from column vectors of equal length.
    pub fn from_columns(n: usize, mode: SignalMode, labels: Vec<u64>, columns: &[Vec<f64>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch("columns differ in length".into()));
        }
        let mut data = vec![0.0; rows * columns.len()];
        for (j, col) in columns.iter().enumerate() {
            for (t, v) in col.iter().enumerate() {
                data[t * columns.len() + j] = *v;
            }
        }
        Self::new(n, mode, labels, rows, data)
    }

    pub fn validate(&self) -> Result<()> {
        let cols = self.labels.len();
        if self.data.len() != self.rows * cols {
            return Err(Error::DimensionMismatch(format!("{} values for {}x{}", self.data.len(), self.rows, cols)));
        }
        if let Some(v) = self.data.iter().find(|v| !v.is_finite()) {
            return Err(Error::DimensionMismatch(format!("non-finite signal value {v}")));
        }
        match self.mode {
            SignalMode::ExactProbability | SignalMode::EmpiricalFrequency => {
                for t in 0..self.rows {
                    let row = self.row(t);
                    if let Some(v) = row.iter().find(|v| !(**v >= -1e-12 && **v <= 1.0 + 1e-12)) {
                        return Err(Error::InvalidDistribution(format!("row {t} has entry {v}")));
                    }
                    let sum: f64 = row.iter().sum();
                    if (sum - 1.0).abs() > ROW_SUM_TOL {
                        return Err(Error::InvalidDistribution(format!("row {t} sums to {sum}")));
                    }
                }
            }
            SignalMode::Moment => {
                if let Some(j) = self.labels.iter().position(|l| *l == 0) {
                    if let Some(t) = (0..self.rows).find(|&t| (self.get(t, j) - 1.0).abs() > 1e-12) {
                        return Err(Error::DimensionMismatch(format!("empty-mask column is {} at row {t}", self.get(t, j))));
                    }
                }
            }
            SignalMode::Raw => {}
        }
        if let Some(w) = &self.weights {
            if w.len() != self.rows || w.iter().any(|x| !(*x >= 0.0)) {
                return Err(Error::DimensionMismatch("row weights must be non-negative, one per row".into()));
            }
        }
        Ok(())
    }

    pub fn with_shots(mut self, shots: u64) -> Self {
        self.shots = Some(shots);
        self
    }

    /// Attaches averaging weights (normalized to sum to 1).
    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if weights.len() != self.rows || !(total > 0.0) || weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::DimensionMismatch("row weights must be non-negative, one per row, not all zero".into()));
        }
        self.weights = Some(weights.into_iter().map(|w| w / total).collect());
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> SignalMode {
        self.mode
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.labels.len()
    }

    pub fn shots(&self) -> Option<u64> {
        self.shots
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    /// Averaging weight of row `t`.
    pub fn weight(&self, t: usize) -> f64 {
        match &self.weights {
            Some(w) => w[t],
            None => 1.0 / self.rows as f64,
        }
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, t: usize) -> &[f64] {
        let c = self.cols();
        &self.data[t * c..(t + 1) * c]
    }

    pub fn get(&self, t: usize, j: usize) -> f64 {
        self.data[t * self.cols() + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|t| self.get(t, j)).collect()
    }

    /// Weighted time average of every column.
    pub fn column_means(&self) -> Vec<f64> {
        let c = self.cols();
        let mut mean = vec![0.0; c];
        for t in 0..self.rows {
            let w = self.weight(t);
            for (m, v) in mean.iter_mut().zip(self.row(t)) {
                *m += w * v;
            }
        }
        mean
    }

    /// Same signals relabelled as arbitrary real data, scaled by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            mode: SignalMode::Raw,
            data: self.data.iter().map(|v| v * c).collect(),
            ..self.clone()
        }
    }

    /// Appends a copy of column `j` at the end.
    pub fn with_duplicate_column(&self, j: usize) -> Self {
        let c = self.cols();
        let mut data = Vec::with_capacity(self.rows * (c + 1));
        for t in 0..self.rows {
            data.extend_from_slice(self.row(t));
            data.push(self.get(t, j));
        }
        let mut labels = self.labels.clone();
        labels.push(self.labels[j]);
        Self { mode: SignalMode::Raw, labels, data, ..self.clone() }
    }

    /// Nonzero entries below `1 / (10 S)`; reported, never altered.
    pub fn noise_floor_count(&self) -> usize {
        match self.shots {
            Some(s) if s > 0 => {
                let floor = 0.1 / s as f64;
                self.data.iter().filter(|v| **v > 0.0 && **v < floor).count()
            }
            _ => 0,
        }
    }

    fn label_text(&self, label: u64) -> String {
        let prefix = if self.mode == SignalMode::Moment { 'm' } else { 'b' };
        let width = self.n.max(1);
        format!("{prefix}{label:0width$b}")
    }

    /// CSV with one header line of column labels and 17 significant digits.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
        let header: Vec<String> = self.labels.iter().map(|l| self.label_text(*l)).collect();
        w.write_record(&header).map_err(|e| csv_err(path, e))?;
        for t in 0..self.rows {
            w.write_record(self.row(t).iter().map(|v| format!("{v:.16e}"))).map_err(|e| csv_err(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path, mode: SignalMode) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
        let header = r.headers().map_err(|e| csv_err(path, e))?.clone();
        let mut n = 0;
        let mut labels = Vec::with_capacity(header.len());
        for h in header.iter() {
            let digits = h.get(1..).unwrap_or("");
            let label = u64::from_str_radix(digits, 2).map_err(|_| Error::Format(format!("bad column label `{h}`")))?;
            n = digits.len();
            labels.push(label);
        }
        let mut data = Vec::new();
        let mut rows = 0;
        for rec in r.records() {
            let rec = rec.map_err(|e| csv_err(path, e))?;
            for f in rec.iter() {
                data.push(f.trim().parse::<f64>().map_err(|_| Error::Format(format!("bad number `{f}`")))?);
            }
            rows += 1;
        }
        Self::new(n, mode, labels, rows, data)
    }

    /// Little-endian `f64` row-major data plus a JSON sidecar with metadata.
    pub fn write_binary(&self, bin: &Path) -> Result<()> {
        let bytes: Vec<u8> = self.data.iter().flat_map(|v| v.to_le_bytes()).collect();
        fs::write(bin, bytes).map_err(|e| Error::io(bin, e))?;
        let side = serde_json::json!({
            "n": self.n,
            "mode": self.mode,
            "rows": self.rows,
            "cols": self.cols(),
            "labels": self.labels,
            "shots": self.shots,
            "weights": self.weights,
            "dtype": "f64le",
        });
        let path = bin.with_extension("json");
        fs::write(&path, serde_json::to_string_pretty(&side).expect("json")).map_err(|e| Error::io(path, e))
    }

    pub fn read_binary(bin: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct Side {
            n: usize,
            mode: SignalMode,
            rows: usize,
            labels: Vec<u64>,
            shots: Option<u64>,
            weights: Option<Vec<f64>>,
        }
        let path = bin.with_extension("json");
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let side: Side = serde_json::from_str(&text).map_err(|e| Error::Format(e.to_string()))?;
        let bytes = fs::read(bin).map_err(|e| Error::io(bin, e))?;
        if bytes.len() % 8 != 0 {
            return Err(Error::Format(format!("{}: length not a multiple of 8", bin.display())));
        }
        let data = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        let mut m = Self::new(side.n, side.mode, side.labels, side.rows, data)?;
        m.shots = side.shots;
        m.weights = side.weights;
        m.validate()?;
        Ok(m)
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Format(format!("{}: {e}", path.display()))
}

/// Stacks exact distributions into an exact-probability signal matrix.
pub fn probability_signals(dists: &[BitstringDistribution]) -> Result<SignalMatrix> {
    let n = dists.first().map_or(0, BitstringDistribution::n);
    let mut data = Vec::with_capacity(dists.len() << n);
    for d in dists {
        if d.n() != n {
            return Err(Error::MixedDimensions(n, d.n()));
        }
        data.extend_from_slice(d.probs());
    }
    SignalMatrix::new(n, SignalMode::ExactProbability, (0..1u64 << n).collect(), dists.len(), data)
}

/// Per-step frequencies of each bitstring across shots.
///
/// Dense over all 2^n bitstrings up to the exact-mode limit; above it only
/// bitstrings that were observed get a column (sorted ascending).
pub fn empirical_probabilities(ensemble: &TrajectoryEnsemble) -> Result<SignalMatrix> {
    let s = ensemble.shots;
    if s == 0 {
        return Err(Error::InvalidParameter("ensemble has no shots".into()));
    }
    let labels: Vec<u64> = if ensemble.n <= MAX_EXACT_BITS {
        (0..1u64 << ensemble.n).collect()
    } else {
        let mut seen: Vec<u64> = ensemble.samples.iter().map(|&x| u64::from(x)).collect();
        seen.sort_unstable();
        seen.dedup();
        seen
    };
    let cols = labels.len();
    let mut data = vec![0.0; ensemble.steps * cols];
    let inc = 1.0 / s as f64;
    for shot in 0..s {
        for (t, &x) in ensemble.trajectory(shot).iter().enumerate() {
            let j = if ensemble.n <= MAX_EXACT_BITS { x as usize } else { labels.binary_search(&u64::from(x)).unwrap() };
            data[t * cols + j] += inc;
        }
    }
    // summing 1/S repeatedly drifts; recompute from counts for exactness
    for v in data.iter_mut() {
        *v = (*v * s as f64).round() / s as f64;
    }
    Ok(SignalMatrix::new(ensemble.n, SignalMode::EmpiricalFrequency, labels, ensemble.steps, data)?.with_shots(s as u64))
}

/// In-place superset sums: `x[S] <- sum_{K ⊇ S} x[K]`.
pub fn superset_zeta(x: &mut [f64]) {
    let len = x.len();
    debug_assert!(len.is_power_of_two());
    let mut bit = 1;
    while bit < len {
        for k in 0..len {
            if k & bit == 0 {
                x[k] += x[k | bit];
            }
        }
        bit <<= 1;
    }
}

/// Inverse of [`superset_zeta`].
pub fn superset_moebius(x: &mut [f64]) {
    let len = x.len();
    debug_assert!(len.is_power_of_two());
    let mut bit = 1;
    while bit < len {
        for k in 0..len {
            if k & bit == 0 {
                x[k] -= x[k | bit];
            }
        }
        bit <<= 1;
    }
}

/// Product-of-bits moments for every subset mask of an `n`-bit row.
pub fn moments_from_probabilities(row: &[f64], n: usize) -> Result<Vec<f64>> {
    check_len(row.len(), n)?;
    let mut m = row.to_vec();
    superset_zeta(&mut m);
    Ok(m)
}

/// Recovers bitstring probabilities from a full moment vector.
pub fn probabilities_from_moments(moments: &[f64], n: usize) -> Result<Vec<f64>> {
    check_len(moments.len(), n)?;
    if (moments[0] - 1.0).abs() > 1e-10 {
        return Err(Error::DimensionMismatch(format!("empty-mask moment is {}, expected 1", moments[0])));
    }
    let mut p = moments.to_vec();
    superset_moebius(&mut p);
    if let Some((index, &value)) = p.iter().enumerate().find(|(_, v)| **v < -NEGATIVE_TOL) {
        return Err(Error::NegativeProbability { index, value });
    }
    Ok(p)
}

fn check_len(len: usize, n: usize) -> Result<()> {
    if n > MAX_EXACT_BITS {
        return Err(Error::ExactModeOverflow { n, max: MAX_EXACT_BITS });
    }
    if len != 1 << n {
        return Err(Error::DimensionMismatch(format!("length {len} for n = {n}")));
    }
    Ok(())
}

/// Moments for selected masks from a sparse row (`labels[j]` has mass `row[j]`).
pub fn moments_for_masks(labels: &[u64], row: &[f64], masks: &[u64]) -> Vec<f64> {
    masks
        .iter()
        .map(|&s| labels.iter().zip(row).filter(|(k, _)| **k & s == s).map(|(_, p)| p).sum())
        .collect()
}

/// Converts every row of a probability signal matrix to moments.
pub fn moment_signals(signals: &SignalMatrix) -> Result<SignalMatrix> {
    match signals.mode() {
        SignalMode::ExactProbability | SignalMode::EmpiricalFrequency => {}
        other => return Err(Error::ModeMismatch { expected: "probability", found: other.name() }),
    }
    let n = signals.n();
    check_len(signals.cols(), n)?;
    let mut data = Vec::with_capacity(signals.data().len());
    for t in 0..signals.rows() {
        data.extend(moments_from_probabilities(signals.row(t), n)?);
    }
    let mut m = SignalMatrix::new(n, SignalMode::Moment, (0..1u64 << n).collect(), signals.rows(), data)?;
    m.shots = signals.shots;
    m.weights = signals.weights.clone();
    Ok(m)
}

/// Converts a dense moment signal matrix back to probabilities.
pub fn probability_signals_from_moments(signals: &SignalMatrix) -> Result<SignalMatrix> {
    if signals.mode() != SignalMode::Moment {
        return Err(Error::ModeMismatch { expected: "moment", found: signals.mode().name() });
    }
    let n = signals.n();
    check_len(signals.cols(), n)?;
    let mut data = Vec::with_capacity(signals.data().len());
    for t in 0..signals.rows() {
        data.extend(probabilities_from_moments(signals.row(t), n)?.into_iter().map(|p| p.max(0.0)));
    }
    let mut m = SignalMatrix::new(n, SignalMode::ExactProbability, (0..1u64 << n).collect(), signals.rows(), data)?;
    m.shots = signals.shots;
    m.weights = signals.weights.clone();
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_row_and_pair_moment() {
        let d = BitstringDistribution::uniform(2).unwrap();
        let s = probability_signals(std::slice::from_ref(&d)).unwrap();
        assert_eq!(s.row(0), &[0.25; 4]);
        let m = moments_from_probabilities(d.probs(), 2).unwrap();
        assert_eq!(m[0], 1.0);
        assert_eq!(m[0b11], 0.25);
        assert_eq!(m[0b01], 0.5);
    }

    #[test]
    fn deterministic_rows_are_one_hot() {
        let s = probability_signals(&[BitstringDistribution::point(2, 2).unwrap(), BitstringDistribution::point(2, 1).unwrap()]).unwrap();
        assert_eq!(s.row(0), &[0.0, 0.0, 1.0, 0.0]);
        assert_eq!(s.row(1), &[0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn inverse_examples() {
        let p = probabilities_from_moments(&[1.0; 8], 3).unwrap();
        assert_eq!(p, vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let p = probabilities_from_moments(&[1.0, 0.3], 1).unwrap();
        assert!((p[0] - 0.7).abs() < 1e-15 && (p[1] - 0.3).abs() < 1e-15);
        assert!(matches!(probabilities_from_moments(&[1.0, 1.2], 1), Err(Error::NegativeProbability { index: 0, .. })));
    }

    #[test]
    fn mixed_dimensions_rejected() {
        let a = BitstringDistribution::uniform(1).unwrap();
        let b = BitstringDistribution::uniform(2).unwrap();
        assert!(matches!(probability_signals(&[a, b]), Err(Error::MixedDimensions(1, 2))));
    }

    #[test]
    fn sparse_masks_match_dense() {
        let p = vec![0.1, 0.2, 0.0, 0.3, 0.0, 0.0, 0.25, 0.15];
        let dense = moments_from_probabilities(&p, 3).unwrap();
        let labels: Vec<u64> = (0..8).filter(|k| p[*k as usize] > 0.0).collect();
        let row: Vec<f64> = labels.iter().map(|k| p[*k as usize]).collect();
        let masks = [0u64, 1, 2, 3, 6, 7];
        let sparse = moments_for_masks(&labels, &row, &masks);
        for (m, v) in masks.iter().zip(sparse) {
            assert!((dense[*m as usize] - v).abs() < 1e-15);
        }
    }

    #[test]
    fn csv_and_binary_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![
            BitstringDistribution::new(2, vec![0.1, 0.2, 0.3, 0.4]).unwrap(),
            BitstringDistribution::new(2, vec![1.0 / 3.0, 1.0 / 6.0, 0.25, 0.25]).unwrap(),
        ];
        let s = probability_signals(&rows).unwrap();
        let csv = dir.path().join("s.csv");
        s.write_csv(&csv).unwrap();
        let text = std::fs::read_to_string(&csv).unwrap();
        assert!(text.starts_with("b00,b01,b10,b11\n"));
        assert_eq!(SignalMatrix::read_csv(&csv, SignalMode::ExactProbability).unwrap(), s);
        let bin = dir.path().join("s.bin");
        let s = s.with_shots(3);
        s.write_binary(&bin).unwrap();
        assert_eq!(SignalMatrix::read_binary(&bin).unwrap(), s);
    }
}
