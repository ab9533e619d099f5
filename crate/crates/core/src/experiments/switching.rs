use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Bump shape before pointwise normalization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TailShape {
    /// `2^(-beta |u - c|)`.
    Exponential { beta: f64 },
    /// `1 / (1 + ((u - c) / s)^2)`.
    Polynomial { s: f64 },
}

impl TailShape {
    pub fn bump(self, u: f64, c: f64) -> f64 {
        match self {
            TailShape::Exponential { beta } => (-beta * (u - c).abs()).exp2(),
            TailShape::Polynomial { s } => 1.0 / (1.0 + ((u - c) / s).powi(2)),
        }
    }

    /// Polynomial shape with the same half-maximum width.
    pub fn matched_polynomial(self) -> Self {
        match self {
            TailShape::Exponential { beta } => TailShape::Polynomial { s: 1.0 / beta },
            p => p,
        }
    }
}

/// `K` bump signals normalized to sum to one at every drive value.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SwitchingFamily {
    pub shape: TailShape,
    pub k: usize,
    pub domain: [f64; 2],
    pub centers: Vec<f64>,
    pub grid: Vec<f64>,
    /// `signals[i][g]` is signal `i` at `grid[g]`.
    pub signals: Vec<Vec<f64>>,
    /// Signal `i` at its own center.
    pub peaks: Vec<f64>,
    pub confusion: Vec<f64>,
    /// Largest `|sum_i signals[i][g] - 1|`.
    pub normalization_residual: f64,
}

impl SwitchingFamily {
    pub fn min_peak(&self) -> f64 {
        self.peaks.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Normalized signal values at drive `u`.
    pub fn eval(&self, u: f64) -> Vec<f64> {
        normalized(self.shape, &self.centers, u)
    }
}

fn normalized(shape: TailShape, centers: &[f64], u: f64) -> Vec<f64> {
    let raw: Vec<f64> = centers.iter().map(|&c| shape.bump(u, c)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

fn centers(k: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..k).map(|i| lo + (i as f64 + 0.5) * (hi - lo) / k as f64).collect()
}

/// Builds the family on `points` equispaced drive values with centers at
/// the midpoints of `k` equal cells of the domain.
pub fn switching_family(shape: TailShape, k: usize, domain: [f64; 2], points: usize) -> Result<SwitchingFamily> {
    let [lo, hi] = domain;
    if k == 0 || points < 2 || !(lo < hi) {
        return Err(Error::InvalidParameter(format!("switching family needs K >= 1, 2+ points and lo < hi; got K={k}, {points} points, [{lo}, {hi}]")));
    }
    match shape {
        TailShape::Exponential { beta } if !(beta > 0.0) => return Err(Error::InvalidParameter(format!("beta {beta} must be positive"))),
        TailShape::Polynomial { s } if !(s > 0.0) => return Err(Error::InvalidParameter(format!("width {s} must be positive"))),
        _ => {}
    }
    let centers = centers(k, lo, hi);
    let grid: Vec<f64> = (0..points).map(|g| lo + (hi - lo) * g as f64 / (points - 1) as f64).collect();
    let mut signals = vec![Vec::with_capacity(points); k];
    let mut normalization_residual = 0.0f64;
    for &u in &grid {
        let vals = normalized(shape, &centers, u);
        normalization_residual = normalization_residual.max((vals.iter().sum::<f64>() - 1.0).abs());
        for (s, v) in signals.iter_mut().zip(vals) {
            s.push(v);
        }
    }
    let peaks: Vec<f64> = centers.iter().enumerate().map(|(i, &c)| normalized(shape, &centers, c)[i]).collect();
    let confusion = peaks.iter().map(|p| 1.0 - p).collect();
    Ok(SwitchingFamily { shape, k, domain, centers, grid, signals, peaks, confusion, normalization_residual })
}

/// Smallest exponential rate whose family reaches `min_peak >= target`,
/// located by bisection to relative precision 1e-6.
pub fn beta_threshold(k: usize, domain: [f64; 2], target: f64) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) || k < 2 {
        return Err(Error::InvalidParameter(format!("peak target {target} needs K >= 2 and lie in (0, 1)")));
    }
    let cs = centers(k, domain[0], domain[1]);
    let min_peak = |beta: f64| {
        cs.iter().enumerate().map(|(i, &c)| normalized(TailShape::Exponential { beta }, &cs, c)[i]).fold(f64::INFINITY, f64::min)
    };
    let (mut lo, mut hi) = (0.0, 1.0 / (domain[1] - domain[0]));
    while min_peak(hi) < target {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::InvalidParameter("peak target unreachable".into()));
        }
    }
    while hi - lo > 1e-6 * hi {
        let mid = 0.5 * (lo + hi);
        if min_peak(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_signal_is_one() {
        let f = switching_family(TailShape::Exponential { beta: 3.0 }, 1, [0.0, 1.0], 11).unwrap();
        assert!(f.signals[0].iter().all(|v| (*v - 1.0).abs() < 1e-15));
        assert_eq!(f.confusion, vec![0.0]);
    }

    #[test]
    fn normalized_everywhere() {
        for shape in [TailShape::Exponential { beta: 20.0 }, TailShape::Polynomial { s: 0.05 }] {
            for k in 1..8 {
                let f = switching_family(shape, k, [-2.0, 3.0], 501).unwrap();
                assert!(f.normalization_residual < 1e-12);
            }
        }
    }

    #[test]
    fn threshold_is_tight() {
        let beta = beta_threshold(4, [0.0, 1.0], 0.99).unwrap();
        let at = switching_family(TailShape::Exponential { beta }, 4, [0.0, 1.0], 101).unwrap();
        let below = switching_family(TailShape::Exponential { beta: beta * 0.999 }, 4, [0.0, 1.0], 101).unwrap();
        assert!(at.min_peak() >= 0.99 && below.min_peak() < 0.99);
        let poly = switching_family(TailShape::Exponential { beta }.matched_polynomial(), 4, [0.0, 1.0], 101).unwrap();
        assert!(poly.min_peak() < at.min_peak());
    }
}
