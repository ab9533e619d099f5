use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng;
use crate::{Error, Result};

const MIN_TRIALS: usize = 1000;
/// `m0 q` below this counts as the small-rate regime.
const SMALL_RATE: f64 = 0.1;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LearnabilityPoint {
    pub m0: u64,
    /// `(1 - q)^m0`: every one of `m0` samples is zero.
    pub exact_all_zero: f64,
    pub empirical_all_zero: f64,
    /// Binomial standard deviation of the empirical frequency.
    pub sigma: f64,
    pub within_3sigma: bool,
    /// First-order approximation `m0 q`.
    pub approximation: f64,
    /// `1 - (1 - q)^m0`, the quantity `m0 q` actually approximates.
    pub detection: f64,
    pub small_rate_regime: bool,
    /// `|m0 q - (1 - q)^m0|`: the approximation read against the all-zero
    /// probability instead of its complement.
    pub discrepancy: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LearnabilityCurve {
    pub q: f64,
    pub trials: usize,
    pub seed: u64,
    pub points: Vec<LearnabilityPoint>,
}

/// Probability that a learner drawing `m0` samples, each nonzero with
/// probability `q`, sees only zeros; exact and simulated.
///
/// Trial `k` at grid point `m0` draws from stream `k` of a seed derived
/// from `(seed, m0)`.
pub fn sample_complexity_curve(q: f64, m0_grid: &[u64], trials: usize, seed: u64) -> Result<LearnabilityCurve> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidParameter(format!("rate {q} outside [0, 1]")));
    }
    if trials < MIN_TRIALS {
        return Err(Error::InsufficientTrials(trials, MIN_TRIALS));
    }
    let points = m0_grid
        .iter()
        .map(|&m0| {
            let exact = (1.0 - q).powf(m0 as f64);
            let sub = rng::derive_seed(seed, &[m0]);
            let zeros = (0..trials)
                .filter(|&k| {
                    let mut r = rng::stream(sub, k as u64);
                    (0..m0).all(|_| !r.gen_bool(q))
                })
                .count();
            let empirical = zeros as f64 / trials as f64;
            let sigma = (exact * (1.0 - exact) / trials as f64).sqrt();
            let approximation = m0 as f64 * q;
            LearnabilityPoint {
                m0,
                exact_all_zero: exact,
                empirical_all_zero: empirical,
                sigma,
                within_3sigma: (empirical - exact).abs() <= 3.0 * sigma,
                approximation,
                detection: 1.0 - exact,
                small_rate_regime: approximation < SMALL_RATE,
                discrepancy: (approximation - exact).abs(),
            }
        })
        .collect();
    Ok(LearnabilityCurve { q, trials, seed, points })
}

/// Fewest samples with detection probability `1 - (1 - q)^m0 >= 1/2`.
pub fn detection_sample_size(q: f64) -> Result<u64> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::InvalidParameter(format!("detection needs 0 < q <= 1, got {q}")));
    }
    if q == 1.0 {
        return Ok(1);
    }
    let m = (0.5f64.ln() / (1.0 - q).ln()).ceil();
    // guard the ceiling against round-off on exact solutions
    let m = m as u64;
    if m > 1 && (1.0 - q).powf((m - 1) as f64) <= 0.5 {
        return Ok(m - 1);
    }
    Ok(m)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DetectionPoint {
    pub n: usize,
    pub q: f64,
    pub m0: u64,
    pub ln2_over_q: f64,
    /// `m0 / (ln 2 / q) - 1`.
    pub relative_deviation: f64,
}

/// Detection sample sizes under `q = min(1, n^2 / 2^n)`.
pub fn detection_schedule(ns: &[usize]) -> Result<Vec<DetectionPoint>> {
    ns.iter()
        .map(|&n| {
            let q = ((n * n) as f64 / 2f64.powi(n as i32)).min(1.0);
            let m0 = detection_sample_size(q)?;
            let ln2_over_q = std::f64::consts::LN_2 / q;
            Ok(DetectionPoint { n, q, m0, ln2_over_q, relative_deviation: m0 as f64 / ln2_over_q - 1.0 })
        })
        .collect()
}
