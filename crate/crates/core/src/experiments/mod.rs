//! Experiments built on the reservoir and capacity machinery.

mod learnability;
mod power_basis;
mod scaling;
mod shatter;
mod switching;
mod tails;

pub use learnability::{detection_sample_size, detection_schedule, sample_complexity_curve, DetectionPoint, LearnabilityCurve, LearnabilityPoint};
pub use power_basis::{power_basis_demo, PowerBasisReport};
pub use scaling::{noisy_shift_register, noisy_shift_register_ipc, scan_system_size, Averaging, ScalingCurve, MAX_SCAN_BITS};
pub use shatter::{fat_shattering_lower_bound, switching_subset_class, verify_witness, ShatterResult, ShatterWitness, Thresholds, DEFAULT_NODE_BUDGET};
pub use switching::{beta_threshold, switching_family, SwitchingFamily, TailShape};
pub use tails::{classify_tail, classify_tails, SignalTail, TailClass, TailFit};

/// Ordinary least-squares line with the standard error of its slope.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    /// Residual sum of squares.
    pub rss: f64,
}

impl LineFit {
    pub fn fit(x: &[f64], y: &[f64]) -> Self {
        line_fit(x, y)
    }
}

pub(crate) fn line_fit(x: &[f64], y: &[f64]) -> LineFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let slope_stderr = if x.len() > 2 { (rss / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    LineFit { slope, intercept, slope_stderr, rss }
}
