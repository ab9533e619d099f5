use serde::{Deserialize, Serialize};

use super::{line_fit, LineFit};
use crate::{Error, Result};

const INCONCLUSIVE_MARGIN: f64 = 0.10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TailClass {
    /// `p ~ u^(-degree)`.
    Polynomial { degree: f64 },
    /// `p ~ exp(-rate u)`.
    Exponential { rate: f64 },
    Inconclusive,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SignalTail {
    pub class: TailClass,
    /// log p against log u.
    pub polynomial: LineFit,
    /// log p against u.
    pub exponential: LineFit,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TailFit {
    pub region: [f64; 2],
    pub points: usize,
    pub signals: Vec<SignalTail>,
}

/// Fits both tail models to one signal over the grid points inside `region`
/// and keeps the one with the smaller residual; within 10% of each other
/// the result is inconclusive.
pub fn classify_tail(grid: &[f64], signal: &[f64], region: [f64; 2]) -> Result<SignalTail> {
    if grid.len() != signal.len() {
        return Err(Error::DimensionMismatch(format!("{} grid points, {} values", grid.len(), signal.len())));
    }
    let (mut lu, mut u, mut lp) = (Vec::new(), Vec::new(), Vec::new());
    for (&x, &p) in grid.iter().zip(signal) {
        if x < region[0] || x > region[1] {
            continue;
        }
        if !(p > 0.0) || !(x > 0.0) {
            return Err(Error::NonpositiveSignal { index: u.len(), at: x });
        }
        lu.push(x.ln());
        u.push(x);
        lp.push(p.ln());
    }
    if u.len() < 3 {
        return Err(Error::InvalidParameter(format!("only {} grid points in the decay region", u.len())));
    }
    let polynomial = line_fit(&lu, &lp);
    let exponential = line_fit(&u, &lp);
    let (a, b) = (polynomial.rss, exponential.rss);
    let class = if (a - b).abs() <= INCONCLUSIVE_MARGIN * a.max(b) {
        TailClass::Inconclusive
    } else if a < b {
        TailClass::Polynomial { degree: -polynomial.slope }
    } else {
        TailClass::Exponential { rate: -exponential.slope }
    };
    Ok(SignalTail { class, polynomial, exponential })
}

pub fn classify_tails(grid: &[f64], signals: &[Vec<f64>], region: [f64; 2]) -> Result<TailFit> {
    let signals = signals.iter().map(|s| classify_tail(grid, s, region)).collect::<Result<Vec<_>>>()?;
    let points = grid.iter().filter(|x| **x >= region[0] && **x <= region[1]).count();
    Ok(TailFit { region, points, signals })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn inverse_square() {
        let g = grid(1.0, 100.0, 400);
        let p: Vec<f64> = g.iter().map(|u| u.powi(-2)).collect();
        match classify_tail(&g, &p, [1.0, 100.0]).unwrap().class {
            TailClass::Polynomial { degree } => assert!((degree - 2.0).abs() < 0.1),
            c => panic!("{c:?}"),
        }
    }

    #[test]
    fn halving() {
        let g = grid(1.0, 50.0, 400);
        let p: Vec<f64> = g.iter().map(|u| (-u).exp2()).collect();
        match classify_tail(&g, &p, [1.0, 50.0]).unwrap().class {
            TailClass::Exponential { rate } => assert!((rate / std::f64::consts::LN_2 - 1.0).abs() < 0.05),
            c => panic!("{c:?}"),
        }
    }

    #[test]
    fn polynomial_prefactor() {
        let g = grid(1.0, 50.0, 400);
        let p: Vec<f64> = g.iter().map(|u| u * u * (-u).exp2()).collect();
        match classify_tail(&g, &p, [20.0, 50.0]).unwrap().class {
            TailClass::Exponential { rate } => assert!((rate / std::f64::consts::LN_2 - 1.0).abs() < 0.10),
            c => panic!("{c:?}"),
        }
    }

    #[test]
    fn nonpositive_rejected() {
        let g = grid(1.0, 5.0, 10);
        let mut p = vec![1.0; 10];
        p[4] = 0.0;
        assert!(matches!(classify_tail(&g, &p, [1.0, 5.0]), Err(Error::NonpositiveSignal { .. })));
    }
}
