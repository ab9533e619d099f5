use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::quadrature::gauss_legendre;
use crate::rng;
use crate::{Error, Result};

/// Input vectors `U(t)` plus the washout and history window used downstream.
///
/// The scalar drive seen by the gates is `U(t)[0]` for one-dimensional inputs
/// and `||U(t)||_2` otherwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputSequence {
    pub values: Vec<Vec<f64>>,
    pub washout: usize,
    pub history_window: usize,
}

impl InputSequence {
    pub fn new(values: Vec<Vec<f64>>, washout: usize, history_window: usize) -> Result<Self> {
        let seq = Self { values, washout, history_window };
        seq.validate()?;
        Ok(seq)
    }

    pub fn scalar(values: Vec<f64>, washout: usize) -> Result<Self> {
        Self::new(values.into_iter().map(|v| vec![v]).collect(), washout, 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.history_window == 0 {
            return Err(Error::InvalidMeasure("history window must be at least 1".into()));
        }
        let width = self.values.first().map_or(1, Vec::len);
        for (t, v) in self.values.iter().enumerate() {
            if v.len() != width || v.is_empty() {
                return Err(Error::DimensionMismatch(format!("input {t} has {} components, expected {width}", v.len())));
            }
            if let Some(x) = v.iter().find(|x| !x.is_finite()) {
                return Err(Error::NonfiniteDrive(*x, t));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of steps kept after the washout.
    pub fn kept(&self) -> usize {
        self.values.len().saturating_sub(self.washout)
    }

    pub fn drive(&self, t: usize) -> f64 {
        let v = &self.values[t];
        if v.len() == 1 {
            v[0]
        } else {
            v.iter().map(|x| x * x).sum::<f64>().sqrt()
        }
    }

    pub fn drives(&self) -> Vec<f64> {
        (0..self.values.len()).map(|t| self.drive(t)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeasureKind {
    IidUniformInterval { lo: f64, hi: f64 },
    /// Values -1 and +1 with equal probability.
    IidUniformBinary,
    /// Gauss-Legendre nodes on [-1, 1]; sampled iid with the rule's weights.
    QuadratureGrid { order: usize },
}

/// Input distribution together with the seed of its sample stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputMeasure {
    #[serde(flatten)]
    pub kind: MeasureKind,
    #[serde(default)]
    pub seed: u64,
}

impl InputMeasure {
    pub fn new(kind: MeasureKind, seed: u64) -> Result<Self> {
        let m = Self { kind, seed };
        m.validate()?;
        Ok(m)
    }

    pub fn uniform(lo: f64, hi: f64, seed: u64) -> Result<Self> {
        Self::new(MeasureKind::IidUniformInterval { lo, hi }, seed)
    }

    pub fn binary(seed: u64) -> Self {
        Self { kind: MeasureKind::IidUniformBinary, seed }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            MeasureKind::IidUniformInterval { lo, hi } if !(lo < hi) || !lo.is_finite() || !hi.is_finite() => {
                Err(Error::InvalidMeasure(format!("interval [{lo}, {hi}] is empty")))
            }
            MeasureKind::QuadratureGrid { order } if order < 2 => {
                Err(Error::InvalidMeasure(format!("quadrature order {order} < 2")))
            }
            _ => Ok(()),
        }
    }

    /// Interval the measure lives on.
    pub fn support(&self) -> (f64, f64) {
        match self.kind {
            MeasureKind::IidUniformInterval { lo, hi } => (lo, hi),
            _ => (-1.0, 1.0),
        }
    }

    /// Atoms and weights (summing to 1) for discrete measures.
    pub fn atoms(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match self.kind {
            MeasureKind::IidUniformInterval { .. } => None,
            MeasureKind::IidUniformBinary => Some((vec![-1.0, 1.0], vec![0.5, 0.5])),
            MeasureKind::QuadratureGrid { order } => {
                let (x, w) = gauss_legendre(order);
                Some((x, w.into_iter().map(|w| 0.5 * w).collect()))
            }
        }
    }

    /// `len` iid draws from stream `stream_id` of this measure's seed.
    pub fn sample(&self, len: usize, stream_id: u64) -> Vec<f64> {
        let mut r = rng::stream(self.seed, stream_id);
        let atoms = self.atoms();
        (0..len)
            .map(|_| match (&self.kind, &atoms) {
                (MeasureKind::IidUniformInterval { lo, hi }, _) => lo + (hi - lo) * r.gen::<f64>(),
                (MeasureKind::IidUniformBinary, _) => {
                    if r.gen::<bool>() {
                        1.0
                    } else {
                        -1.0
                    }
                }
                (_, Some((x, w))) => {
                    let draw: f64 = r.gen();
                    let mut acc = 0.0;
                    for (xi, wi) in x.iter().zip(w) {
                        acc += wi;
                        if draw < acc {
                            return *xi;
                        }
                    }
                    *x.last().unwrap()
                }
                _ => unreachable!(),
            })
            .collect()
    }

    /// Scalar input sequence of `washout + steps` draws.
    pub fn sequence(&self, steps: usize, washout: usize, stream_id: u64) -> InputSequence {
        let values = self.sample(washout + steps, stream_id).into_iter().map(|v| vec![v]).collect();
        InputSequence { values, washout, history_window: 1 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(InputMeasure::uniform(1.0, 1.0, 0).is_err());
        assert!(InputMeasure::new(MeasureKind::QuadratureGrid { order: 1 }, 0).is_err());
        assert!(InputSequence::scalar(vec![0.0, f64::INFINITY], 0).is_err());
        assert!(InputSequence::new(vec![vec![0.0]], 0, 0).is_err());
    }

    #[test]
    fn drive_is_norm_for_vectors() {
        let s = InputSequence::new(vec![vec![3.0, 4.0]], 0, 1).unwrap();
        assert_eq!(s.drive(0), 5.0);
        let s = InputSequence::scalar(vec![-0.5], 0).unwrap();
        assert_eq!(s.drive(0), -0.5);
    }

    #[test]
    fn samples_are_reproducible_and_in_support() {
        let m = InputMeasure::uniform(-2.0, 3.0, 11).unwrap();
        let a = m.sample(1000, 4);
        assert_eq!(a, m.sample(1000, 4));
        assert!(a.iter().all(|x| (-2.0..3.0).contains(x)));
        let b = InputMeasure::binary(1).sample(1000, 0);
        assert!(b.iter().all(|x| *x == 1.0 || *x == -1.0));
        let mean: f64 = b.iter().sum::<f64>() / 1000.0;
        assert!(mean.abs() < 0.15);
    }

    #[test]
    fn measure_json() {
        let m: InputMeasure = serde_json::from_str(r#"{"kind":"iid-uniform-interval","lo":-1,"hi":1,"seed":3}"#).unwrap();
        assert_eq!(m.kind, MeasureKind::IidUniformInterval { lo: -1.0, hi: 1.0 });
        assert_eq!(m.seed, 3);
    }
}
