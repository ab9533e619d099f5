use serde::{Deserialize, Serialize};

use crate::quadrature::{gauss_legendre, normalized_legendre};
use crate::reservoir::{InputMeasure, InputSequence, MeasureKind};
use crate::{Error, Result};

const ORTHONORMAL_TOL: f64 = 1e-6;

/// Products of orthonormal Legendre polynomials of past inputs.
///
/// Term `degrees[d]` is the polynomial degree applied to `u(t - d)`; the
/// constant function is included. Terms are in graded lexicographic order:
/// by total degree, then by the degree vector read from delay 0 upward,
/// larger first.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TargetBasis {
    pub max_delay: usize,
    pub max_degree: usize,
    pub measure: InputMeasure,
    pub terms: Vec<Vec<usize>>,
}

impl TargetBasis {
    pub fn legendre(max_delay: usize, max_degree: usize, measure: InputMeasure) -> Result<Self> {
        measure.validate()?;
        // a two-point measure only supports affine functions of each input
        let per_delay = match measure.kind {
            MeasureKind::IidUniformBinary => max_degree.min(1),
            _ => max_degree,
        };
        let width = max_delay + 1;
        let mut terms = Vec::new();
        for total in 0..=max_degree {
            let mut found = Vec::new();
            compositions(total, width, per_delay, &mut vec![0; width], 0, &mut found);
            terms.extend(found);
        }
        Ok(Self { max_delay, max_degree, measure, terms })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest deviation of the univariate Gram matrix from the identity.
    ///
    /// Products over distinct delays of iid inputs are orthonormal exactly
    /// when the univariate factors are, so this is a complete check. The
    /// integral is evaluated exactly: by quadrature for intervals and by
    /// summing atoms for discrete measures.
    pub fn orthonormality_error(&self) -> f64 {
        let top = self.terms.iter().flatten().copied().max().unwrap_or(0);
        let (lo, hi) = self.measure.support();
        let (nodes, weights) = self.measure.atoms().unwrap_or_else(|| {
            let (x, w) = gauss_legendre(top + 1);
            let mid = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            (x.iter().map(|x| mid + half * x).collect(), w.iter().map(|w| 0.5 * w).collect())
        });
        let mut worst = 0.0f64;
        for a in 0..=top {
            for b in 0..=a {
                let inner: f64 = nodes.iter().zip(&weights).map(|(&u, w)| w * self.factor(a, u) * self.factor(b, u)).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((inner - want).abs());
            }
        }
        worst
    }

    pub fn check_orthonormal(&self) -> Result<()> {
        let err = self.orthonormality_error();
        if err > ORTHONORMAL_TOL {
            return Err(Error::BasisNotOrthonormal(err));
        }
        Ok(())
    }

    fn factor(&self, degree: usize, u: f64) -> f64 {
        if self.measure.kind == MeasureKind::IidUniformBinary {
            // +-1 atoms: u itself has unit second moment
            return u.powi(degree as i32);
        }
        let (lo, hi) = self.measure.support();
        normalized_legendre(degree, (2.0 * u - lo - hi) / (hi - lo))
    }

    /// Value of term `k` given the drive history, `history[d] = u(t - d)`.
    pub fn eval(&self, k: usize, history: &[f64]) -> f64 {
        self.terms[k].iter().zip(history).map(|(&g, &u)| if g == 0 { 1.0 } else { self.factor(g, u) }).product()
    }

    /// Target matrix over the kept steps of `inputs`, one vector per term.
    pub fn targets(&self, inputs: &InputSequence) -> Result<Vec<Vec<f64>>> {
        if inputs.washout < self.max_delay {
            return Err(Error::InvalidParameter(format!(
                "washout {} shorter than max delay {}",
                inputs.washout, self.max_delay
            )));
        }
        let drives = inputs.drives();
        let mut out = vec![Vec::with_capacity(inputs.kept()); self.len()];
        let mut history = vec![0.0; self.max_delay + 1];
        for t in inputs.washout..inputs.len() {
            for (d, h) in history.iter_mut().enumerate() {
                *h = drives[t - d];
            }
            for (k, col) in out.iter_mut().enumerate() {
                col.push(self.eval(k, &history));
            }
        }
        Ok(out)
    }

    pub fn label(&self, k: usize) -> String {
        let parts: Vec<String> = self.terms[k]
            .iter()
            .enumerate()
            .filter(|(_, &g)| g > 0)
            .map(|(d, g)| format!("P{g}(u[t-{d}])"))
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

fn compositions(left: usize, width: usize, cap: usize, cur: &mut Vec<usize>, pos: usize, out: &mut Vec<Vec<usize>>) {
    if pos + 1 == width {
        if left <= cap {
            cur[pos] = left;
            out.push(cur.clone());
        }
        return;
    }
    for g in (0..=left.min(cap)).rev() {
        cur[pos] = g;
        compositions(left - g, width, cap, cur, pos + 1, out);
    }
    cur[pos] = 0;
}
