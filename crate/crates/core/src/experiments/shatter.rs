use serde::{Deserialize, Serialize};

use super::SwitchingFamily;
use crate::{Error, Result};

pub const DEFAULT_NODE_BUDGET: u64 = 50_000_000;
const MAX_INSTANCES: usize = 20;
const MAX_FUNCTIONS: usize = 1 << 16;

/// Per-instance thresholds: searched over value midpoints, or fixed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Thresholds {
    Search,
    Pinned(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShatterWitness {
    pub instances: Vec<usize>,
    pub thresholds: Vec<f64>,
    /// `functions[pattern]` realizes the dichotomy whose bit `j` says
    /// instance `instances[j]` sits above its threshold.
    pub functions: Vec<usize>,
    pub gamma: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShatterResult {
    pub d: usize,
    pub witness: ShatterWitness,
    pub nodes: u64,
    pub verified: bool,
}

/// Independent check that every dichotomy of the witness is realized with
/// margin `gamma`.
pub fn verify_witness(values: &[Vec<f64>], w: &ShatterWitness) -> bool {
    let d = w.instances.len();
    if w.thresholds.len() != d || w.functions.len() != 1 << d {
        return false;
    }
    w.functions.iter().enumerate().all(|(pattern, &f)| {
        f < values.len()
            && w.instances.iter().zip(&w.thresholds).enumerate().all(|(j, (&x, &t))| {
                let v = values[f][x];
                if pattern >> j & 1 == 1 {
                    v >= t + w.gamma
                } else {
                    v <= t - w.gamma
                }
            })
    })
}

struct Search<'a> {
    values: &'a [Vec<f64>],
    gamma: f64,
    candidates: Vec<Vec<f64>>,
    budget: u64,
    nodes: u64,
}

impl Search<'_> {
    /// Extends the chosen instances in increasing order; `codes[f]` is the
    /// pattern of function `f` so far, or `None` once it fell in a margin.
    fn extend(&mut self, target: usize, chosen: &mut Vec<(usize, f64)>, codes: &[Option<usize>]) -> Result<Option<Vec<usize>>> {
        let depth = chosen.len();
        if depth == target {
            let mut reps = vec![usize::MAX; 1 << depth];
            for (f, c) in codes.iter().enumerate() {
                if let Some(c) = c {
                    if reps[*c] == usize::MAX {
                        reps[*c] = f;
                    }
                }
            }
            return Ok(reps.iter().all(|&f| f != usize::MAX).then_some(reps));
        }
        let start = chosen.last().map_or(0, |(x, _)| x + 1);
        let instances = self.values[0].len();
        // leave room for the remaining picks
        for x in start..=instances - (target - depth) {
            for ci in 0..self.candidates[x].len() {
                let t = self.candidates[x][ci];
                self.nodes += 1;
                if self.nodes > self.budget {
                    return Err(Error::SearchBudgetExceeded(self.budget));
                }
                let next: Vec<Option<usize>> = codes
                    .iter()
                    .enumerate()
                    .map(|(f, c)| {
                        let v = self.values[f][x];
                        match c {
                            Some(c) if v >= t + self.gamma => Some(c | 1 << depth),
                            Some(c) if v <= t - self.gamma => Some(*c),
                            _ => None,
                        }
                    })
                    .collect();
                let mut seen = vec![false; 1 << (depth + 1)];
                let distinct = next.iter().flatten().filter(|c| !std::mem::replace(&mut seen[**c], true)).count();
                if distinct < 1 << (depth + 1) {
                    continue;
                }
                chosen.push((x, t));
                if let Some(found) = self.extend(target, chosen, &next)? {
                    return Ok(Some(found));
                }
                chosen.pop();
            }
        }
        Ok(None)
    }
}

/// Largest `d` such that some `d` instances are `gamma`-shattered by the
/// rows of `values` (functions x instances), with its first witness in
/// lexicographic order of instances and thresholds.
///
/// Searched thresholds are midpoints of value pairs at least `2 gamma`
/// apart, which contains every threshold that can separate a pair.
pub fn fat_shattering_lower_bound(values: &[Vec<f64>], gamma: f64, thresholds: &Thresholds, budget: u64) -> Result<ShatterResult> {
    let functions = values.len();
    let instances = values.first().map_or(0, Vec::len);
    if functions == 0 || functions > MAX_FUNCTIONS || instances > MAX_INSTANCES {
        return Err(Error::InvalidParameter(format!("{functions} functions x {instances} instances outside the exhaustive-search limits")));
    }
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("margin {gamma} must be positive")));
    }
    if values.iter().any(|r| r.len() != instances || r.iter().any(|v| !(0.0..=1.0).contains(v))) {
        return Err(Error::InvalidParameter("values must form a matrix with entries in [0, 1]".into()));
    }
    let candidates: Vec<Vec<f64>> = match thresholds {
        Thresholds::Pinned(t) if t.len() != instances => {
            return Err(Error::DimensionMismatch(format!("{} thresholds for {instances} instances", t.len())));
        }
        Thresholds::Pinned(t) => t.iter().map(|v| vec![*v]).collect(),
        Thresholds::Search => (0..instances)
            .map(|x| {
                let mut col: Vec<f64> = values.iter().map(|r| r[x]).collect();
                col.sort_by(f64::total_cmp);
                col.dedup();
                let mut mids = Vec::new();
                for i in 0..col.len() {
                    for j in i + 1..col.len() {
                        if col[j] - col[i] >= 2.0 * gamma {
                            mids.push(0.5 * (col[i] + col[j]));
                        }
                    }
                }
                mids.sort_by(f64::total_cmp);
                mids.dedup();
                mids
            })
            .collect(),
    };
    let mut search = Search { values, gamma, candidates, budget, nodes: 0 };
    let upper = instances.min(functions.ilog2() as usize);
    for d in (1..=upper).rev() {
        let mut chosen = Vec::new();
        if let Some(functions) = search.extend(d, &mut chosen, &vec![Some(0); values.len()])? {
            let (inst, thr) = chosen.into_iter().unzip();
            let witness = ShatterWitness { instances: inst, thresholds: thr, functions, gamma };
            return finish(values, d, witness, search.nodes);
        }
    }
    let witness = ShatterWitness { instances: vec![], thresholds: vec![], functions: vec![0], gamma };
    finish(values, 0, witness, search.nodes)
}

fn finish(values: &[Vec<f64>], d: usize, witness: ShatterWitness, nodes: u64) -> Result<ShatterResult> {
    if !verify_witness(values, &witness) {
        return Err(Error::InvalidState(format!("witness for d={d} failed re-verification")));
    }
    Ok(ShatterResult { d, witness, nodes, verified: true })
}

/// Function class of all subset sums of the family's signals, evaluated at
/// the signal centers: row `mask` is `sum_{i in mask} s_i(c_x)`.
pub fn switching_subset_class(family: &SwitchingFamily) -> Vec<Vec<f64>> {
    let at: Vec<Vec<f64>> = family.centers.iter().map(|&c| family.eval(c)).collect();
    (0..1usize << family.k)
        .map(|mask| {
            at.iter()
                .map(|vals| vals.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, v)| v).sum::<f64>().min(1.0))
                .collect()
        })
        .collect()
}
