//! Detection-to-ground-truth matching and the MODA / MODP / precision /
//! recall scores.
//!
//! Pairs farther apart than the distance threshold `t` can never match.
//! Optimal matching first maximizes the number of matched pairs and then
//! minimizes their summed distance; greedy matching repeatedly takes the
//! closest remaining pair.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::detect::Detection;
use crate::error::{Error, Result};

/// Default true-positive distance threshold, meters.
pub const DEFAULT_MATCH_DISTANCE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Matching {
    Optimal,
    Greedy,
}

impl Matching {
    pub fn as_str(&self) -> &'static str {
        match self {
            Matching::Optimal => "optimal",
            Matching::Greedy => "greedy",
        }
    }
}

impl FromStr for Matching {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "optimal" => Ok(Matching::Optimal),
            "greedy" => Ok(Matching::Greedy),
            other => Err(Error::UnknownMode(other.to_string())),
        }
    }
}

impl fmt::Display for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub det: usize,
    pub gt: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub pairs: Vec<MatchedPair>,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub n_gt: usize,
}

impl MatchResult {
    pub fn from_pairs(pairs: Vec<MatchedPair>, n_det: usize, n_gt: usize) -> Self {
        let tp = pairs.len();
        Self {
            pairs,
            tp,
            fp: n_det - tp,
            fn_: n_gt - tp,
            n_gt,
        }
    }

    /// Counts without pairs, e.g. for hand-built metric checks.
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        Self {
            pairs: Vec::new(),
            tp,
            fp,
            fn_,
            n_gt: tp + fn_,
        }
    }

    pub fn total_distance(&self) -> f64 {
        self.pairs.iter().map(|p| p.distance).sum()
    }

    /// Accumulates another frame's result; pair indices stay frame-local.
    pub fn merge(&mut self, other: MatchResult) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
        self.n_gt += other.n_gt;
        self.pairs.extend(other.pairs);
    }
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

pub fn match_detections(
    dets: &[Detection],
    gts: &[[f64; 2]],
    t: f64,
    matching: Matching,
) -> Result<MatchResult> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::Config(format!(
            "match distance must be > 0, got {t}"
        )));
    }
    let positions: Vec<[f64; 2]> = dets.iter().map(|d| d.position).collect();
    let pairs = match matching {
        Matching::Optimal => optimal_pairs(&positions, gts, t),
        Matching::Greedy => greedy_pairs(&positions, gts, t),
    };
    Ok(MatchResult::from_pairs(pairs, dets.len(), gts.len()))
}

fn greedy_pairs(dets: &[[f64; 2]], gts: &[[f64; 2]], t: f64) -> Vec<MatchedPair> {
    let mut candidates: Vec<MatchedPair> = dets
        .iter()
        .enumerate()
        .flat_map(|(i, &d)| {
            gts.iter().enumerate().filter_map(move |(j, &g)| {
                let distance = distance(d, g);
                (distance < t).then_some(MatchedPair {
                    det: i,
                    gt: j,
                    distance,
                })
            })
        })
        .collect();
    candidates.sort_by(|a, b| {
        a.distance
            .total_cmp(&b.distance)
            .then((a.det, a.gt).cmp(&(b.det, b.gt)))
    });
    let mut used_det = vec![false; dets.len()];
    let mut used_gt = vec![false; gts.len()];
    let mut pairs = Vec::new();
    for c in candidates {
        if !used_det[c.det] && !used_gt[c.gt] {
            used_det[c.det] = true;
            used_gt[c.gt] = true;
            pairs.push(c);
        }
    }
    pairs.sort_by_key(|p| p.det);
    pairs
}

fn optimal_pairs(dets: &[[f64; 2]], gts: &[[f64; 2]], t: f64) -> Vec<MatchedPair> {
    let n = dets.len().max(gts.len());
    if dets.is_empty() || gts.is_empty() {
        return Vec::new();
    }
    // Every forbidden or dummy slot costs more than any full set of real
    // matches, so the solver maximizes the match count first.
    let forbidden = t * (n as f64 + 1.0);
    let mut cost = vec![vec![forbidden; n]; n];
    for (i, &d) in dets.iter().enumerate() {
        for (j, &g) in gts.iter().enumerate() {
            let dist = distance(d, g);
            if dist < t {
                cost[i][j] = dist;
            }
        }
    }
    let assignment = hungarian(&cost);
    assignment
        .into_iter()
        .enumerate()
        .filter_map(|(i, j)| {
            if i >= dets.len() || j >= gts.len() {
                return None;
            }
            let distance = distance(dets[i], gts[j]);
            (distance < t).then_some(MatchedPair {
                det: i,
                gt: j,
                distance,
            })
        })
        .collect()
}

/// Minimum-cost perfect assignment on a square cost matrix (shortest
/// augmenting paths with row/column potentials, O(n^3)). Returns the column
/// assigned to each row.
pub fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    assert!(
        cost.iter().all(|row| row.len() == n),
        "cost matrix must be square"
    );
    // 1-based internally; index 0 is the virtual root column.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col_of_row = vec![0usize; n];
    for j in 1..=n {
        if row_of[j] > 0 {
            col_of_row[row_of[j] - 1] = j - 1;
        }
    }
    col_of_row
}

/// `1 - (FP + FN) / N`.
pub fn moda(m: &MatchResult) -> Result<f64> {
    if m.n_gt == 0 {
        return Err(Error::NoGroundTruth);
    }
    Ok(1.0 - (m.fp + m.fn_) as f64 / m.n_gt as f64)
}

/// Mean of `1 - d / t` over matched pairs; 0 when nothing matched.
pub fn modp(m: &MatchResult, t: f64) -> f64 {
    if m.tp == 0 {
        return 0.0;
    }
    m.pairs.iter().map(|p| 1.0 - p.distance / t).sum::<f64>() / m.tp as f64
}

/// Precision, defined as 1 when there are no detections.
pub fn precision(m: &MatchResult) -> f64 {
    if m.tp + m.fp == 0 {
        1.0
    } else {
        m.tp as f64 / (m.tp + m.fp) as f64
    }
}

pub fn recall(m: &MatchResult) -> Result<f64> {
    if m.n_gt == 0 {
        return Err(Error::NoGroundTruth);
    }
    Ok(m.tp as f64 / m.n_gt as f64)
}

pub fn precision_recall(m: &MatchResult) -> Result<(f64, f64)> {
    Ok((precision(m), recall(m)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub moda: f64,
    pub modp: f64,
    pub precision: f64,
    pub recall: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub n_gt: usize,
}

impl EvalReport {
    pub fn from_match(m: &MatchResult, t: f64) -> Result<Self> {
        let (precision, recall) = precision_recall(m)?;
        Ok(Self {
            moda: moda(m)?,
            modp: modp(m, t),
            precision,
            recall,
            tp: m.tp,
            fp: m.fp,
            fn_: m.fn_,
            n_gt: m.n_gt,
        })
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<10} {:>8}", "metric", "value")?;
        writeln!(f, "{:<10} {:>8.4}", "MODA", self.moda)?;
        writeln!(f, "{:<10} {:>8.4}", "MODP", self.modp)?;
        writeln!(f, "{:<10} {:>8.4}", "precision", self.precision)?;
        writeln!(f, "{:<10} {:>8.4}", "recall", self.recall)?;
        writeln!(f, "{:<10} {:>8}", "TP", self.tp)?;
        writeln!(f, "{:<10} {:>8}", "FP", self.fp)?;
        writeln!(f, "{:<10} {:>8}", "FN", self.fn_)?;
        write!(f, "{:<10} {:>8}", "N_gt", self.n_gt)
    }
}
