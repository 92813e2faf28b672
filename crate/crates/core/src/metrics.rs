//! Multi-label evaluation metrics, the ACR parameter-selection score and
//! Friedman/Nemenyi comparison statistics.
//!
//! Label ranks are always taken per instance by descending score with ties
//! broken by ascending label index (rank 1 = highest score). Instances that
//! do not satisfy a ranking metric's precondition (no true label for
//! coverage/average precision, no true or no false label for ranking loss)
//! are excluded from the mean and counted in the returned skip tally rather
//! than silently imputed.

use serde::{Deserialize, Serialize};

use crate::correlation::RedundancyMatrix;
use crate::error::{Error, Result};
use crate::linalg::{ensure_finite, Matrix};

/// Ground truth, thresholded predictions and ranking scores for a test set.
#[derive(Debug, Clone)]
pub struct PredictionSet {
    /// n×k in {0, 1}.
    pub y_true: Matrix,
    /// n×k in {0, 1}.
    pub y_pred: Matrix,
    /// n×k real-valued relevance scores, higher = more relevant.
    pub scores: Matrix,
}

impl PredictionSet {
    pub fn new(y_true: Matrix, y_pred: Matrix, scores: Matrix) -> Result<Self> {
        if y_pred.shape() != y_true.shape() {
            return Err(Error::ShapeMismatch {
                context: "prediction set",
                expected: y_true.shape(),
                actual: y_pred.shape(),
            });
        }
        if scores.shape() != y_true.shape() {
            return Err(Error::ShapeMismatch {
                context: "prediction scores",
                expected: y_true.shape(),
                actual: scores.shape(),
            });
        }
        for (name, m) in [("y_true", &y_true), ("y_pred", &y_pred)] {
            for j in 0..m.ncols() {
                for i in 0..m.nrows() {
                    let v = m[(i, j)];
                    if v != 0.0 && v != 1.0 {
                        return Err(Error::InvalidArgument(format!(
                            "{name} must be binary {{0,1}}; found {v} at ({i}, {j})"
                        )));
                    }
                }
            }
        }
        ensure_finite(&scores, "prediction scores")?;
        Ok(PredictionSet {
            y_true,
            y_pred,
            scores,
        })
    }

    fn dims(&self) -> (usize, usize) {
        self.y_true.shape()
    }

    /// Label indices of instance `i` ranked by descending score, ties by
    /// ascending label index.
    fn ranked_labels(&self, i: usize) -> Vec<usize> {
        let k = self.y_true.ncols();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| {
            self.scores[(i, b)]
                .total_cmp(&self.scores[(i, a)])
                .then(a.cmp(&b))
        });
        order
    }

    /// rank[l] ∈ 1..=k of each label for instance `i`.
    fn ranks(&self, i: usize) -> Vec<usize> {
        let order = self.ranked_labels(i);
        let mut ranks = vec![0usize; order.len()];
        for (pos, &label) in order.iter().enumerate() {
            ranks[label] = pos + 1;
        }
        ranks
    }
}

/// A ranking-based metric value plus the number of instances excluded for
/// failing the metric's precondition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedMetric {
    pub value: f64,
    pub skipped: usize,
}

/// Fraction of mislabeled label slots, averaged over instances.
pub fn hamming_loss(p: &PredictionSet) -> f64 {
    let (n, k) = p.dims();
    let mut wrong = 0usize;
    for j in 0..k {
        for i in 0..n {
            if p.y_true[(i, j)] != p.y_pred[(i, j)] {
                wrong += 1;
            }
        }
    }
    wrong as f64 / (n * k) as f64
}

/// Normalized number of ranking steps needed to reach every true label:
/// (1/k)·(mean over instances of (max rank of a true label − 1)).
pub fn coverage(p: &PredictionSet) -> RankedMetric {
    let (n, k) = p.dims();
    let mut total = 0.0;
    let mut used = 0usize;
    for i in 0..n {
        let ranks = p.ranks(i);
        let max_rank = (0..k)
            .filter(|&l| p.y_true[(i, l)] == 1.0)
            .map(|l| ranks[l])
            .max();
        match max_rank {
            Some(r) => {
                total += (r - 1) as f64;
                used += 1;
            }
            None => {}
        }
    }
    let value = if used > 0 {
        total / used as f64 / k as f64
    } else {
        0.0
    };
    RankedMetric {
        value,
        skipped: n - used,
    }
}

/// Mean over instances and their true labels of the precision at each true
/// label's rank.
pub fn average_precision(p: &PredictionSet) -> RankedMetric {
    let (n, k) = p.dims();
    let mut total = 0.0;
    let mut used = 0usize;
    for i in 0..n {
        let true_labels: Vec<usize> = (0..k).filter(|&l| p.y_true[(i, l)] == 1.0).collect();
        if true_labels.is_empty() {
            continue;
        }
        let ranks = p.ranks(i);
        let mut instance_score = 0.0;
        for &l in &true_labels {
            let above = true_labels.iter().filter(|&&m| ranks[m] <= ranks[l]).count();
            instance_score += above as f64 / ranks[l] as f64;
        }
        total += instance_score / true_labels.len() as f64;
        used += 1;
    }
    let value = if used > 0 { total / used as f64 } else { 0.0 };
    RankedMetric {
        value,
        skipped: n - used,
    }
}

/// Mean fraction of (true, false) label pairs ranked in the wrong order,
/// ties counting one half.
pub fn ranking_loss(p: &PredictionSet) -> RankedMetric {
    let (n, k) = p.dims();
    let mut total = 0.0;
    let mut used = 0usize;
    for i in 0..n {
        let true_labels: Vec<usize> = (0..k).filter(|&l| p.y_true[(i, l)] == 1.0).collect();
        let false_labels: Vec<usize> = (0..k).filter(|&l| p.y_true[(i, l)] == 0.0).collect();
        if true_labels.is_empty() || false_labels.is_empty() {
            continue;
        }
        let mut bad = 0.0;
        for &t in &true_labels {
            for &f in &false_labels {
                let st = p.scores[(i, t)];
                let sf = p.scores[(i, f)];
                if st < sf {
                    bad += 1.0;
                } else if st == sf {
                    bad += 0.5;
                }
            }
        }
        total += bad / (true_labels.len() * false_labels.len()) as f64;
        used += 1;
    }
    let value = if used > 0 { total / used as f64 } else { 0.0 };
    RankedMetric {
        value,
        skipped: n - used,
    }
}

/// Macro-F1 value and the count of labels with an all-zero denominator
/// (no true and no predicted positives), which contribute 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacroF1 {
    pub value: f64,
    pub zero_denominator_labels: usize,
}

/// Mean over labels of 2·TP / (Σy + Σh).
pub fn macro_f1(p: &PredictionSet) -> MacroF1 {
    let (n, k) = p.dims();
    let mut total = 0.0;
    let mut zero_denominator_labels = 0usize;
    for j in 0..k {
        let mut tp = 0.0;
        let mut denom = 0.0;
        for i in 0..n {
            tp += p.y_true[(i, j)] * p.y_pred[(i, j)];
            denom += p.y_true[(i, j)] + p.y_pred[(i, j)];
        }
        if denom == 0.0 {
            zero_denominator_labels += 1;
        } else {
            total += 2.0 * tp / denom;
        }
    }
    MacroF1 {
        value: total / k as f64,
        zero_denominator_labels,
    }
}

/// Pooled F1 over all instance-label slots: 2·ΣTP / (Σ|y| + Σ|h|).
pub fn micro_f1(p: &PredictionSet) -> f64 {
    let (n, k) = p.dims();
    let mut tp = 0.0;
    let mut denom = 0.0;
    for j in 0..k {
        for i in 0..n {
            tp += p.y_true[(i, j)] * p.y_pred[(i, j)];
            denom += p.y_true[(i, j)] + p.y_pred[(i, j)];
        }
    }
    if denom == 0.0 {
        0.0
    } else {
        2.0 * tp / denom
    }
}

/// Mean pairwise redundancy within a selected feature subset:
/// (1/(m(m−1)))·Σ_{i≠j} A_ij over ordered pairs.
pub fn redundancy_score(selected: &[usize], a: &RedundancyMatrix) -> Result<f64> {
    let m = selected.len();
    if m < 2 {
        return Err(Error::SubsetTooSmall(m));
    }
    for &i in selected {
        if i >= a.a.nrows() {
            return Err(Error::InvalidArgument(format!(
                "selected feature {i} out of range for {}-feature redundancy matrix",
                a.a.nrows()
            )));
        }
    }
    let mut total = 0.0;
    for &i in selected {
        for &j in selected {
            if i != j {
                total += a.a[(i, j)];
            }
        }
    }
    Ok(total / (m * (m - 1)) as f64)
}

/// Average classification result: Σ over the sweep of (HL_i + RL_i),
/// smaller is better. `expected` pins the number of pairs (30 in the
/// reference protocol).
pub fn acr(pairs: &[(f64, f64)], expected: usize) -> Result<f64> {
    if pairs.len() != expected {
        return Err(Error::WrongLength {
            expected,
            actual: pairs.len(),
        });
    }
    Ok(pairs.iter().map(|(hl, rl)| hl + rl).sum())
}

/// Nemenyi critical difference CD = q_α·√(nc(nc+1)/(6·nd)).
pub fn nemenyi_cd(nc: usize, nd: usize, q_alpha: f64) -> f64 {
    assert!(nc >= 2 && nd >= 1, "need at least 2 methods and 1 dataset");
    q_alpha * ((nc * (nc + 1)) as f64 / (6.0 * nd as f64)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FriedmanStat {
    pub chi_sq: f64,
    pub f_f: f64,
}

/// Friedman χ²_F and the Iman-Davenport F_F over an nd×nc table of ranks
/// (rows = datasets, columns = methods; ties as average ranks).
pub fn friedman_stat(rank_table: &Matrix) -> Result<FriedmanStat> {
    let (nd, nc) = rank_table.shape();
    if nd < 1 || nc < 2 {
        return Err(Error::InvalidArgument(format!(
            "rank table needs at least 1 dataset and 2 methods, got {nd}x{nc}"
        )));
    }
    let expected_row_sum = (nc * (nc + 1)) as f64 / 2.0;
    for i in 0..nd {
        let sum: f64 = rank_table.row(i).sum();
        if (sum - expected_row_sum).abs() > 1e-6 {
            return Err(Error::InvalidArgument(format!(
                "rank table row {i} sums to {sum}, expected {expected_row_sum}"
            )));
        }
    }

    let mut sum_sq = 0.0;
    for j in 0..nc {
        let mean_rank = rank_table.column(j).sum() / nd as f64;
        sum_sq += mean_rank * mean_rank;
    }
    let nc_f = nc as f64;
    let nd_f = nd as f64;
    let chi_sq =
        12.0 * nd_f / (nc_f * (nc_f + 1.0)) * (sum_sq - nc_f * (nc_f + 1.0) * (nc_f + 1.0) / 4.0);
    let denom = nd_f * (nc_f - 1.0) - chi_sq;
    if denom.abs() < 1e-12 {
        return Err(Error::DegenerateRanks);
    }
    let f_f = (nd_f - 1.0) * chi_sq / denom;
    Ok(FriedmanStat { chi_sq, f_f })
}

/// Converts raw metric values for one dataset into competition ranks
/// (1 = best), averaging over ties. `smaller_better` selects the direction.
pub fn average_ranks(values: &[f64], smaller_better: bool) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        if smaller_better {
            values[a].total_cmp(&values[b])
        } else {
            values[b].total_cmp(&values[a])
        }
    });
    let mut ranks = vec![0.0; n];
    let mut pos = 0usize;
    while pos < n {
        let mut end = pos;
        while end + 1 < n && values[order[end + 1]] == values[order[pos]] {
            end += 1;
        }
        // Average of ranks pos+1 ..= end+1.
        let avg = (pos + 1 + end + 1) as f64 / 2.0;
        for &idx in &order[pos..=end] {
            ranks[idx] = avg;
        }
        pos = end + 1;
    }
    ranks
}
