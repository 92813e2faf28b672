//! ML-KNN: a multi-label k-nearest-neighbor classifier with per-label
//! Bayesian MAP decisions, used to score selected feature subsets.
//!
//! Training estimates, per label, the prior P(H) from label frequencies and
//! the conditionals P(E_m|H), P(E_m|¬H) from the distribution of
//! positive-neighbor counts m among each training instance's k nearest
//! neighbors (the instance itself excluded), all with Laplace smoothing.
//! Prediction counts positive neighbors of the query and decides
//! 1 iff P(H)·P(E_m|H) ≥ P(¬H)·P(E_m|¬H); the ranking score is the
//! posterior P(H|E_m).

use crate::error::{Error, Result};
use crate::linalg::{ensure_finite, Matrix};

pub const DEFAULT_K_NEIGHBORS: usize = 10;
pub const DEFAULT_SMOOTH: f64 = 1.0;

#[derive(Debug, Clone)]
pub struct MlknnModel {
    k_neighbors: usize,
    /// Laplace smoothing strength.
    smooth: f64,
    /// Training instances, features × n_train (instances as columns).
    train_x: Matrix,
    /// Training labels, n_train × k in {0, 1}.
    train_y: Matrix,
    /// P(H_j = 1) per label.
    priors: Vec<f64>,
    /// cond_pos[j][m] = P(E_m | H_j), m = 0..=k_neighbors.
    cond_pos: Vec<Vec<f64>>,
    /// cond_neg[j][m] = P(E_m | ¬H_j).
    cond_neg: Vec<Vec<f64>>,
}

/// Indices of the k nearest columns of `data` to `query`, excluding
/// `exclude`, ties broken by ascending index.
fn k_nearest(data: &Matrix, query: &[f64], exclude: Option<usize>, k: usize) -> Vec<usize> {
    let n = data.ncols();
    let mut order: Vec<(f64, usize)> = (0..n)
        .filter(|&i| Some(i) != exclude)
        .map(|i| {
            let mut d2 = 0.0;
            for (r, &q) in query.iter().enumerate() {
                let diff = data[(r, i)] - q;
                d2 += diff * diff;
            }
            (d2, i)
        })
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    order.truncate(k);
    order.into_iter().map(|(_, i)| i).collect()
}

impl MlknnModel {
    /// Fits priors and neighbor-count conditionals on `x_train`
    /// (features × n, instances as columns) and `y01` (n × k labels).
    pub fn fit(x_train: &Matrix, y01: &Matrix, k_neighbors: usize, smooth: f64) -> Result<Self> {
        let n = x_train.ncols();
        let k_labels = y01.ncols();
        if y01.nrows() != n {
            return Err(Error::ShapeMismatch {
                context: "ML-KNN labels",
                expected: (n, k_labels),
                actual: y01.shape(),
            });
        }
        if n <= k_neighbors {
            return Err(Error::TooFewInstances { n, k_neighbors });
        }
        if !(smooth > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "smooth must be positive, got {smooth}"
            )));
        }
        ensure_finite(x_train, "ML-KNN training features")?;
        for j in 0..k_labels {
            for i in 0..n {
                let v = y01[(i, j)];
                if v != 0.0 && v != 1.0 {
                    return Err(Error::InvalidArgument(format!(
                        "labels must be binary {{0,1}}; found {v} at ({i}, {j})"
                    )));
                }
            }
        }

        // Positive-neighbor counts per training instance and label.
        let mut neighbor_positives = vec![vec![0usize; k_labels]; n];
        for i in 0..n {
            let query: Vec<f64> = x_train.column(i).iter().copied().collect();
            let neighbors = k_nearest(x_train, &query, Some(i), k_neighbors);
            for j in 0..k_labels {
                neighbor_positives[i][j] = neighbors
                    .iter()
                    .filter(|&&nb| y01[(nb, j)] == 1.0)
                    .count();
            }
        }

        let mut priors = Vec::with_capacity(k_labels);
        let mut cond_pos = Vec::with_capacity(k_labels);
        let mut cond_neg = Vec::with_capacity(k_labels);
        for j in 0..k_labels {
            let positives: f64 = y01.column(j).sum();
            priors.push((smooth + positives) / (2.0 * smooth + n as f64));

            let mut count_pos = vec![0usize; k_neighbors + 1];
            let mut count_neg = vec![0usize; k_neighbors + 1];
            for i in 0..n {
                let m = neighbor_positives[i][j];
                if y01[(i, j)] == 1.0 {
                    count_pos[m] += 1;
                } else {
                    count_neg[m] += 1;
                }
            }
            let total_pos: usize = count_pos.iter().sum();
            let total_neg: usize = count_neg.iter().sum();
            let denom_pos = smooth * (k_neighbors + 1) as f64 + total_pos as f64;
            let denom_neg = smooth * (k_neighbors + 1) as f64 + total_neg as f64;
            cond_pos.push(
                count_pos
                    .iter()
                    .map(|&c| (smooth + c as f64) / denom_pos)
                    .collect(),
            );
            cond_neg.push(
                count_neg
                    .iter()
                    .map(|&c| (smooth + c as f64) / denom_neg)
                    .collect(),
            );
        }

        Ok(MlknnModel {
            k_neighbors,
            smooth,
            train_x: x_train.clone(),
            train_y: y01.clone(),
            priors,
            cond_pos,
            cond_neg,
        })
    }

    /// MAP predictions and posterior ranking scores for the columns of
    /// `x_test`.
    pub fn predict(&self, x_test: &Matrix) -> Result<(Matrix, Matrix)> {
        if x_test.nrows() != self.train_x.nrows() {
            return Err(Error::ShapeMismatch {
                context: "ML-KNN test features",
                expected: (self.train_x.nrows(), x_test.ncols()),
                actual: x_test.shape(),
            });
        }
        ensure_finite(x_test, "ML-KNN test features")?;

        let n_test = x_test.ncols();
        let k_labels = self.priors.len();
        let mut y_hat = Matrix::zeros(n_test, k_labels);
        let mut posteriors = Matrix::zeros(n_test, k_labels);

        for t in 0..n_test {
            let query: Vec<f64> = x_test.column(t).iter().copied().collect();
            let neighbors = k_nearest(&self.train_x, &query, None, self.k_neighbors);
            for j in 0..k_labels {
                let m = neighbors
                    .iter()
                    .filter(|&&nb| self.train_labels_positive(nb, j))
                    .count();
                let evidence_pos = self.priors[j] * self.cond_pos[j][m];
                let evidence_neg = (1.0 - self.priors[j]) * self.cond_neg[j][m];
                y_hat[(t, j)] = if evidence_pos >= evidence_neg { 1.0 } else { 0.0 };
                posteriors[(t, j)] = evidence_pos / (evidence_pos + evidence_neg);
            }
        }
        Ok((y_hat, posteriors))
    }

    fn train_labels_positive(&self, instance: usize, label: usize) -> bool {
        self.train_y[(instance, label)] == 1.0
    }

    pub fn k_neighbors(&self) -> usize {
        self.k_neighbors
    }

    pub fn smooth(&self) -> f64 {
        self.smooth
    }

    /// P(H_j = 1) per label.
    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    /// P(E_m | H_j) tables, indexed `[label][m]`.
    pub fn cond_pos(&self) -> &[Vec<f64>] {
        &self.cond_pos
    }

    /// P(E_m | ¬H_j) tables, indexed `[label][m]`.
    pub fn cond_neg(&self) -> &[Vec<f64>] {
        &self.cond_neg
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random_data(rng: &mut ChaCha8Rng, features: usize, n: usize, k: usize) -> (Matrix, Matrix) {
        let mut x = Matrix::zeros(features, n);
        for j in 0..n {
            for i in 0..features {
                x[(i, j)] = rng.sample(StandardNormal);
            }
        }
        let mut y = Matrix::zeros(n, k);
        for j in 0..k {
            for i in 0..n {
                y[(i, j)] = if rng.random_bool(0.5) { 1.0 } else { 0.0 };
            }
        }
        (x, y)
    }

    #[test]
    fn prior_formula_small_cases() {
        // n=4, 2 positives, smooth 1 → (1+2)/(2+4) = 0.5.
        let x = Matrix::from_row_slice(1, 4, &[0.0, 1.0, 2.0, 3.0]);
        let y = Matrix::from_row_slice(4, 1, &[1.0, 1.0, 0.0, 0.0]);
        let model = MlknnModel::fit(&x, &y, 2, 1.0).unwrap();
        assert_abs_diff_eq!(model.priors()[0], 0.5, epsilon = 1e-15);

        // All-positive label, n=10 → 11/12.
        let x = Matrix::from_fn(1, 10, |_, j| j as f64);
        let y = Matrix::from_element(10, 1, 1.0);
        let model = MlknnModel::fit(&x, &y, 3, 1.0).unwrap();
        assert_abs_diff_eq!(model.priors()[0], 11.0 / 12.0, epsilon = 1e-15);
    }

    #[test]
    fn conditional_counts_cover_all_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(60);
        let (x, y) = random_data(&mut rng, 3, 15, 4);
        let model = MlknnModel::fit(&x, &y, 4, 1.0).unwrap();
        // Reconstruct raw counts from the smoothed tables: counts sum to n,
        // denominators are s(k+1) + totals.
        for j in 0..4 {
            let positives: f64 = y.column(j).sum();
            let negatives = 15.0 - positives;
            let denom_pos = 1.0 * 5.0 + positives;
            let denom_neg = 1.0 * 5.0 + negatives;
            let sum_pos: f64 = model.cond_pos()[j]
                .iter()
                .map(|p| p * denom_pos - 1.0)
                .sum();
            let sum_neg: f64 = model.cond_neg()[j]
                .iter()
                .map(|p| p * denom_neg - 1.0)
                .sum();
            assert_abs_diff_eq!(sum_pos + sum_neg, 15.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn probabilities_stay_in_open_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let (x, y) = random_data(&mut rng, 2, 20, 3);
        let model = MlknnModel::fit(&x, &y, 5, 1.0).unwrap();
        for j in 0..3 {
            assert!(model.priors()[j] > 0.0 && model.priors()[j] < 1.0);
            for m in 0..=5 {
                assert!(model.cond_pos()[j][m] > 0.0 && model.cond_pos()[j][m] < 1.0);
                assert!(model.cond_neg()[j][m] > 0.0 && model.cond_neg()[j][m] < 1.0);
            }
        }
        let (_, posteriors) = model.predict(&x).unwrap();
        for j in 0..3 {
            for i in 0..20 {
                assert!((0.0..=1.0).contains(&posteriors[(i, j)]));
            }
        }
    }

    #[test]
    fn dominant_cluster_predicts_positive() {
        // A tight all-positive cluster and a far all-negative one.
        let x = Matrix::from_row_slice(
            1,
            12,
            &[0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 50.0, 50.1, 50.2, 50.3, 50.4, 50.5],
        );
        let mut y = Matrix::zeros(12, 1);
        for i in 0..6 {
            y[(i, 0)] = 1.0;
        }
        let model = MlknnModel::fit(&x, &y, 3, 1.0).unwrap();
        let test = Matrix::from_row_slice(1, 2, &[0.25, 50.25]);
        let (y_hat, posteriors) = model.predict(&test).unwrap();
        assert_eq!(y_hat[(0, 0)], 1.0);
        assert_eq!(y_hat[(1, 0)], 0.0);
        assert!(posteriors[(0, 0)] > 0.5);
        assert!(posteriors[(1, 0)] < 0.5);
    }

    #[test]
    fn uninformative_evidence_follows_prior() {
        // Two tight clusters, one all-positive, one all-negative, balanced
        // classes. Within-cluster neighbor counts are m = 2 (positives) and
        // m = 0 (negatives); m = 1 is never observed, so both conditionals
        // sit at the smoothing floor with equal denominators. A midpoint
        // query sees m = 1, its posterior equals the prior exactly, and the
        // tie resolves positive by the ≥ rule.
        let x = Matrix::from_row_slice(1, 6, &[0.0, 1.0, 2.0, 10.0, 11.0, 12.0]);
        let y = Matrix::from_row_slice(6, 1, &[1.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
        let model = MlknnModel::fit(&x, &y, 2, 1.0).unwrap();
        assert_eq!(model.cond_pos()[0][1], model.cond_neg()[0][1]);

        let test = Matrix::from_row_slice(1, 1, &[6.0]);
        let (y_hat, posteriors) = model.predict(&test).unwrap();
        assert_abs_diff_eq!(posteriors[(0, 0)], model.priors()[0], epsilon = 1e-15);
        assert_eq!(y_hat[(0, 0)], 1.0);
    }

    #[test]
    fn predictions_ignore_feature_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        let (x, y) = random_data(&mut rng, 4, 15, 3);
        let (x_test, _) = random_data(&mut rng, 4, 5, 3);
        let perm = [2usize, 0, 3, 1];
        let permute = |m: &Matrix| {
            let mut out = m.clone();
            for (dst, &src) in perm.iter().enumerate() {
                out.set_row(dst, &m.row(src));
            }
            out
        };
        let model = MlknnModel::fit(&x, &y, 4, 1.0).unwrap();
        let model_p = MlknnModel::fit(&permute(&x), &y, 4, 1.0).unwrap();
        let (y1, s1) = model.predict(&x_test).unwrap();
        let (y2, s2) = model_p.predict(&permute(&x_test)).unwrap();
        assert_eq!(y1, y2);
        assert!((s1 - s2).amax() <= 1e-12);
    }

    #[test]
    fn rejects_too_few_instances() {
        let x = Matrix::from_row_slice(1, 5, &[0.0, 1.0, 2.0, 3.0, 4.0]);
        let y = Matrix::from_element(5, 1, 1.0);
        assert!(matches!(
            MlknnModel::fit(&x, &y, 5, 1.0),
            Err(Error::TooFewInstances { n: 5, k_neighbors: 5 })
        ));
    }
}
