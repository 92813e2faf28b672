//! Global feature-redundancy matrix A and global label-relevance penalty R.
//!
//! A_ij is the squared cosine similarity of the mean-centered features i and
//! j (squared Pearson correlation), so A is symmetric, entrywise in [0, 1]
//! and positive semi-definite (Hadamard square of a PSD correlation matrix).
//!
//! Z_ij is the cosine similarity between label columns in the {0, 1}
//! encoding, so the inner product counts label co-occurrence; R = 1 − Z
//! penalizes assigning similar coefficient columns to unrelated labels.

use crate::error::{Error, Result, Warning};
use crate::linalg::{centering_apply, Matrix, SymEig};

/// Threshold on a centered feature's norm (relative to the raw feature's
/// magnitude) below which it is treated as constant.
const CONSTANT_TOL: f64 = 1e-12;

/// Eigenvalue floor under which R is projected back onto the PSD cone.
const PSD_TOL: f64 = -1e-8;

/// Pairwise squared Pearson correlation between features.
#[derive(Debug, Clone)]
pub struct RedundancyMatrix {
    /// d×d, symmetric, entries in [0, 1]; A_ii = 1 for non-constant features.
    pub a: Matrix,
    /// Indices of features with zero centered norm (zeroed rows in A).
    pub constant_features: Vec<usize>,
    pub warnings: Vec<Warning>,
}

/// Cosine label similarity Z and its complement penalty R = 1 − Z.
#[derive(Debug, Clone)]
pub struct LabelRelevance {
    /// k×k cosine similarities over {0,1} label columns.
    pub z: Matrix,
    /// k×k penalty, R_ij = 1 − Z_ij, zero diagonal.
    pub r: Matrix,
    /// R projected onto the PSD cone (equal to `r` when already PSD); this
    /// is the matrix the coefficient subproblem solves against.
    pub r_psd: Matrix,
    /// Whether the PSD projection actually changed R.
    pub repaired: bool,
    pub warnings: Vec<Warning>,
}

/// Builds A from the feature matrix X (d×n, features as rows).
pub fn build_redundancy(x: &Matrix) -> Result<RedundancyMatrix> {
    let (d, n) = x.shape();
    if d < 1 || n < 2 {
        return Err(Error::InvalidArgument(format!(
            "redundancy needs d >= 1 and n >= 2, got d={d}, n={n}"
        )));
    }

    let centered = centering_apply(x); // n×d, column i = centered feature i
    let mut norms = vec![0.0f64; d];
    let mut constant_features = Vec::new();
    for i in 0..d {
        norms[i] = centered.column(i).norm();
        if norms[i] <= CONSTANT_TOL * (1.0 + x.row(i).norm()) {
            constant_features.push(i);
        }
    }

    let mut a = Matrix::zeros(d, d);
    for i in 0..d {
        if constant_features.binary_search(&i).is_ok() {
            continue;
        }
        a[(i, i)] = 1.0;
        for j in (i + 1)..d {
            if constant_features.binary_search(&j).is_ok() {
                continue;
            }
            let cos = centered.column(i).dot(&centered.column(j)) / (norms[i] * norms[j]);
            let val = (cos * cos).clamp(0.0, 1.0);
            a[(i, j)] = val;
            a[(j, i)] = val;
        }
    }

    let warnings = constant_features
        .iter()
        .map(|&feature| Warning::ConstantFeature { feature })
        .collect();

    Ok(RedundancyMatrix {
        a,
        constant_features,
        warnings,
    })
}

/// Builds Z and R from the {0,1} label matrix Y (n×k, instances as rows).
pub fn build_label_relevance(y01: &Matrix) -> Result<LabelRelevance> {
    let (n, k) = y01.shape();
    if k < 2 || n < 1 {
        return Err(Error::InvalidArgument(format!(
            "label relevance needs k >= 2 labels, got n={n}, k={k}"
        )));
    }

    let mut norms = vec![0.0f64; k];
    let mut empty = Vec::new();
    for j in 0..k {
        norms[j] = y01.column(j).norm();
        if norms[j] == 0.0 {
            empty.push(j);
        }
    }

    let mut z = Matrix::zeros(k, k);
    for i in 0..k {
        z[(i, i)] = 1.0;
        if empty.binary_search(&i).is_ok() {
            continue;
        }
        for j in (i + 1)..k {
            if empty.binary_search(&j).is_ok() {
                continue;
            }
            let cos = (y01.column(i).dot(&y01.column(j)) / (norms[i] * norms[j])).clamp(0.0, 1.0);
            z[(i, j)] = cos;
            z[(j, i)] = cos;
        }
    }

    let mut r = Matrix::from_element(k, k, 1.0) - &z;
    // Keep the exact-zero diagonal against roundoff.
    for i in 0..k {
        r[(i, i)] = 0.0;
    }

    let eig = SymEig::new(&r);
    let (r_psd, repaired) = if eig.values[0] < PSD_TOL {
        let clipped = Matrix::from_diagonal(&eig.values.map(|v| v.max(0.0)));
        let projected = &eig.vectors * clipped * eig.vectors.transpose();
        // Symmetrize the reconstruction.
        ((&projected + projected.transpose()) * 0.5, true)
    } else {
        (r.clone(), false)
    };

    let warnings = empty
        .iter()
        .map(|&label| Warning::EmptyLabel { label })
        .collect();

    Ok(LabelRelevance {
        z,
        r,
        r_psd,
        repaired,
        warnings,
    })
}
