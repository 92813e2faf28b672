//! Instance affinity graph and graph Laplacian for the manifold
//! regularization term tr(VᵀLV).
//!
//! Affinities follow a heat kernel over Euclidean distances between instance
//! columns, gated by a k-nearest-neighbor condition with OR-symmetrization:
//! S_ij = exp(−‖x_.i − x_.j‖²/σ²) when i is among j's top-p neighbors or
//! vice versa, 0 otherwise.

use crate::error::{Error, Result, Warning};
use crate::linalg::Matrix;

/// Symmetric nonnegative affinity graph over instances.
#[derive(Debug, Clone)]
pub struct AffinityGraph {
    /// n×n affinity matrix, entries in [0, 1], zero diagonal.
    pub s: Matrix,
    pub neighbor_count: usize,
    pub sigma_sq: f64,
    pub warnings: Vec<Warning>,
}

/// Graph Laplacian L = G − S with G the diagonal degree matrix.
#[derive(Debug, Clone)]
pub struct Laplacian {
    pub l: Matrix,
    /// Diagonal of G, G_ii = Σ_j S_ij.
    pub degree: Vec<f64>,
}

/// Builds the heat-kernel kNN affinity graph over the instance columns of
/// X (d×n). Neighbor ties are broken by lower index; exact duplicate
/// instances raise a `DegenerateInstances` warning since they make neighbor
/// sets ambiguous.
pub fn build_affinity(x: &Matrix, neighbor_count: usize, sigma_sq: f64) -> Result<AffinityGraph> {
    let n = x.ncols();
    if !(1..n).contains(&neighbor_count) {
        return Err(Error::InvalidArgument(format!(
            "neighbor_count must be in [1, {}), got {neighbor_count}",
            n
        )));
    }
    if !(sigma_sq > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sigma_sq must be positive, got {sigma_sq}"
        )));
    }

    // Pairwise squared Euclidean distances over instance columns.
    let mut dist_sq = Matrix::zeros(n, n);
    let mut duplicate_pairs = 0usize;
    for i in 0..n {
        for j in (i + 1)..n {
            let diff = x.column(i) - x.column(j);
            let d2 = diff.norm_squared();
            dist_sq[(i, j)] = d2;
            dist_sq[(j, i)] = d2;
            if d2 == 0.0 {
                duplicate_pairs += 1;
            }
        }
    }

    // Top-p neighbor sets, self excluded, ties by ascending index.
    let mut neighbors: Vec<Vec<usize>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut order: Vec<usize> = (0..n).filter(|&i| i != j).collect();
        order.sort_by(|&a, &b| dist_sq[(a, j)].total_cmp(&dist_sq[(b, j)]).then(a.cmp(&b)));
        order.truncate(neighbor_count);
        order.sort_unstable();
        neighbors.push(order);
    }

    let mut s = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let linked = neighbors[j].binary_search(&i).is_ok()
                || neighbors[i].binary_search(&j).is_ok();
            if linked {
                let w = (-dist_sq[(i, j)] / sigma_sq).exp();
                s[(i, j)] = w;
                s[(j, i)] = w;
            }
        }
    }

    let mut warnings = Vec::new();
    if duplicate_pairs > 0 {
        warnings.push(Warning::DegenerateInstances {
            pairs: duplicate_pairs,
        });
    }

    Ok(AffinityGraph {
        s,
        neighbor_count,
        sigma_sq,
        warnings,
    })
}

/// L = G − S, rows summing to zero, symmetric PSD.
pub fn build_laplacian(graph: &AffinityGraph) -> Laplacian {
    let n = graph.s.nrows();
    let degree: Vec<f64> = (0..n).map(|i| graph.s.row(i).sum()).collect();
    let mut l = -graph.s.clone();
    for i in 0..n {
        l[(i, i)] += degree[i];
    }
    Laplacian { l, degree }
}
