//! Dense matrix primitives used by the solver: implicit centering, symmetric
//! eigendecomposition, the polar (orthonormal) factor, Sylvester solves for
//! symmetric positive semi-definite coefficient pairs, Hadamard products and
//! the Frobenius norm.
//!
//! The centering matrix H = I − (1/n)·1·1ᵀ is never materialized: everywhere
//! it appears in a product it is applied by subtracting means, which is the
//! same algebra without the O(n²) storage.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result, Warning};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Relative singular-value threshold below which an input to the polar
/// factor is treated as rank deficient.
pub const RANK_TOL: f64 = 1e-12;

/// Eigenvalue-pair threshold below which a Sylvester pencil is flagged as
/// near singular.
pub const PENCIL_TOL: f64 = 1e-10;

/// Frobenius norm, √tr(AᵀA).
pub fn frobenius_norm(a: &Matrix) -> f64 {
    a.norm()
}

/// Returns an error if any entry is NaN or infinite.
pub fn ensure_finite(a: &Matrix, context: &'static str) -> Result<()> {
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            if !a[(i, j)].is_finite() {
                return Err(Error::NonFinite {
                    context,
                    row: i,
                    col: j,
                });
            }
        }
    }
    Ok(())
}

/// Subtracts from each row its mean. For a feature matrix X (d×n, features
/// as rows) this computes X·H without forming H.
pub fn center_rows(x: &Matrix) -> Matrix {
    let n = x.ncols() as f64;
    let mut out = x.clone();
    for i in 0..x.nrows() {
        let mean = x.row(i).sum() / n;
        for j in 0..x.ncols() {
            out[(i, j)] -= mean;
        }
    }
    out
}

/// Subtracts from each column its mean: computes H·A without forming H.
pub fn center_cols(a: &Matrix) -> Matrix {
    let n = a.nrows() as f64;
    let mut out = a.clone();
    for j in 0..a.ncols() {
        let mean = a.column(j).sum() / n;
        for i in 0..a.nrows() {
            out[(i, j)] -= mean;
        }
    }
    out
}

/// Centered feature map F = H·Xᵀ (n×d): column i holds the mean-centered
/// i-th feature.
pub fn centering_apply(x: &Matrix) -> Matrix {
    assert!(x.nrows() >= 1 && x.ncols() >= 1, "empty matrix");
    center_rows(x).transpose()
}

/// Elementwise (Hadamard) product.
pub fn hadamard(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            context: "hadamard",
            expected: a.shape(),
            actual: b.shape(),
        });
    }
    Ok(a.component_mul(b))
}

/// Symmetric eigendecomposition A = U·diag(λ)·Uᵀ with eigenvalues in
/// ascending order and orthonormal U.
#[derive(Debug, Clone)]
pub struct SymEig {
    pub values: Vector,
    pub vectors: Matrix,
}

impl SymEig {
    pub fn new(a: &Matrix) -> Self {
        assert_eq!(a.nrows(), a.ncols(), "SymEig needs a square matrix");
        // Work on the symmetrized input; callers guarantee symmetry within
        // 1e-10 and the decomposition only reads one triangle anyway.
        let sym = (a + a.transpose()) * 0.5;
        let eig = sym.symmetric_eigen();
        let n = eig.eigenvalues.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let values = Vector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
        let mut vectors = Matrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            vectors.set_column(dst, &eig.eigenvectors.column(src));
        }
        SymEig { values, vectors }
    }

    /// Largest eigenvalue (the last one, given ascending order).
    pub fn max_value(&self) -> f64 {
        self.values[self.values.len() - 1]
    }
}

/// Orthonormal polar factor W = U·Vᵀ of the thin SVD M = U·Σ·Vᵀ; the
/// maximizer of tr(WᵀM) over matrices with orthonormal columns.
///
/// Rank-deficient inputs (any σ below `RANK_TOL`·σmax) get their missing
/// column directions completed deterministically by Gram-Schmidt against the
/// standard basis, and a `RankDeficient` warning is attached.
pub fn polar_orthonormal(m: &Matrix) -> (Matrix, Option<Warning>) {
    let (d, c) = m.shape();
    assert!(d >= c, "polar factor needs at least as many rows as columns");

    let svd = m
        .clone()
        .try_svd(true, true, f64::EPSILON, 0)
        .expect("SVD of a finite matrix should converge");
    let u = svd.u.expect("thin U requested");
    let v_t = svd.v_t.expect("Vᵀ requested");
    let sigma = &svd.singular_values;
    let sigma_max = sigma.max();

    let deficient = sigma_max <= 0.0 || sigma.iter().any(|&s| s < RANK_TOL * sigma_max);
    let mut w = &u * &v_t;

    if deficient {
        // Rebuild from the well-conditioned directions and complete the rest
        // against the standard basis so WᵀW = I still holds exactly.
        let keep: Vec<usize> = (0..c)
            .filter(|&i| sigma_max > 0.0 && sigma[i] >= RANK_TOL * sigma_max)
            .collect();
        let mut basis: Vec<Vector> = keep.iter().map(|&i| u.column(i).into_owned()).collect();
        let mut e = 0usize;
        while basis.len() < c {
            assert!(e < d, "failed to complete orthonormal basis");
            let mut cand = Vector::zeros(d);
            cand[e] = 1.0;
            e += 1;
            for b in &basis {
                let proj = b.dot(&cand);
                cand -= b * proj;
            }
            let norm = cand.norm();
            if norm > 1e-8 {
                basis.push(cand / norm);
            }
        }
        let mut u_full = Matrix::zeros(d, c);
        // Keep retained directions in their original slots, fill the
        // deficient slots in order from the completion set.
        let mut completion = basis.split_off(keep.len());
        for i in 0..c {
            if let Some(pos) = keep.iter().position(|&k| k == i) {
                u_full.set_column(i, &basis[pos]);
            } else {
                u_full.set_column(i, &completion.remove(0));
            }
        }
        w = &u_full * &v_t;
        return (w, Some(Warning::RankDeficient));
    }

    (w, None)
}

/// Solves M·X + X·N = P for symmetric PSD M (m×m) and N (q×q) through their
/// eigendecompositions: with M = UΛUᵀ and N = QΞQᵀ,
/// X = U·[ (UᵀPQ)_ij / (λ_i + ξ_j + ε) ]·Qᵀ.
///
/// ε = 1e-12·(1 + max λ + max ξ) keeps the division defined; if any pair
/// λ_i + ξ_j falls below `PENCIL_TOL` a `NearSingularPencil` warning is
/// attached and the regularized solve proceeds (it returns the minimum-norm
/// representative on exactly flat directions).
pub fn solve_sylvester_sym(
    m_sym: &Matrix,
    n_sym: &Matrix,
    p: &Matrix,
) -> (Matrix, Option<Warning>) {
    let eig_m = SymEig::new(m_sym);
    let eig_n = SymEig::new(n_sym);
    solve_sylvester_with_eigs(&eig_m, &eig_n, p)
}

/// Same as [`solve_sylvester_sym`] but with precomputed eigendecompositions,
/// for callers that solve against a fixed coefficient matrix repeatedly.
pub fn solve_sylvester_with_eigs(
    eig_m: &SymEig,
    eig_n: &SymEig,
    p: &Matrix,
) -> (Matrix, Option<Warning>) {
    let (m, q) = (eig_m.values.len(), eig_n.values.len());
    assert_eq!(p.shape(), (m, q), "right-hand side shape mismatch");

    let lambda_max = eig_m.max_value().max(0.0);
    let xi_max = eig_n.max_value().max(0.0);
    let eps_reg = 1e-12 * (1.0 + lambda_max + xi_max);

    let mut near_singular = false;
    let mut core = eig_m.vectors.tr_mul(p) * &eig_n.vectors;
    for j in 0..q {
        for i in 0..m {
            let denom = eig_m.values[i] + eig_n.values[j];
            if denom < PENCIL_TOL {
                near_singular = true;
            }
            core[(i, j)] /= denom + eps_reg;
        }
    }
    let x = &eig_m.vectors * core * eig_n.vectors.transpose();
    let warning = near_singular.then_some(Warning::NearSingularPencil);
    (x, warning)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Matrix {
        let mut m = Matrix::zeros(r, c);
        for j in 0..c {
            for i in 0..r {
                m[(i, j)] = rng.sample(StandardNormal);
            }
        }
        m
    }

    fn random_psd(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
        let g = random_matrix(rng, n, n);
        &g * g.transpose()
    }

    fn max_abs(a: &Matrix) -> f64 {
        a.amax()
    }

    #[test]
    fn centering_subtracts_feature_means() {
        let x = Matrix::from_row_slice(1, 3, &[1.0, 2.0, 3.0]);
        let f = centering_apply(&x);
        assert_eq!(f.shape(), (3, 1));
        assert_abs_diff_eq!(f[(0, 0)], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f[(1, 0)], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f[(2, 0)], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn centering_annihilates_constant_features() {
        let x = Matrix::from_row_slice(1, 4, &[5.0, 5.0, 5.0, 5.0]);
        let f = centering_apply(&x);
        assert!(max_abs(&f) <= 1e-15);
    }

    #[test]
    fn centered_columns_sum_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = random_matrix(&mut rng, 3, 4);
        let f = centering_apply(&x);
        for j in 0..f.ncols() {
            assert!(f.column(j).sum().abs() <= 1e-12);
        }
    }

    #[test]
    fn centering_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = random_matrix(&mut rng, 5, 6);
        let once = centering_apply(&x);
        let twice = centering_apply(&once.transpose());
        assert!(max_abs(&(&twice - &once)) <= 1e-12);
    }

    #[test]
    fn polar_of_orthonormal_is_identity_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = random_matrix(&mut rng, 6, 3);
        let (q, _) = polar_orthonormal(&g);
        let (w, warn) = polar_orthonormal(&q);
        assert!(warn.is_none());
        assert!(max_abs(&(&w - &q)) <= 1e-10);
    }

    #[test]
    fn polar_of_positive_diagonal_is_identity() {
        let m = Matrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 2.0]);
        let (w, warn) = polar_orthonormal(&m);
        assert!(warn.is_none());
        assert!(max_abs(&(&w - &Matrix::identity(2, 2))) <= 1e-12);
    }

    #[test]
    fn polar_maximizes_trace_against_random_orthonormal_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let m = random_matrix(&mut rng, 5, 2);
        let (w, _) = polar_orthonormal(&m);
        let attained = (w.tr_mul(&m)).trace();
        for _ in 0..1000 {
            // Independent orthonormalization route: Gram-Schmidt.
            let g = random_matrix(&mut rng, 5, 2);
            let c0 = g.column(0).into_owned();
            let q0 = &c0 / c0.norm();
            let mut c1 = g.column(1).into_owned();
            let proj = q0.dot(&c1);
            c1 -= &q0 * proj;
            let q1 = &c1 / c1.norm();
            let mut q = Matrix::zeros(5, 2);
            q.set_column(0, &q0);
            q.set_column(1, &q1);
            let other = (q.tr_mul(&m)).trace();
            assert!(attained + 1e-9 >= other);
        }
    }

    #[test]
    fn polar_orthogonality_holds_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let d = rng.random_range(2..10usize);
            let c = rng.random_range(1..=d.min(4));
            let m = random_matrix(&mut rng, d, c);
            let (w, _) = polar_orthonormal(&m);
            let gram = w.tr_mul(&w);
            assert!(max_abs(&(&gram - &Matrix::identity(c, c))) <= 1e-10);
        }
    }

    #[test]
    fn polar_completes_rank_deficient_input() {
        // Two identical columns: rank 1.
        let mut m = Matrix::zeros(5, 2);
        for i in 0..5 {
            m[(i, 0)] = (i + 1) as f64;
            m[(i, 1)] = (i + 1) as f64;
        }
        let (w, warn) = polar_orthonormal(&m);
        assert_eq!(warn, Some(Warning::RankDeficient));
        let gram = w.tr_mul(&w);
        assert!(max_abs(&(&gram - &Matrix::identity(2, 2))) <= 1e-10);
    }

    #[test]
    fn polar_of_zero_matrix_still_orthonormal() {
        let m = Matrix::zeros(4, 2);
        let (w, warn) = polar_orthonormal(&m);
        assert_eq!(warn, Some(Warning::RankDeficient));
        let gram = w.tr_mul(&w);
        assert!(max_abs(&(&gram - &Matrix::identity(2, 2))) <= 1e-10);
    }

    #[test]
    fn sylvester_identity_pair_halves_rhs() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let p = random_matrix(&mut rng, 4, 3);
        let (x, warn) = solve_sylvester_sym(&Matrix::identity(4, 4), &Matrix::identity(3, 3), &p);
        assert!(warn.is_none());
        assert!(max_abs(&(&x - &(&p * 0.5))) <= 1e-10);
    }

    #[test]
    fn sylvester_diagonal_case_matches_closed_form() {
        let m = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let n = Matrix::from_row_slice(1, 1, &[3.0]);
        let p = Matrix::from_row_slice(2, 1, &[4.0, 5.0]);
        let (x, warn) = solve_sylvester_sym(&m, &n, &p);
        assert!(warn.is_none());
        assert_abs_diff_eq!(x[(0, 0)], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(x[(1, 0)], 1.0, epsilon = 1e-10);
    }

    #[test]
    fn sylvester_residual_on_random_psd_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100 {
            let m_dim = rng.random_range(2..=10usize);
            let q_dim = rng.random_range(1..=10usize);
            let m = random_psd(&mut rng, m_dim);
            let n = random_psd(&mut rng, q_dim);
            let p = random_matrix(&mut rng, m_dim, q_dim);
            let (x, _) = solve_sylvester_sym(&m, &n, &p);
            let residual = &m * &x + &x * &n - &p;
            assert!(frobenius_norm(&residual) <= 1e-8 * (1.0 + frobenius_norm(&p)));
        }
    }

    #[test]
    fn sylvester_flags_near_singular_pencil() {
        // M with a zero eigenvalue and N = 0.
        let m = Matrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        let n = Matrix::zeros(1, 1);
        let p = Matrix::from_row_slice(2, 1, &[1.0, -1.0]);
        let (x, warn) = solve_sylvester_sym(&m, &n, &p);
        assert_eq!(warn, Some(Warning::NearSingularPencil));
        let residual = &m * &x + &x * &n - &p;
        assert!(frobenius_norm(&residual) <= 1e-8 * (1.0 + frobenius_norm(&p)));
    }

    #[test]
    fn symeig_reconstructs_and_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for &n in &[2usize, 5, 10, 25, 50] {
            let g = random_matrix(&mut rng, n, n);
            let a = (&g + g.transpose()) * 0.5;
            let eig = SymEig::new(&a);
            let recon =
                &eig.vectors * Matrix::from_diagonal(&eig.values) * eig.vectors.transpose();
            assert!(frobenius_norm(&(&recon - &a)) <= 1e-8 * (1.0 + frobenius_norm(&a)));
            let gram = eig.vectors.tr_mul(&eig.vectors);
            assert!(max_abs(&(&gram - &Matrix::identity(n, n))) <= 1e-10);
            for i in 1..n {
                assert!(eig.values[i] >= eig.values[i - 1]);
            }
        }
    }

    #[test]
    fn hadamard_follows_definition() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let b = Matrix::from_row_slice(2, 2, &[5.0, 6.0, 7.0, 8.0]);
        let c = hadamard(&a, &b).unwrap();
        assert_eq!(c, Matrix::from_row_slice(2, 2, &[5.0, 12.0, 21.0, 32.0]));

        let zeros = Matrix::zeros(2, 2);
        assert_eq!(hadamard(&a, &zeros).unwrap(), zeros);
        let ones = Matrix::from_element(2, 2, 1.0);
        assert_eq!(hadamard(&a, &ones).unwrap(), a);
    }

    #[test]
    fn hadamard_rejects_shape_mismatch() {
        let a = Matrix::zeros(2, 2);
        let b = Matrix::zeros(2, 3);
        assert!(matches!(
            hadamard(&a, &b),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn ensure_finite_catches_nan() {
        let mut a = Matrix::zeros(2, 2);
        a[(1, 0)] = f64::NAN;
        assert!(matches!(
            ensure_finite(&a, "test"),
            Err(Error::NonFinite { row: 1, col: 0, .. })
        ));
    }
}
