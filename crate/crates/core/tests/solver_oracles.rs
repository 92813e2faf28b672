//! Brute-force oracles for the two constrained subproblems: the simplex QP
//! is checked against a dense barycentric grid, and the d=2, c=1 Stiefel
//! problem against an angle grid over the unit circle.

use grroor::linalg::{polar_orthonormal, Matrix, Vector};
use grroor::solver::{solve_qpsm, solve_simplex_qp, AlmParams};
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

fn simplex_objective(q: &Matrix, s: &Vector, theta: &Vector) -> f64 {
    theta.dot(&(q * theta)) - theta.dot(s)
}

#[test]
fn simplex_qp_matches_barycentric_grid_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let grid = 200usize;
    for _ in 0..20 {
        let g = random_matrix(&mut rng, 3, 3);
        let q = &g * g.transpose();
        let s = Vector::from_fn(3, |_, _| rng.sample::<f64, _>(StandardNormal));

        let uniform = Vector::from_element(3, 1.0 / 3.0);
        let sol = solve_simplex_qp(&q, &s, &uniform, &AlmParams::default());
        let attained = simplex_objective(&q, &s, &sol.theta);

        let mut best = f64::INFINITY;
        for i in 0..=grid {
            for j in 0..=(grid - i) {
                let theta = Vector::from_vec(vec![
                    i as f64 / grid as f64,
                    j as f64 / grid as f64,
                    (grid - i - j) as f64 / grid as f64,
                ]);
                best = best.min(simplex_objective(&q, &s, &theta));
            }
        }
        assert!(
            attained <= best + 1e-3,
            "ALM value {attained} exceeds grid optimum {best} by more than 1e-3"
        );
    }
}

#[test]
fn qpsm_matches_angle_grid_oracle_for_unit_vectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let grid = 10_000usize;
    for _ in 0..20 {
        let n = rng.random_range(2..6usize);
        let xw = random_matrix(&mut rng, 2, n);
        let m = random_matrix(&mut rng, 2, 1);
        let (w0, _) = polar_orthonormal(&random_matrix(&mut rng, 2, 1));

        let objective = |w: &Matrix| xw.tr_mul(w).norm_squared() - 2.0 * w.dot(&m);

        let (w, _) = solve_qpsm(&w0, &xw, &m);
        let attained = objective(&w);

        let mut best = f64::INFINITY;
        for step in 0..grid {
            let t = 2.0 * std::f64::consts::PI * step as f64 / grid as f64;
            let cand = Matrix::from_column_slice(2, 1, &[t.cos(), t.sin()]);
            best = best.min(objective(&cand));
        }
        assert!(
            attained <= best + 1e-3,
            "GPI value {attained} exceeds angle-grid optimum {best} by more than 1e-3"
        );
    }
}
