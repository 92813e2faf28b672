//! Generalized power iteration for the quadratic problem on the Stiefel
//! manifold (QPSM):
//!
//! ```text
//!     min_{WᵀW = I}  tr(WᵀJW − 2WᵀM),    J = Xw·Xwᵀ  (PSD)
//! ```
//!
//! With a shift γ ≥ λmax(J) the problem is equivalent to maximizing
//! tr(Wᵀ(γI − J)W + 2WᵀM), and the fixed-point update
//! W ← polar((γI − J)W + M) increases that objective monotonically. J is
//! never formed; every product goes through the factor Xw.

use crate::error::Warning;
use crate::linalg::{polar_orthonormal, Matrix, Vector};

const GPI_TOL: f64 = 1e-10;
const GPI_STALL_TOL: f64 = 1e-12;
const GPI_MAX_ITER: usize = 200;
const POWER_ITERS: usize = 50;
const SHIFT_FACTOR: f64 = 1.01;

/// Power-iteration estimate of λmax(Xw·Xwᵀ), 50 iterations from the
/// normalized all-ones vector.
fn estimate_lambda_max(xw: &Matrix) -> f64 {
    let d = xw.nrows();
    let mut v = Vector::from_element(d, 1.0 / (d as f64).sqrt());
    for _ in 0..POWER_ITERS {
        let jv = xw * xw.tr_mul(&v);
        let norm = jv.norm();
        if norm <= 0.0 {
            return 0.0;
        }
        v = jv / norm;
    }
    let jv = xw * xw.tr_mul(&v);
    v.dot(&jv).max(0.0)
}

/// QPSM objective tr(WᵀJW − 2WᵀM) evaluated through the factor.
pub(crate) fn qpsm_objective(w: &Matrix, xw: &Matrix, m: &Matrix) -> f64 {
    xw.tr_mul(w).norm_squared() - 2.0 * w.dot(m)
}

/// One shifted polar fixed-point run from `w_start`. Never returns an
/// iterate worse than the best seen: a step that fails to improve is
/// discarded and reported as a `GpiStall`.
fn gpi_run(w_start: &Matrix, xw: &Matrix, m: &Matrix, gamma: f64) -> (Matrix, f64, Vec<Warning>) {
    let mut warnings = Vec::new();
    let mut w = w_start.clone();
    let mut prev_obj = qpsm_objective(&w, xw, m);

    for _ in 0..GPI_MAX_ITER {
        let target = &w * gamma - xw * xw.tr_mul(&w) + m;
        let (w_next, polar_warn) = polar_orthonormal(&target);
        if let Some(pw) = polar_warn {
            if !warnings.contains(&pw) {
                warnings.push(pw);
            }
        }
        let next_obj = qpsm_objective(&w_next, xw, m);
        let rel_impr = (prev_obj - next_obj) / prev_obj.abs().max(1.0);
        if rel_impr < 0.0 {
            // Shift underestimate or roundoff; keep the previous iterate.
            warnings.push(Warning::GpiStall);
            break;
        }
        w = w_next;
        prev_obj = next_obj;
        if rel_impr < GPI_TOL {
            if rel_impr < GPI_STALL_TOL {
                warnings.push(Warning::GpiStall);
            }
            break;
        }
    }
    (w, prev_obj, warnings)
}

/// Minimizes the QPSM by the shifted polar iteration from two deterministic
/// starts — the incoming `w0` and the polar factor of M — keeping the better
/// endpoint.
///
/// The fixed-point map is monotone but only locally convergent; starting
/// from polar(M) lands in the basin aligned with the linear term (for c = 1
/// the sign of that start's component along J's bottom eigenvector already
/// matches the global optimum and is reinforced at every step), while the
/// `w0` start guarantees the result is never worse than the incoming
/// iterate.
pub fn solve_qpsm(w0: &Matrix, xw: &Matrix, m: &Matrix) -> (Matrix, Vec<Warning>) {
    let gamma = SHIFT_FACTOR * estimate_lambda_max(xw);
    let (w_cont, obj_cont, warn_cont) = gpi_run(w0, xw, m, gamma);
    let (m_polar, _) = polar_orthonormal(m);
    let (w_aligned, obj_aligned, warn_aligned) = gpi_run(&m_polar, xw, m, gamma);
    if obj_aligned < obj_cont {
        (w_aligned, warn_aligned)
    } else {
        (w_cont, warn_cont)
    }
}
