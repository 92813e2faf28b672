//! Augmented Lagrangian method for the simplex-constrained quadratic
//! program
//!
//! ```text
//!     min_θ  θᵀQθ − θᵀs    s.t.  θᵀ1 = 1,  θ ≥ 0
//! ```
//!
//! The nonnegativity constraint is split onto an auxiliary variable v with
//! v = θ, v ≥ 0. Each inner iteration solves the unconstrained θ-step
//! through the SPD system E·θ = f with E = 2Q + μI + μ11ᵀ, projects
//! v = pos(θ + δ₁/μ), then updates the multipliers δ₁, δ₂ and grows μ.

use nalgebra::Cholesky;

use crate::error::Warning;
use crate::linalg::{Matrix, Vector};

#[derive(Debug, Clone, Copy)]
pub struct AlmParams {
    pub mu0: f64,
    pub growth: f64,
    pub inner_tol: f64,
    pub inner_max: usize,
}

impl Default for AlmParams {
    fn default() -> Self {
        AlmParams {
            mu0: 1.0,
            growth: 1.1,
            inner_tol: 1e-8,
            inner_max: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexQpSolution {
    /// Feasible iterate: clipped to θ ≥ 0 and renormalized to θᵀ1 = 1.
    pub theta: Vector,
    /// |θᵀ1 − 1| before cleanup.
    pub sum_dev_before_cleanup: f64,
    /// min θ before cleanup.
    pub min_before_cleanup: f64,
    pub converged: bool,
    pub warnings: Vec<Warning>,
}

/// Subproblem objective θᵀQθ − θᵀs.
pub(crate) fn simplex_qp_objective(q: &Matrix, s: &Vector, theta: &Vector) -> f64 {
    theta.dot(&(q * theta)) - theta.dot(s)
}

/// Runs the ALM loop from the feasible start `theta0` until the feasibility
/// residual max(‖θ − v‖∞, |θᵀ1 − 1|) drops below `inner_tol` or `inner_max`
/// iterations elapse.
pub fn solve_simplex_qp(
    q: &Matrix,
    s: &Vector,
    theta0: &Vector,
    params: &AlmParams,
) -> SimplexQpSolution {
    let d = s.len();
    let q2 = q * 2.0;

    let mut theta = theta0.clone();
    let mut v = theta.clone();
    let mut delta1 = Vector::zeros(d);
    let mut delta2 = 0.0f64;
    let mut mu = params.mu0;
    let mut converged = false;
    let mut residual = f64::INFINITY;

    for _ in 0..params.inner_max {
        let mut e = q2.clone();
        for j in 0..d {
            for i in 0..d {
                e[(i, j)] += mu;
            }
            e[(j, j)] += mu;
        }
        let mut f = s - &delta1;
        for i in 0..d {
            f[i] += mu * (v[i] + 1.0) - delta2;
        }
        theta = match Cholesky::new(e.clone()) {
            Some(ch) => ch.solve(&f),
            // E = 2Q + μI + μ11ᵀ is PD for PSD Q; the fallback only guards
            // against extreme conditioning.
            None => e.lu().solve(&f).expect("E must be invertible"),
        };

        for i in 0..d {
            v[i] = (theta[i] + delta1[i] / mu).max(0.0);
        }

        let sum_dev = (theta.sum() - 1.0).abs();
        let infeas = (0..d).map(|i| (theta[i] - v[i]).abs()).fold(0.0, f64::max);
        residual = infeas.max(sum_dev);
        if residual < params.inner_tol {
            converged = true;
            break;
        }

        for i in 0..d {
            delta1[i] += mu * (theta[i] - v[i]);
        }
        delta2 += mu * (theta.sum() - 1.0);
        mu *= params.growth;
    }

    let sum_dev_before_cleanup = (theta.sum() - 1.0).abs();
    let min_before_cleanup = theta.min();

    // Cleanup: clip negatives and renormalize onto the simplex.
    let mut warnings = Vec::new();
    for i in 0..d {
        theta[i] = theta[i].max(0.0);
    }
    let total = theta.sum();
    if total > 0.0 {
        theta /= total;
    } else {
        theta = Vector::from_element(d, 1.0 / d as f64);
        converged = false;
    }
    if !converged {
        warnings.push(Warning::AlmNoConverge { residual });
    }

    SimplexQpSolution {
        theta,
        sum_dev_before_cleanup,
        min_before_cleanup,
        converged,
        warnings,
    }
}
