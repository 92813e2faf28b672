//! Alternating optimizer for the feature-weighted orthogonal regression
//! objective
//!
//! ```text
//!   min  ‖HXᵀΘW − HV‖²_F + α‖Y − VB‖²_F + η·tr(VᵀLV) + λ·θᵀAθ + β·tr(RBᵀB)
//!   s.t. WᵀW = I_c,  θᵀ1 = 1,  θ ≥ 0
//! ```
//!
//! over W (d×c orthonormal), θ (d, on the simplex, Θ = diag(θ)), V (n×c)
//! and B (c×k), where H is the centering projection, L the instance-graph
//! Laplacian, A the squared-correlation feature-redundancy matrix and R the
//! label-relevance penalty. The bias is eliminated in closed form and
//! recovered once after convergence.
//!
//! One outer iteration updates, in order: W by generalized power iteration,
//! θ by an augmented Lagrangian simplex QP, then V and B by Sylvester solves
//! with symmetric PSD coefficients. Every subproblem step is monotone, so
//! the objective trace is nonincreasing.

mod alm;
mod gpi;

pub use alm::{solve_simplex_qp, AlmParams, SimplexQpSolution};
pub use gpi::solve_qpsm;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::correlation::{build_label_relevance, build_redundancy, LabelRelevance, RedundancyMatrix};
use crate::error::{Error, Result, Warning};
use crate::graph::{build_affinity, build_laplacian, Laplacian};
use crate::linalg::{
    center_rows, ensure_finite, polar_orthonormal, solve_sylvester_with_eigs, Matrix, SymEig,
    Vector,
};

/// Tradeoff parameters and iteration controls.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Hyperparams {
    /// Weight of the label-factorization term ‖Y − VB‖². Fixed to 1 in the
    /// reference protocol so the remaining tradeoffs stay interpretable.
    pub alpha: f64,
    /// Weight of the label-relevance penalty tr(RBᵀB).
    pub beta: f64,
    /// Weight of the manifold term tr(VᵀLV).
    pub eta: f64,
    /// Weight of the feature-redundancy penalty θᵀAθ.
    pub lambda: f64,
    /// Latent dimension c, 1 ≤ c ≤ min(d, k).
    pub latent_dim: usize,
    /// Top-p neighbor count for the affinity graph.
    pub neighbor_count: usize,
    /// Heat-kernel bandwidth σ².
    pub sigma_sq: f64,
    /// Initial ALM penalty μ₀.
    pub alm_mu0: f64,
    /// ALM penalty growth factor (> 1).
    pub alm_growth: f64,
    /// ALM feasibility tolerance.
    pub alm_inner_tol: f64,
    /// ALM iteration cap.
    pub alm_inner_max: usize,
    /// Outer-loop relative objective-change tolerance.
    pub outer_tol: f64,
    /// Outer-loop iteration cap.
    pub outer_max: usize,
    /// RNG seed for the W, V, B initialization.
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            alpha: 1.0,
            beta: 0.1,
            eta: 0.1,
            lambda: 0.1,
            latent_dim: 2,
            neighbor_count: 5,
            sigma_sq: 1.0,
            alm_mu0: 1.0,
            alm_growth: 1.1,
            alm_inner_tol: 1e-8,
            alm_inner_max: 200,
            outer_tol: 1e-5,
            outer_max: 50,
            seed: 0,
        }
    }
}

impl Hyperparams {
    /// Checks positivity constraints and the latent-dimension bound against
    /// the problem dimensions.
    pub fn validate(&self, d: usize, k: usize) -> Result<()> {
        let positive = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("eta", self.eta),
            ("lambda", self.lambda),
            ("sigma_sq", self.sigma_sq),
            ("alm_mu0", self.alm_mu0),
            ("alm_inner_tol", self.alm_inner_tol),
            ("outer_tol", self.outer_tol),
        ];
        for (name, value) in positive {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be nonnegative and finite, got {value}"
                )));
            }
        }
        if !(self.alm_growth > 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alm_growth must exceed 1, got {}",
                self.alm_growth
            )));
        }
        if self.latent_dim < 1 || self.latent_dim > d.min(k) {
            return Err(Error::InvalidArgument(format!(
                "latent_dim must lie in [1, min(d, k)] = [1, {}], got {}",
                d.min(k),
                self.latent_dim
            )));
        }
        if self.outer_max < 1 || self.alm_inner_max < 1 {
            return Err(Error::InvalidArgument(
                "iteration caps must be at least 1".into(),
            ));
        }
        Ok(())
    }

    fn alm_params(&self) -> AlmParams {
        AlmParams {
            mu0: self.alm_mu0,
            growth: self.alm_growth,
            inner_tol: self.alm_inner_tol,
            inner_max: self.alm_inner_max,
        }
    }
}

/// Optimizer variables.
#[derive(Debug, Clone)]
pub struct ModelState {
    /// d×c orthonormal projection.
    pub w: Matrix,
    /// Per-feature importance on the probability simplex.
    pub theta: Vector,
    /// n×c latent label representation.
    pub v: Matrix,
    /// c×k coefficient matrix.
    pub b: Matrix,
    /// Recovered bias (length c); zero until fit completes.
    pub bias: Vector,
    /// Objective value at initialization and after each outer iteration.
    pub objective_trace: Vec<f64>,
}

/// Feature ranking by descending importance score.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRanking {
    /// Permutation of 0..d, best feature first; ties broken by lower index.
    pub order: Vec<usize>,
    /// θ in original feature order.
    pub scores: Vec<f64>,
}

/// The objective value with its five terms reported separately.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ObjectiveTerms {
    /// ‖HXᵀΘW − HV‖²_F
    pub mapping: f64,
    /// α‖Y − VB‖²_F
    pub regression: f64,
    /// η·tr(VᵀLV)
    pub manifold: f64,
    /// λ·θᵀAθ
    pub redundancy: f64,
    /// β·tr(RBᵀB)
    pub label_relevance: f64,
    pub total: f64,
}

/// Worst-case invariant deviations observed during a fit.
#[derive(Debug, Clone, Copy, Default)]
pub struct FitDiagnostics {
    /// max over iterations of ‖WᵀW − I‖_max right after the W update.
    pub max_orthogonality_dev: f64,
    /// max over iterations of |θᵀ1 − 1| right after the θ update.
    pub max_simplex_sum_dev: f64,
    /// min over iterations of min θ right after the θ update.
    pub min_theta: f64,
    /// Largest increase between consecutive trace entries (≤ 0 when the
    /// trace is strictly nonincreasing).
    pub max_ascent: f64,
}

/// Result of [`Problem::fit`].
#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub state: ModelState,
    pub ranking: FeatureRanking,
    pub converged: bool,
    pub outer_iterations: usize,
    pub warnings: Vec<Warning>,
    pub diagnostics: FitDiagnostics,
}

/// A fully assembled optimization problem: the data, its derived graph and
/// correlation structures, and the hyperparameters.
pub struct Problem {
    x: Matrix,
    /// Row-centered features, X·H.
    xc: Matrix,
    /// Regression target in {−1, +1}, n×k.
    y: Matrix,
    hp: Hyperparams,
    laplacian: Laplacian,
    redundancy: RedundancyMatrix,
    label_relevance: LabelRelevance,
    /// Xc·Xcᵀ = XHXᵀ, the fixed part of the θ-subproblem's Q.
    feature_gram: Matrix,
    /// Eigendecomposition of H + ηL (fixed across outer iterations).
    v_coeff_eig: SymEig,
    /// Eigendecomposition of β·R (PSD-repaired), fixed across iterations.
    b_coeff_eig: SymEig,
    build_warnings: Vec<Warning>,
}

impl Problem {
    /// Validates the data, builds the affinity graph, the Laplacian, the
    /// redundancy matrix A and the label-relevance penalty R, and caches the
    /// fixed decompositions the subproblem solvers reuse.
    ///
    /// `x` is d×n (features as rows), `y01` is n×k with entries in {0, 1}.
    pub fn new(x: Matrix, y01: &Matrix, hp: Hyperparams) -> Result<Self> {
        let (d, n) = x.shape();
        let k = y01.ncols();
        if d < 2 || n < 3 || k < 2 {
            return Err(Error::InvalidArgument(format!(
                "need d >= 2, n >= 3, k >= 2; got d={d}, n={n}, k={k}"
            )));
        }
        if y01.nrows() != n {
            return Err(Error::ShapeMismatch {
                context: "label matrix",
                expected: (n, k),
                actual: y01.shape(),
            });
        }
        ensure_finite(&x, "feature matrix")?;
        for j in 0..k {
            for i in 0..n {
                let v = y01[(i, j)];
                if v != 0.0 && v != 1.0 {
                    return Err(Error::InvalidArgument(format!(
                        "label matrix must be binary {{0,1}}; found {v} at ({i}, {j})"
                    )));
                }
            }
        }
        hp.validate(d, k)?;

        let graph = build_affinity(&x, hp.neighbor_count, hp.sigma_sq)?;
        let laplacian = build_laplacian(&graph);
        let redundancy = build_redundancy(&x)?;
        let label_relevance = build_label_relevance(y01)?;

        let mut build_warnings = Vec::new();
        build_warnings.extend(graph.warnings.iter().cloned());
        build_warnings.extend(redundancy.warnings.iter().cloned());
        build_warnings.extend(label_relevance.warnings.iter().cloned());

        let xc = center_rows(&x);
        let feature_gram = &xc * xc.transpose();

        // H + ηL, with H = I − (1/n)·1·1ᵀ assembled directly.
        let mut v_coeff = &laplacian.l * hp.eta;
        let inv_n = 1.0 / n as f64;
        for j in 0..n {
            for i in 0..n {
                v_coeff[(i, j)] -= inv_n;
            }
            v_coeff[(j, j)] += 1.0;
        }
        let v_coeff_eig = SymEig::new(&v_coeff);
        let b_coeff_eig = SymEig::new(&(&label_relevance.r_psd * hp.beta));

        let y = y01.map(|v| 2.0 * v - 1.0);

        Ok(Problem {
            x,
            xc,
            y,
            hp,
            laplacian,
            redundancy,
            label_relevance,
            feature_gram,
            v_coeff_eig,
            b_coeff_eig,
            build_warnings,
        })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.x.nrows(), self.x.ncols(), self.y.ncols())
    }

    pub fn hyperparams(&self) -> &Hyperparams {
        &self.hp
    }

    pub fn redundancy(&self) -> &RedundancyMatrix {
        &self.redundancy
    }

    pub fn label_relevance(&self) -> &LabelRelevance {
        &self.label_relevance
    }

    pub fn laplacian(&self) -> &Laplacian {
        &self.laplacian
    }

    /// Warnings raised while building the graph and correlation structures.
    pub fn build_warnings(&self) -> &[Warning] {
        &self.build_warnings
    }

    /// Deterministic seeded initialization: θ uniform at 1/d, W the polar
    /// factor of a Gaussian draw, V and B Gaussian scaled by 1/√c.
    pub fn init_state(&self) -> ModelState {
        let (d, n, k) = self.dims();
        let c = self.hp.latent_dim;
        let mut rng = ChaCha8Rng::seed_from_u64(self.hp.seed);

        let mut draw = |rows: usize, cols: usize, scale: f64| {
            let mut m = Matrix::zeros(rows, cols);
            for j in 0..cols {
                for i in 0..rows {
                    let g: f64 = rng.sample(StandardNormal);
                    m[(i, j)] = g * scale;
                }
            }
            m
        };

        let (w, _) = polar_orthonormal(&draw(d, c, 1.0));
        let inv_sqrt_c = 1.0 / (c as f64).sqrt();
        let v = draw(n, c, inv_sqrt_c);
        let b = draw(c, k, inv_sqrt_c);

        ModelState {
            w,
            theta: Vector::from_element(d, 1.0 / d as f64),
            v,
            b,
            bias: Vector::zeros(c),
            objective_trace: Vec::new(),
        }
    }

    /// Θ·Xc, rows of the centered feature matrix scaled by θ.
    fn weighted_centered(&self, theta: &Vector) -> Matrix {
        let mut xw = self.xc.clone();
        for i in 0..xw.nrows() {
            let t = theta[i];
            for j in 0..xw.ncols() {
                xw[(i, j)] *= t;
            }
        }
        xw
    }

    /// W-subproblem: min tr(WᵀJW − 2WᵀM) over WᵀW = I with J = ΘXHXᵀΘ and
    /// M = ΘXHV, both applied through the factor Θ·Xc.
    pub fn update_w(&self, state: &ModelState) -> (Matrix, Vec<Warning>) {
        let xw = self.weighted_centered(&state.theta);
        let m = &xw * &state.v;
        solve_qpsm(&state.w, &xw, &m)
    }

    /// θ-subproblem: min θᵀQθ − θᵀs over the simplex, with
    /// Q = (XHXᵀ)∘(WWᵀ) + λA and s = diag(2·XHV·Wᵀ). A cleanup clips and
    /// renormalizes, and the update never returns a θ with a worse
    /// subproblem objective than the incoming one.
    pub fn update_theta(&self, state: &ModelState) -> (Vector, Vec<Warning>) {
        let d = self.x.nrows();
        let ww = &state.w * state.w.transpose();
        let mut q = self.feature_gram.component_mul(&ww);
        q += &self.redundancy.a * self.hp.lambda;

        let xcv = &self.xc * &state.v; // d×c
        let mut s = Vector::zeros(d);
        for i in 0..d {
            let mut acc = 0.0;
            for j in 0..state.w.ncols() {
                acc += xcv[(i, j)] * state.w[(i, j)];
            }
            s[i] = 2.0 * acc;
        }

        let sol = solve_simplex_qp(&q, &s, &state.theta, &self.hp.alm_params());
        let old_value = alm::simplex_qp_objective(&q, &s, &state.theta);
        let new_value = alm::simplex_qp_objective(&q, &s, &sol.theta);
        if new_value > old_value {
            // The cleanup perturbed the ALM iterate past the incumbent; keep
            // the incumbent so the outer loop stays monotone.
            (state.theta.clone(), sol.warnings)
        } else {
            (sol.theta, sol.warnings)
        }
    }

    /// V-subproblem: (H + ηL)·V + V·(αBBᵀ) = HXᵀΘW + αYBᵀ.
    pub fn update_v(&self, state: &ModelState) -> (Matrix, Option<Warning>) {
        let theta_w = scale_rows(&state.w, &state.theta);
        let p = self.xc.tr_mul(&theta_w) + (&self.y * state.b.transpose()) * self.hp.alpha;
        let n_sym = (&state.b * state.b.transpose()) * self.hp.alpha;
        let eig_n = SymEig::new(&n_sym);
        solve_sylvester_with_eigs(&self.v_coeff_eig, &eig_n, &p)
    }

    /// B-subproblem: (αVᵀV)·B + B·(βR) = αVᵀY.
    pub fn update_b(&self, state: &ModelState) -> (Matrix, Option<Warning>) {
        let m_sym = state.v.tr_mul(&state.v) * self.hp.alpha;
        let eig_m = SymEig::new(&m_sym);
        let p = state.v.tr_mul(&self.y) * self.hp.alpha;
        solve_sylvester_with_eigs(&eig_m, &self.b_coeff_eig, &p)
    }

    /// Closed-form optimal bias b = (1/n)(Vᵀ1 − WᵀΘX1).
    pub fn update_bias(&self, state: &ModelState) -> Vector {
        let n = self.x.ncols() as f64;
        let c = state.w.ncols();
        let mut v_sums = Vector::zeros(c);
        for j in 0..c {
            v_sums[j] = state.v.column(j).sum();
        }
        let mut x_row_sums = Vector::zeros(self.x.nrows());
        for i in 0..self.x.nrows() {
            x_row_sums[i] = self.x.row(i).sum() * state.theta[i];
        }
        let w_part = state.w.tr_mul(&x_row_sums);
        (v_sums - w_part) / n
    }

    /// Evaluates the objective, reporting each term separately.
    pub fn objective(&self, state: &ModelState) -> ObjectiveTerms {
        let theta_w = scale_rows(&state.w, &state.theta);
        let mapped = self.xc.tr_mul(&theta_w); // HXᵀΘW
        let centered_v = crate::linalg::center_cols(&state.v);
        let mapping = (&mapped - &centered_v).norm_squared();

        let residual = &self.y - &state.v * &state.b;
        let regression = self.hp.alpha * residual.norm_squared();

        let lv = &self.laplacian.l * &state.v;
        let manifold = self.hp.eta * state.v.dot(&lv);

        let a_theta = &self.redundancy.a * &state.theta;
        let redundancy = self.hp.lambda * state.theta.dot(&a_theta);

        let btb = state.b.tr_mul(&state.b);
        let label_relevance = self.hp.beta * self.label_relevance.r_psd.dot(&btb);

        ObjectiveTerms {
            mapping,
            regression,
            manifold,
            redundancy,
            label_relevance,
            total: mapping + regression + manifold + redundancy + label_relevance,
        }
    }

    /// Runs the alternating loop W → θ → V → B until the relative objective
    /// change falls below `outer_tol` or `outer_max` iterations elapse, then
    /// recovers the bias and ranks the features by θ.
    pub fn fit(&self) -> FitOutcome {
        let mut state = self.init_state();
        let mut warnings: Vec<Warning> = Vec::new();
        for w in &self.build_warnings {
            merge_warning(&mut warnings, w.clone());
        }

        let mut diagnostics = FitDiagnostics {
            min_theta: f64::INFINITY,
            ..FitDiagnostics::default()
        };
        diagnostics.max_ascent = f64::NEG_INFINITY;

        state.objective_trace.push(self.objective(&state).total);
        let mut converged = false;
        let mut outer_iterations = 0;

        for _ in 0..self.hp.outer_max {
            outer_iterations += 1;

            let (w, ws) = self.update_w(&state);
            state.w = w;
            for wng in ws {
                merge_warning(&mut warnings, wng);
            }
            let c = state.w.ncols();
            let ortho_dev = (state.w.tr_mul(&state.w) - Matrix::identity(c, c)).amax();
            diagnostics.max_orthogonality_dev = diagnostics.max_orthogonality_dev.max(ortho_dev);

            let (theta, ws) = self.update_theta(&state);
            state.theta = theta;
            for wng in ws {
                merge_warning(&mut warnings, wng);
            }
            diagnostics.max_simplex_sum_dev = diagnostics
                .max_simplex_sum_dev
                .max((state.theta.sum() - 1.0).abs());
            diagnostics.min_theta = diagnostics.min_theta.min(state.theta.min());

            let (v, wv) = self.update_v(&state);
            state.v = v;
            if let Some(wng) = wv {
                merge_warning(&mut warnings, wng);
            }

            let (b, wb) = self.update_b(&state);
            state.b = b;
            if let Some(wng) = wb {
                merge_warning(&mut warnings, wng);
            }

            let total = self.objective(&state).total;
            let prev = *state.objective_trace.last().unwrap();
            state.objective_trace.push(total);
            diagnostics.max_ascent = diagnostics.max_ascent.max(total - prev);

            let rel_change = (prev - total).abs() / prev.abs().max(1.0);
            if rel_change < self.hp.outer_tol {
                converged = true;
                break;
            }
        }

        if !converged {
            merge_warning(
                &mut warnings,
                Warning::NotConverged {
                    iterations: outer_iterations,
                },
            );
        }

        state.bias = self.update_bias(&state);
        let ranking = rank_features(&state.theta);

        FitOutcome {
            state,
            ranking,
            converged,
            outer_iterations,
            warnings,
            diagnostics,
        }
    }
}

/// Sorts features by descending score; equal scores keep ascending index
/// order.
pub fn rank_features(theta: &Vector) -> FeatureRanking {
    let d = theta.len();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| theta[b].total_cmp(&theta[a]).then(a.cmp(&b)));
    FeatureRanking {
        order,
        scores: theta.iter().copied().collect(),
    }
}

/// Scales row i of `m` by `weights[i]`.
fn scale_rows(m: &Matrix, weights: &Vector) -> Matrix {
    let mut out = m.clone();
    for i in 0..m.nrows() {
        let t = weights[i];
        for j in 0..m.ncols() {
            out[(i, j)] *= t;
        }
    }
    out
}

/// Keeps at most one warning per variant.
fn merge_warning(list: &mut Vec<Warning>, w: Warning) {
    if !list
        .iter()
        .any(|existing| std::mem::discriminant(existing) == std::mem::discriminant(&w))
    {
        list.push(w);
    }
}
