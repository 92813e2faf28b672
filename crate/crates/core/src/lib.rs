//! Embedded multi-label feature selection via orthogonal regression with
//! global feature-redundancy and global label-relevance regularization
//! (GRROOR), plus the evaluation protocol around it: an ML-KNN classifier,
//! six standard multi-label metrics, ranking loss, the ACR model-selection
//! score and Friedman/Nemenyi comparison statistics.
//!
//! The solver learns a per-feature importance vector θ on the probability
//! simplex by alternating four subproblem updates:
//!
//! * an orthonormal projection W solved as a quadratic problem on the
//!   Stiefel manifold by generalized power iteration,
//! * the feature weights θ solved as a simplex-constrained quadratic
//!   program by an augmented Lagrangian method,
//! * the latent label representation V and the coefficient matrix B, each a
//!   Sylvester equation with symmetric PSD coefficients.
//!
//! Features are then ranked by θ in descending order.

pub mod correlation;
pub mod error;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod mlknn;
pub mod solver;
pub mod synth;

pub use error::{Error, Result, Warning};
pub use linalg::{Matrix, Vector};
