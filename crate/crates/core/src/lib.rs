//! Robust graphical lasso.
//!
//! Decomposes a contaminated sample covariance `M` into `F + S`, where `F^{-1}`
//! is sparse and `S` holds sparse anomalies, with an ADMM solver. Also provides
//! the plain graphical lasso, a robust PCA baseline, synthetic benchmarks and a
//! returns-to-graph pipeline.

pub mod bench;
pub mod error;
pub mod io;
pub mod matrix;
pub mod par;
pub mod rpca;
pub mod score;
pub mod solver;
pub mod synth;

pub use error::{Error, ErrorCategory, IngestError, Result};
pub use matrix::{EigenPair, SymMatrix};
pub use score::{f1_support_score, F1Report};
pub use solver::{glasso_solve, rglasso_solve, SolveResult, SolverConfig, Termination};
pub use synth::{AnomalySpec, CovarianceMode, StructureKind, StructureSpec};
