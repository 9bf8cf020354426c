//! Approximately optimal diagonal preconditioners for symmetric positive
//! definite matrices that are available only through matrix-vector products.

// `!(x > 0.0)` is used throughout to reject NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod colgen;
pub mod eigsolve;
pub mod error;
pub mod lp;
pub mod mmio;
pub mod operator;
pub mod pcg;
pub mod precond;
pub mod sip;
pub mod synthetic;
mod tridiag;

pub use colgen::{
    iterate_preconditioner, pricing, sparsity_score, IterateConfig, IterateRecord, IterateTrace,
    PatternScore, PricingNorm, ScoreConfig,
};
pub use eigsolve::{
    lanczos_both, lanczos_extreme, lanczos_extreme_until, separation_probe, EigResult,
    ExtremePairs, LanczosConfig, ProbeOutcome, ProbeReport, Which,
};
pub use error::{EigError, Error, LpError, MmioError, OperatorError, Result};
pub use lp::{solve_lp, solve_lp_warm, LpProblem, LpSolution, LpStatus, RowOrigin};
pub use mmio::{parse_matrix_market, read_matrix_market, write_matrix_market, write_matrix_market_to};
pub use operator::{
    matvec, scaled_operator, Block, ConstraintOperator, DiagonalVec, LinearOperator,
    ScaledOperator, SparseSymMatrix,
};
pub use pcg::{gaussian_rhs, pcg_solve, PcgReport};
pub use precond::{
    baseline, estimate_condition_number, jacobi, lambda_min_lower_bound, optimize_in_subspace,
    preconditioned_kappa, random_subspace, ruiz, scaled_row_norms, ConditionEstimate, Method,
    PrecondResult,
};
pub use sip::{
    dual_diag, extract_feasible, init_cuts, solve_subspace_sdp, Basis, Cut, CutSet, Extraction,
    SipConfig, SipRound, SipSolution, SipStatus, write_trace_csv,
};
pub use synthetic::{generate_synthetic, EntryDist};
