//! Diagonal preconditioners: heuristic baselines, subspace optimization and
//! condition-number estimation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::eigsolve::{lanczos_both, lanczos_extreme, LanczosConfig, Which};
use crate::error::{Error, Result};
use crate::operator::{scaled_operator, DiagonalVec, LinearOperator, SparseSymMatrix};
use crate::sip::{extract_feasible, solve_subspace_sdp, Basis, SipConfig, SipSolution, SipStatus};

/// How a preconditioner was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    Jacobi,
    Ruiz,
    Subspace,
    Iterative,
    Identity,
}

#[derive(Debug, Clone)]
pub struct PrecondResult {
    /// Strictly positive diagonal.
    pub d: DiagonalVec,
    /// Upper bound on the preconditioned condition number.
    pub kappa_bound: f64,
    /// Whether `kappa_bound` is backed by an exactly feasible, verified point.
    pub certified: bool,
    /// The `τ` behind `kappa_bound`.
    pub tau: f64,
    pub method: Method,
    /// Basis coefficients of `d`.
    pub z: Vec<f64>,
    pub sip: Option<SipSolution>,
    /// Operator applications spent, including verification.
    pub matvecs: usize,
}

/// `d = diag(M)`.
pub fn jacobi(m: &SparseSymMatrix) -> Result<DiagonalVec> {
    let d = m.diagonal();
    if let Some((i, &x)) = d.iter().enumerate().find(|(_, &x)| !(x > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "diagonal entry {i} is {x}; the matrix is not positive definite"
        )));
    }
    Ok(DiagonalVec::new(d)?)
}

/// Symmetric infinity-norm equilibration: repeatedly divides row and column
/// `i` by the square root of the scaled row norm. Stops once every scaled
/// row norm is within `tol` of one, or after `max_sweeps`.
pub fn ruiz(m: &SparseSymMatrix, max_sweeps: usize, tol: f64) -> Result<DiagonalVec> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    let n = m.n();
    let mut d = vec![1.0; n];
    for _ in 0..max_sweeps {
        let r = scaled_row_norms(m, &d);
        if let Some(i) = r.iter().position(|&x| !(x > 0.0)) {
            return Err(Error::InvalidArgument(format!("row {i} is zero")));
        }
        if r.iter().all(|x| (x - 1.0).abs() <= tol) {
            break;
        }
        d.iter_mut().zip(&r).for_each(|(d, r)| *d *= r);
    }
    Ok(DiagonalVec::new(d)?)
}

/// Row infinity norms of `diag(d)^{-1/2} M diag(d)^{-1/2}`.
pub fn scaled_row_norms(m: &SparseSymMatrix, d: &[f64]) -> Vec<f64> {
    let s: Vec<f64> = d.iter().map(|x| 1.0 / x.sqrt()).collect();
    (0..m.n())
        .map(|i| m.row(i).map(|(j, v)| (v * s[i] * s[j]).abs()).fold(0.0, f64::max))
        .collect()
}

/// `{1} ∪ {k draws from Uniform[−0.5, 0.5]ⁿ}`. The vectors come from one
/// stream, so the basis for `k` is a prefix of the basis for `k + 1`.
pub fn random_subspace(n: usize, k: usize, seed: u64) -> Result<Basis> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vectors = vec![DiagonalVec::ones(n)];
    for _ in 0..k {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..=0.5)).collect();
        vectors.push(DiagonalVec::new(v)?);
    }
    Basis::new(vectors)
}

/// A lower bound on `λmin(M)` from one Lanczos run, with its cost.
pub fn lambda_min_lower_bound<O: LinearOperator + ?Sized>(m: &O, cfg: &LanczosConfig) -> Result<(f64, usize)> {
    let r = lanczos_extreme(m, Which::Smallest, cfg)?;
    let lb = r.value - r.residual.max(1e-15 * r.norm_estimate);
    if !(lb > 0.0) {
        return Err(Error::NonPositiveLambda(lb));
    }
    Ok((lb, r.matvecs))
}

/// Condition number of `diag(d)^{-1/2} M diag(d)^{-1/2}` by Lanczos.
pub fn preconditioned_kappa<O: LinearOperator>(m: O, d: &DiagonalVec, cfg: &LanczosConfig) -> Result<(f64, usize)> {
    let op = scaled_operator(m, d)?;
    let p = lanczos_both(&op, cfg)?;
    if !(p.smallest.value > 0.0) {
        return Err(Error::NonPositiveLambda(p.smallest.value));
    }
    Ok((p.condition_number(), p.matvecs))
}

/// The best diagonal preconditioner in `span(basis)`.
///
/// The cutting-plane solution is shifted to an exactly feasible point and
/// verified; `kappa_bound` is then certified. Without a converged run or an
/// identity combination the bound is `1/τ̂` and uncertified. A combination
/// with nonpositive entries is clamped and re-measured.
pub fn optimize_in_subspace(m: &SparseSymMatrix, basis: &Basis, cfg: &SipConfig) -> Result<PrecondResult> {
    let sol = solve_subspace_sdp(m, basis, cfg)?;
    let mut matvecs = sol.matvecs;
    let mut certified = false;
    let mut tau = sol.tau_hat;
    let mut z = sol.z_hat.clone();
    if sol.status == SipStatus::Converged && basis.identity_combo().is_some() {
        let (lb, mv) = lambda_min_lower_bound(m, &cfg.lanczos)?;
        matvecs += mv;
        let ex = extract_feasible(&sol, basis, m, lb, &cfg.lanczos)?;
        matvecs += ex.matvecs;
        if ex.tau_prime > 0.0 {
            tau = ex.tau_prime;
            z = ex.z_prime;
            certified = true;
        }
    }
    if !(tau > 0.0) {
        return Err(Error::NonPositivePreconditioner);
    }
    let raw = basis.combine(&z);
    let (d, kappa_bound, certified) = if raw.iter().all(|&x| x > 0.0) {
        (DiagonalVec::new(raw)?, 1.0 / tau, certified)
    } else {
        let (d, kappa, mv) = clamp_and_measure(m, raw, &cfg.lanczos)?;
        matvecs += mv;
        (d, kappa, false)
    };
    let mut sol = sol;
    sol.tau_prime = certified.then_some(tau);
    sol.z_prime = certified.then(|| z.clone());
    Ok(PrecondResult {
        d,
        kappa_bound,
        certified,
        tau: 1.0 / kappa_bound,
        method: Method::Subspace,
        z,
        sip: Some(sol),
        matvecs,
    })
}

/// Raises entries below `1e-8·max(d)` to that floor and measures the result.
fn clamp_and_measure(
    m: &SparseSymMatrix,
    mut raw: Vec<f64>,
    lanczos: &LanczosConfig,
) -> Result<(DiagonalVec, f64, usize)> {
    let top = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(top > 0.0) {
        return Err(Error::NonPositivePreconditioner);
    }
    let floor = 1e-8 * top;
    raw.iter_mut().for_each(|x| *x = x.max(floor));
    let d = DiagonalVec::new(raw)?;
    let (kappa, mv) = preconditioned_kappa(m, &d, lanczos).map_err(|_| Error::NonPositivePreconditioner)?;
    Ok((d, kappa, mv))
}

/// Output of [`estimate_condition_number`].
#[derive(Debug, Clone)]
pub struct ConditionEstimate {
    /// `1/τ̂`.
    pub kappa: f64,
    pub sip: SipSolution,
}

/// `κ(M)` as the reciprocal of the optimal `τ` over the subspace spanned by
/// the all-ones vector.
pub fn estimate_condition_number(m: &SparseSymMatrix, cfg: &SipConfig) -> Result<ConditionEstimate> {
    let basis = Basis::new(vec![DiagonalVec::ones(m.n())])?;
    let sip = solve_subspace_sdp(m, &basis, cfg)?;
    if !(sip.tau_hat > 0.0) {
        return Err(Error::NonPositiveLambda(sip.tau_hat));
    }
    Ok(ConditionEstimate {
        kappa: 1.0 / sip.tau_hat,
        sip,
    })
}

/// Wraps a heuristic diagonal with its measured condition number.
pub fn baseline(m: &SparseSymMatrix, d: DiagonalVec, method: Method, lanczos: &LanczosConfig) -> Result<PrecondResult> {
    let (kappa, matvecs) = preconditioned_kappa(m, &d, lanczos)?;
    Ok(PrecondResult {
        d,
        kappa_bound: kappa,
        certified: false,
        tau: 1.0 / kappa,
        method,
        z: Vec::new(),
        sip: None,
        matvecs,
    })
}
