//! Lanczos iteration for extreme eigenpairs of symmetric black-box operators.
//!
//! The Krylov basis is fully reorthogonalized. When the basis reaches its
//! memory cap the iteration restarts explicitly from the current Ritz vector.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::EigError;
use crate::operator::{axpy, dot, norm2, LinearOperator};
use crate::tridiag;

/// Stored Lanczos vectors are capped at roughly this many bytes.
const BASIS_BYTES: usize = 256 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Which {
    Smallest,
    Largest,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LanczosConfig {
    pub rel_tol: f64,
    /// Total Lanczos steps; `None` means `min(n, 1200)`.
    pub max_iter: Option<usize>,
    /// Largest number of stored basis vectors before an explicit restart;
    /// `None` derives it from a fixed memory budget.
    pub max_basis: Option<usize>,
    pub seed: u64,
    /// Starting direction, blended with a random component; random when
    /// `None`.
    #[serde(skip)]
    pub start: Option<Vec<f64>>,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-14,
            max_iter: None,
            max_basis: None,
            seed: 0,
            start: None,
        }
    }
}

impl LanczosConfig {
    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn max_iter_for(&self, n: usize) -> usize {
        self.max_iter.unwrap_or(n.min(1200)).max(1)
    }

    fn max_basis_for(&self, n: usize) -> usize {
        let budget = (BASIS_BYTES / (8 * n.max(1))).max(8);
        self.max_basis.unwrap_or(budget).clamp(2, n.max(2))
    }

    fn validate(&self) -> Result<(), EigError> {
        if !(self.rel_tol > 0.0) {
            return Err(EigError::InvalidParameter(format!("rel_tol must be positive, got {}", self.rel_tol)));
        }
        if self.start.as_ref().is_some_and(|v| v.iter().any(|x| !x.is_finite())) {
            return Err(EigError::InvalidParameter("start vector is not finite".into()));
        }
        if self.max_iter == Some(0) {
            return Err(EigError::InvalidParameter("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigResult {
    pub value: f64,
    /// Unit-norm Ritz vector.
    pub vector: Vec<f64>,
    pub iterations: usize,
    /// True residual `‖Sv − λv‖` of the returned pair.
    pub residual: f64,
    pub converged: bool,
    /// Operator applications, including the final residual check.
    pub matvecs: usize,
    /// Largest Ritz value magnitude seen, a lower bound on `‖S‖`.
    pub norm_estimate: f64,
}

/// Both ends of the spectrum from one Krylov space.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtremePairs {
    pub smallest: EigResult,
    pub largest: EigResult,
    /// Distance from the smallest Ritz value to the next one.
    pub gap_low: f64,
    /// Distance from the largest Ritz value to the one below it.
    pub gap_high: f64,
    pub matvecs: usize,
}

impl ExtremePairs {
    pub fn condition_number(&self) -> f64 {
        self.largest.value / self.smallest.value
    }
}

/// Snapshot handed to a stop predicate after each convergence check.
#[derive(Debug, Clone, Copy)]
pub struct RitzSnapshot {
    pub iteration: usize,
    pub theta_min: f64,
    pub theta_max: f64,
    /// Residual estimates of the two extreme Ritz pairs.
    pub est_min: f64,
    pub est_max: f64,
}

pub fn lanczos_extreme<O: LinearOperator + ?Sized>(
    op: &O,
    which: Which,
    cfg: &LanczosConfig,
) -> Result<EigResult, EigError> {
    let out = run(op, cfg, &[which], None)?;
    Ok(out.into_iter().next().expect("one target"))
}

/// Like [`lanczos_extreme`], stopping early as soon as `stop` returns true.
pub fn lanczos_extreme_until<O: LinearOperator + ?Sized>(
    op: &O,
    which: Which,
    cfg: &LanczosConfig,
    stop: &mut dyn FnMut(RitzSnapshot) -> bool,
) -> Result<EigResult, EigError> {
    let out = run(op, cfg, &[which], Some(stop))?;
    Ok(out.into_iter().next().expect("one target"))
}

/// Smallest and largest eigenpairs from a shared Krylov space.
pub fn lanczos_both<O: LinearOperator + ?Sized>(
    op: &O,
    cfg: &LanczosConfig,
) -> Result<ExtremePairs, EigError> {
    let mut gaps = (f64::NAN, f64::NAN);
    let mut out = run_inner(op, cfg, &[Which::Smallest, Which::Largest], None, Some(&mut gaps))?;
    let largest = out.pop().expect("two targets");
    let smallest = out.pop().expect("two targets");
    let matvecs = smallest.matvecs;
    Ok(ExtremePairs {
        smallest,
        largest,
        gap_low: gaps.0,
        gap_high: gaps.1,
        matvecs,
    })
}

fn run<O: LinearOperator + ?Sized>(
    op: &O,
    cfg: &LanczosConfig,
    targets: &[Which],
    stop: Option<&mut dyn FnMut(RitzSnapshot) -> bool>,
) -> Result<Vec<EigResult>, EigError> {
    run_inner(op, cfg, targets, stop, None)
}

struct Basis {
    n: usize,
    data: Vec<f64>,
}

impl Basis {
    fn len(&self) -> usize {
        self.data.len() / self.n
    }

    fn get(&self, j: usize) -> &[f64] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    fn push(&mut self, v: &[f64]) {
        self.data.extend_from_slice(v);
    }

    fn clear(&mut self) {
        self.data.clear();
    }

    /// Inner products of `w` with stored vectors `start..`, four at a time.
    fn project(&self, start: usize, w: &[f64], h: &mut Vec<f64>) {
        h.clear();
        let m = self.len();
        let mut j = start;
        while j + 4 <= m {
            let (q0, q1, q2, q3) = (self.get(j), self.get(j + 1), self.get(j + 2), self.get(j + 3));
            let mut acc = [0.0f64; 4];
            for i in 0..self.n {
                let x = w[i];
                acc[0] += q0[i] * x;
                acc[1] += q1[i] * x;
                acc[2] += q2[i] * x;
                acc[3] += q3[i] * x;
            }
            h.extend_from_slice(&acc);
            j += 4;
        }
        for k in j..m {
            h.push(dot(self.get(k), w));
        }
    }

    /// `w ← w − Σ h_j q_{start+j}`, four vectors per sweep.
    fn subtract(&self, start: usize, h: &[f64], w: &mut [f64]) {
        let mut j = 0;
        while j + 4 <= h.len() {
            let b = start + j;
            let (q0, q1, q2, q3) = (self.get(b), self.get(b + 1), self.get(b + 2), self.get(b + 3));
            let (h0, h1, h2, h3) = (h[j], h[j + 1], h[j + 2], h[j + 3]);
            for i in 0..self.n {
                w[i] -= (h0 * q0[i] + h1 * q1[i]) + (h2 * q2[i] + h3 * q3[i]);
            }
            j += 4;
        }
        for (k, &hk) in h.iter().enumerate().skip(j) {
            axpy(-hk, self.get(start + k), w);
        }
    }

    /// Classical Gram-Schmidt against every stored vector, repeated once if
    /// the norm drops sharply. Adds the coefficients of the last stored
    /// vector to `last`.
    fn orthogonalize(&self, w: &mut [f64], h: &mut Vec<f64>) -> f64 {
        let mut last = 0.0;
        let mut before = norm2(w);
        for _pass in 0..2 {
            self.project(0, w, h);
            self.subtract(0, h, w);
            last += h.last().copied().unwrap_or(0.0);
            let after = norm2(w);
            if after > 0.7 * before {
                break;
            }
            before = after;
        }
        last
    }

    /// `Σ s_j q_j`.
    fn combine(&self, s: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (j, &sj) in s.iter().enumerate() {
            axpy(sj, self.get(j), &mut y);
        }
        y
    }
}

fn gaussian(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// A unit vector orthogonal to `basis`, or `None` after repeated failure.
fn fresh_vector(basis: &Basis, n: usize, rng: &mut ChaCha8Rng) -> Option<Vec<f64>> {
    for _ in 0..5 {
        let mut v = gaussian(n, rng);
        let before = norm2(&v);
        basis.orthogonalize(&mut v, &mut Vec::new());
        let nrm = norm2(&v);
        if nrm > 1e-8 * before && nrm.is_finite() {
            v.iter_mut().for_each(|x| *x /= nrm);
            return Some(v);
        }
    }
    None
}

#[derive(Clone)]
struct Ritz {
    value: f64,
    s: Vec<f64>,
    /// Estimated residual `β_m |s_m|`.
    est: f64,
}

fn ritz(alpha: &[f64], beta: &[f64], which: Which, beta_last: f64) -> Ritz {
    let e = match which {
        Which::Smallest => tridiag::smallest(alpha, beta),
        Which::Largest => tridiag::largest(alpha, beta),
    };
    let est = beta_last * e.vector.last().copied().unwrap_or(0.0).abs();
    Ritz {
        value: e.value,
        s: e.vector,
        est,
    }
}

fn run_inner<O: LinearOperator + ?Sized>(
    op: &O,
    cfg: &LanczosConfig,
    targets: &[Which],
    mut stop: Option<&mut dyn FnMut(RitzSnapshot) -> bool>,
    gaps: Option<&mut (f64, f64)>,
) -> Result<Vec<EigResult>, EigError> {
    cfg.validate()?;
    let n = op.dim();
    if n == 0 {
        return Err(EigError::InvalidParameter("operator dimension is zero".into()));
    }
    let max_iter = cfg.max_iter_for(n);
    let max_basis = cfg.max_basis_for(n);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut basis = Basis {
        n,
        data: Vec::with_capacity(max_basis.min(max_iter + 1) * n),
    };
    let mut q = {
        let empty = Basis { n, data: Vec::new() };
        let mut q = fresh_vector(&empty, n, &mut rng).ok_or(EigError::Breakdown)?;
        if let Some(s) = cfg.start.as_deref().filter(|s| s.len() == n) {
            let ns = norm2(s);
            if ns > 0.0 {
                q.iter_mut().zip(s).for_each(|(q, s)| *q = 0.1 * *q + s / ns);
                let nq = norm2(&q);
                q.iter_mut().for_each(|x| *x /= nq);
            }
        }
        q
    };
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut steps = 0usize;
    let mut matvecs = 0usize;
    let mut norm_est = 0.0f64;
    let mut converged = false;
    let mut last_ritz: Vec<Option<Ritz>> = targets.iter().map(|_| None).collect();
    let mut since_check = 0usize;
    let mut h_buf = Vec::new();

    loop {
        basis.push(&q);
        op.apply_into(&q, &mut w);
        matvecs += 1;
        steps += 1;
        if w.iter().any(|x| !x.is_finite()) {
            return Err(EigError::NonFinite);
        }
        // Local recurrence first so the reorthogonalization test sees only
        // the loss of orthogonality.
        let j = basis.len() - 1;
        let mut a = dot(basis.get(j), &w);
        axpy(-a, basis.get(j), &mut w);
        if j > 0 {
            axpy(-beta[j - 1], basis.get(j - 1), &mut w);
        }
        a += basis.orthogonalize(&mut w, &mut h_buf);
        alpha.push(a);
        let b = norm2(&w);
        norm_est = norm_est.max(a.abs()).max(b);

        let exhausted = basis.len() >= n;
        let breakdown = !exhausted && b <= 1e-13 * norm_est.max(f64::MIN_POSITIVE);
        since_check += 1;
        let stride = 1 + steps / 100;
        let must_check = exhausted || breakdown || steps >= max_iter || basis.len() >= max_basis;

        if must_check || since_check >= stride {
            since_check = 0;
            let beta_last = if exhausted || breakdown { 0.0 } else { b };
            let want_lo = stop.is_some() || targets.contains(&Which::Smallest);
            let want_hi = stop.is_some() || targets.contains(&Which::Largest);
            let pair = [
                want_lo.then(|| ritz(&alpha, &beta, Which::Smallest, beta_last)),
                want_hi.then(|| ritz(&alpha, &beta, Which::Largest, beta_last)),
            ];
            for r in pair.iter().flatten() {
                norm_est = norm_est.max(r.value.abs());
            }
            let snapshot = RitzSnapshot {
                iteration: steps,
                theta_min: pair[0].as_ref().map_or(f64::NAN, |r| r.value),
                theta_max: pair[1].as_ref().map_or(f64::NAN, |r| r.value),
                est_min: pair[0].as_ref().map_or(f64::NAN, |r| r.est),
                est_max: pair[1].as_ref().map_or(f64::NAN, |r| r.est),
            };
            for (slot, which) in last_ritz.iter_mut().zip(targets) {
                let idx = if *which == Which::Smallest { 0 } else { 1 };
                *slot = pair[idx].clone();
            }
            let tol = cfg.rel_tol * norm_est;
            let all_conv = last_ritz.iter().all(|r| r.as_ref().is_some_and(|r| r.est <= tol));
            if exhausted || (all_conv && !breakdown) {
                converged = true;
                break;
            }
            if let Some(f) = stop.as_deref_mut() {
                if f(snapshot) {
                    break;
                }
            }
            if steps >= max_iter {
                break;
            }
            if basis.len() >= max_basis {
                // Explicit restart from the current Ritz vector(s).
                let mut y = vec![0.0; n];
                for r in last_ritz.iter().flatten() {
                    let v = basis.combine(&r.s);
                    y.iter_mut().zip(&v).for_each(|(a, b)| *a += b);
                }
                let nrm = norm2(&y);
                basis.clear();
                alpha.clear();
                beta.clear();
                last_ritz.iter_mut().for_each(|r| *r = None);
                q = if nrm > 0.0 && nrm.is_finite() {
                    y.into_iter().map(|x| x / nrm).collect()
                } else {
                    fresh_vector(&basis, n, &mut rng).ok_or(EigError::Breakdown)?
                };
                continue;
            }
        }

        if breakdown {
            q = fresh_vector(&basis, n, &mut rng).ok_or(EigError::Breakdown)?;
            beta.push(0.0);
        } else {
            beta.push(b);
            q = w.iter().map(|x| x / b).collect();
        }
    }

    if let Some(g) = gaps {
        let m = alpha.len();
        if m >= 2 {
            let lo = tridiag::kth_eigenvalue(&alpha, &beta[..m - 1], 0);
            let hi = tridiag::kth_eigenvalue(&alpha, &beta[..m - 1], m - 1);
            *g = (
                tridiag::kth_eigenvalue(&alpha, &beta[..m - 1], 1) - lo,
                hi - tridiag::kth_eigenvalue(&alpha, &beta[..m - 1], m - 2),
            );
        } else {
            *g = (f64::NAN, f64::NAN);
        }
    }

    let mut results = Vec::with_capacity(targets.len());
    for r in last_ritz.into_iter() {
        let r = r.expect("checked before leaving the loop");
        let mut y = basis.combine(&r.s);
        let nrm = norm2(&y);
        if !(nrm > 0.0 && nrm.is_finite()) {
            return Err(EigError::NonFinite);
        }
        y.iter_mut().for_each(|x| *x /= nrm);
        op.apply_into(&y, &mut w);
        matvecs += 1;
        let value = dot(&y, &w);
        let residual = w
            .iter()
            .zip(&y)
            .map(|(a, b)| (a - value * b).powi(2))
            .sum::<f64>()
            .sqrt();
        if !value.is_finite() || !residual.is_finite() {
            return Err(EigError::NonFinite);
        }
        norm_est = norm_est.max(value.abs());
        results.push(EigResult {
            value,
            vector: y,
            iterations: steps,
            residual,
            converged,
            matvecs: 0,
            norm_estimate: norm_est,
        });
    }
    for r in &mut results {
        r.matvecs = matvecs;
        r.norm_estimate = norm_est;
    }
    Ok(results)
}

/// Outcome of checking one constraint block for negative curvature.
#[derive(Debug, Clone)]
pub enum ProbeOutcome {
    Feasible { lambda: f64 },
    Violated { vector: Vec<f64>, lambda: f64 },
    Inconclusive { lambda: f64, residual: f64 },
}

#[derive(Debug, Clone)]
pub struct ProbeReport {
    pub outcome: ProbeOutcome,
    /// Final Ritz vector, useful to start the next probe.
    pub vector: Vec<f64>,
    pub matvecs: usize,
    pub iterations: usize,
}

impl ProbeReport {
    /// Best available estimate of `λmin`.
    pub fn lambda(&self) -> f64 {
        match self.outcome {
            ProbeOutcome::Feasible { lambda }
            | ProbeOutcome::Violated { lambda, .. }
            | ProbeOutcome::Inconclusive { lambda, .. } => lambda,
        }
    }
}

/// A violated Ritz pair is accepted as a cut once its residual estimate is
/// below this fraction of the violation.
const CUT_RESIDUAL: f64 = 0.1;

/// The residual must also be below this fraction of the spectral radius,
/// so that cut vectors are accurate eigenvector approximations.
const CUT_ABS_RESIDUAL: f64 = 1e-8;

/// Separation oracle: either certifies `λmin(op) > −eps` or returns a unit
/// vector with `⟨v, op v⟩ ≤ −eps`.
///
/// With `early_exit`, the Lanczos run stops once a Ritz value falls below
/// `−2·eps`, without waiting for the pair to settle; the cut is then valid
/// but less sharp.
pub fn separation_probe<O: LinearOperator + ?Sized>(
    op: &O,
    eps: f64,
    cfg: &LanczosConfig,
    early_exit: bool,
) -> Result<ProbeReport, EigError> {
    if !(eps > 0.0) {
        return Err(EigError::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let mut total = 0usize;
    let mut iters = 0usize;
    for attempt in 0..2 {
        let res = if early_exit && attempt == 0 {
            lanczos_extreme_until(op, Which::Smallest, cfg, &mut |s| s.theta_min < -2.0 * eps)?
        } else {
            lanczos_extreme_until(op, Which::Smallest, cfg, &mut |s| {
                let radius = s.theta_min.abs().max(s.theta_max.abs());
                s.theta_min <= -2.0 * eps
                    && s.est_min <= CUT_RESIDUAL * s.theta_min.abs()
                    && s.est_min <= CUT_ABS_RESIDUAL * radius
            })?
        };
        total += res.matvecs;
        iters += res.iterations;
        let q = res.value;
        let outcome = if q <= -eps {
            ProbeOutcome::Violated {
                vector: res.vector.clone(),
                lambda: q,
            }
        } else if res.converged || q - res.residual > -eps {
            ProbeOutcome::Feasible { lambda: q }
        } else {
            if early_exit && attempt == 0 && res.iterations < cfg.max_iter_for(op.dim()) {
                continue;
            }
            ProbeOutcome::Inconclusive {
                lambda: q,
                residual: res.residual,
            }
        };
        return Ok(ProbeReport {
            outcome,
            vector: res.vector,
            matvecs: total,
            iterations: iters,
        });
    }
    unreachable!("second attempt always returns")
}
