//! Cutting-plane solver for the subspace preconditioning SDP
//!
//! ```text
//! max τ  s.t.  Σ Dᵢzᵢ − τM ⪰ 0,  M − Σ Dᵢzᵢ ⪰ 0
//! ```
//!
//! Each semidefinite constraint is replaced by the scalar inequalities
//! `⟨v, S v⟩ ≥ 0` for a growing set of vectors `v`, and a Lanczos oracle
//! supplies the next most violated vector.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::eigsolve::{separation_probe, LanczosConfig, ProbeOutcome};
use crate::error::{Error, Result};
use crate::lp::{solve_lp_warm, LpProblem, LpStatus, RowOrigin};
use crate::operator::{combine, dot, norm2, Block, ConstraintOperator, DiagonalVec, LinearOperator};

/// Residual allowed when expressing the all-ones vector in a basis.
const IDENTITY_TOL: f64 = 1e-12;
/// Relative residual below which a candidate basis vector counts as dependent.
const DEPENDENCE_TOL: f64 = 1e-10;

/// Ordered spanning set of a preconditioner subspace.
#[derive(Debug, Clone)]
pub struct Basis {
    vectors: Vec<DiagonalVec>,
    identity_combo: Option<Vec<f64>>,
}

impl Basis {
    /// Fails if the vectors are empty, of unequal length, or linearly dependent.
    pub fn new(vectors: Vec<DiagonalVec>) -> Result<Self> {
        Self::build(vectors, false)
    }

    /// Drops vectors that are (numerically) in the span of earlier ones.
    pub fn new_dedup(vectors: Vec<DiagonalVec>) -> Result<Self> {
        Self::build(vectors, true)
    }

    fn build(vectors: Vec<DiagonalVec>, dedup: bool) -> Result<Self> {
        let Some(first) = vectors.first() else {
            return Err(Error::InvalidArgument("basis must contain at least one vector".into()));
        };
        let n = first.len();
        if let Some(v) = vectors.iter().find(|v| v.len() != n) {
            return Err(Error::InvalidArgument(format!(
                "basis vectors have lengths {n} and {}",
                v.len()
            )));
        }
        // Modified Gram-Schmidt: q holds orthonormal columns, r the
        // triangular factor of the kept vectors.
        let mut kept = Vec::new();
        let mut q: Vec<Vec<f64>> = Vec::new();
        let mut r: Vec<Vec<f64>> = Vec::new();
        for v in vectors {
            let mut w = v.as_slice().to_vec();
            let orig = norm2(&w);
            let mut coeffs = Vec::with_capacity(q.len() + 1);
            for qj in &q {
                let h = dot(qj, &w);
                w.iter_mut().zip(qj).for_each(|(x, y)| *x -= h * y);
                coeffs.push(h);
            }
            // Second pass for stability.
            for (j, qj) in q.iter().enumerate() {
                let h = dot(qj, &w);
                w.iter_mut().zip(qj).for_each(|(x, y)| *x -= h * y);
                coeffs[j] += h;
            }
            let rest = norm2(&w);
            if !(rest > DEPENDENCE_TOL * orig) {
                if dedup {
                    continue;
                }
                return Err(Error::DependentBasis);
            }
            w.iter_mut().for_each(|x| *x /= rest);
            coeffs.push(rest);
            q.push(w);
            r.push(coeffs);
            kept.push(v);
        }
        let identity_combo = identity_combo(&kept, &q, &r);
        Ok(Self {
            vectors: kept,
            identity_combo,
        })
    }

    pub fn k(&self) -> usize {
        self.vectors.len()
    }

    pub fn n(&self) -> usize {
        self.vectors[0].len()
    }

    pub fn vectors(&self) -> &[DiagonalVec] {
        &self.vectors
    }

    /// Coefficients `a` with `Σ aᵢdᵢ = 1`, when the all-ones vector is in the span.
    pub fn identity_combo(&self) -> Option<&[f64]> {
        self.identity_combo.as_deref()
    }

    /// `Σ zᵢdᵢ`.
    pub fn combine(&self, z: &[f64]) -> Vec<f64> {
        combine(&self.vectors, z, self.n())
    }

    /// Basis with every vector multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.vectors.iter().map(|v| v.scaled(c)).collect())
    }
}

fn identity_combo(vectors: &[DiagonalVec], q: &[Vec<f64>], r: &[Vec<f64>]) -> Option<Vec<f64>> {
    let n = vectors[0].len();
    let k = vectors.len();
    // Exact shortcut for a constant vector.
    for (i, v) in vectors.iter().enumerate() {
        let c = v[0];
        if c != 0.0 && v.as_slice().iter().all(|&x| x == c) {
            let mut a = vec![0.0; k];
            a[i] = 1.0 / c;
            if v.as_slice().iter().all(|&x| (x * a[i] - 1.0).abs() <= IDENTITY_TOL) {
                return Some(a);
            }
        }
    }
    // Least squares through the QR factors.
    let rhs: Vec<f64> = q.iter().map(|qj| qj.iter().sum()).collect();
    let mut a = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = rhs[i];
        for j in i + 1..k {
            s -= r[j][i] * a[j];
        }
        a[i] = s / r[i][i];
    }
    let combo = combine(vectors, &a, n);
    let resid = combo.iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max);
    (resid <= IDENTITY_TOL).then_some(a)
}

/// One cutting plane `⟨v, S v⟩ ≥ 0` with its cached coefficients.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cut {
    pub vector: Vec<f64>,
    /// `⟨v, Dᵢ v⟩` for each basis vector.
    pub coeffs: Vec<f64>,
    /// `⟨v, M v⟩`.
    pub mv: f64,
}

impl Cut {
    pub fn new<O: LinearOperator + ?Sized>(m: &O, basis: &Basis, mut vector: Vec<f64>) -> Result<Self> {
        if vector.len() != m.dim() {
            return Err(Error::InvalidArgument("cut vector has wrong length".into()));
        }
        let nrm = norm2(&vector);
        if !(nrm > 0.0 && nrm.is_finite()) {
            return Err(Error::InvalidArgument("cut vector must be nonzero and finite".into()));
        }
        vector.iter_mut().for_each(|x| *x /= nrm);
        let mv = dot(&vector, &m.apply(&vector));
        let coeffs = basis.vectors.iter().map(|d| d.quad(&vector)).collect();
        Ok(Self { vector, coeffs, mv })
    }

    /// LP row in the variables `(τ, z₁, …, z_k)` and its right-hand side.
    fn row(&self, block: Block) -> (Vec<f64>, f64) {
        match block {
            Block::One => {
                let mut row = Vec::with_capacity(self.coeffs.len() + 1);
                row.push(self.mv);
                row.extend(self.coeffs.iter().map(|c| -c));
                (row, 0.0)
            }
            Block::Two => {
                let mut row = Vec::with_capacity(self.coeffs.len() + 1);
                row.push(0.0);
                row.extend_from_slice(&self.coeffs);
                (row, self.mv)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CutSet {
    pub block: Block,
    pub cuts: Vec<Cut>,
}

impl CutSet {
    pub fn new(block: Block) -> Self {
        Self {
            block,
            cuts: Vec::new(),
        }
    }

    pub fn from_vectors<O: LinearOperator + ?Sized>(
        m: &O,
        basis: &Basis,
        block: Block,
        vectors: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let cuts = vectors
            .into_iter()
            .map(|v| Cut::new(m, basis, v))
            .collect::<Result<_>>()?;
        Ok(Self { block, cuts })
    }

    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }
}

fn gaussian(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// `n_init` random unit Gaussian cuts per block.
pub fn init_cuts<O: LinearOperator + ?Sized>(
    m: &O,
    basis: &Basis,
    n_init: usize,
    seed: u64,
) -> Result<(CutSet, CutSet)> {
    if n_init == 0 {
        return Err(Error::InvalidArgument("n_init must be at least 1".into()));
    }
    let n = m.dim();
    if basis.n() != n {
        return Err(Error::InvalidArgument(format!(
            "basis length {} does not match matrix dimension {n}",
            basis.n()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v1 = (0..n_init).map(|_| gaussian(n, &mut rng)).collect();
    let v2 = (0..n_init).map(|_| gaussian(n, &mut rng)).collect();
    Ok((
        CutSet::from_vectors(m, basis, Block::One, v1)?,
        CutSet::from_vectors(m, basis, Block::Two, v2)?,
    ))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SipConfig {
    /// Feasibility tolerance: constraints hold up to `−eps·I`.
    pub eps: f64,
    pub max_rounds: usize,
    pub n_init_cuts: usize,
    pub lanczos: LanczosConfig,
    pub lp_tol: f64,
    /// Random cuts added per block before an unbounded LP is given up on.
    pub max_unbounded_cuts: usize,
    /// Stop each oracle run as soon as a sufficiently negative Ritz value
    /// appears instead of converging the eigenpair.
    pub early_exit: bool,
    pub seed: u64,
    /// Wall-clock budget in seconds, checked between rounds.
    pub time_limit_s: Option<f64>,
}

impl Default for SipConfig {
    fn default() -> Self {
        Self {
            eps: 1e-10,
            max_rounds: 100,
            n_init_cuts: 20,
            lanczos: LanczosConfig::default(),
            lp_tol: crate::lp::DEFAULT_TOL,
            max_unbounded_cuts: 200,
            early_exit: false,
            seed: 0,
            time_limit_s: None,
        }
    }
}

impl SipConfig {
    fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(Error::InvalidArgument(format!("eps must be positive, got {}", self.eps)));
        }
        if self.max_rounds == 0 {
            return Err(Error::InvalidArgument("max_rounds must be at least 1".into()));
        }
        if self.time_limit_s.is_some_and(|t| !(t > 0.0)) {
            return Err(Error::InvalidArgument("time_limit_s must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SipStatus {
    Converged,
    IterLimit,
    OracleInconclusive,
    LpFailure,
    TimeLimit,
}

/// One cutting-plane round.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SipRound {
    pub round: usize,
    pub lam_min_block1: f64,
    pub lam_min_block2: f64,
    pub tau: f64,
    pub cuts1: usize,
    pub cuts2: usize,
    /// Cumulative oracle operator applications.
    pub lanczos_matvecs: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SipSolution {
    pub tau_hat: f64,
    pub z_hat: Vec<f64>,
    pub tau_prime: Option<f64>,
    pub z_prime: Option<Vec<f64>>,
    pub cuts1: CutSet,
    pub cuts2: CutSet,
    pub dual_weights1: Vec<f64>,
    pub dual_weights2: Vec<f64>,
    pub trace: Vec<SipRound>,
    pub status: SipStatus,
    /// Tolerance the solution is feasible to.
    pub eps: f64,
    /// All products with `M`, including cut set-up and oracle runs.
    pub matvecs: usize,
    /// Oracle products only.
    pub lanczos_matvecs: usize,
    pub lp_solves: usize,
    /// Random cuts added to restore boundedness.
    pub unbounded_cuts: usize,
}

impl SipSolution {
    pub fn rounds(&self) -> usize {
        self.trace.len()
    }

    /// `⟨M, X₂⟩` from block-One duals (should be 1).
    pub fn x2_mass(&self) -> f64 {
        self.cuts1.cuts.iter().zip(&self.dual_weights1).map(|(c, y)| y * c.mv).sum()
    }

    /// `⟨M, X₁⟩` from block-Two duals (should equal `τ̂`).
    pub fn x1_mass(&self) -> f64 {
        self.cuts2.cuts.iter().zip(&self.dual_weights2).map(|(c, y)| y * c.mv).sum()
    }
}

/// SplitMix64 finalizer, used to derive independent oracle seeds.
pub(crate) fn mix_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed
        .wrapping_add(a.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(b.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn build_lp(cuts1: &CutSet, cuts2: &CutSet, k: usize) -> LpProblem {
    let mut c = vec![0.0; k + 1];
    c[0] = 1.0;
    let mut lp = LpProblem::new(c);
    for cut in &cuts1.cuts {
        let (row, rhs) = cut.row(Block::One);
        lp.push_row(row, rhs, RowOrigin::CutBlock1);
    }
    for cut in &cuts2.cuts {
        let (row, rhs) = cut.row(Block::Two);
        lp.push_row(row, rhs, RowOrigin::CutBlock2);
    }
    lp
}

/// Runs the cutting-plane loop until both blocks are certified `eps`-feasible.
///
/// Returns `Ok` whenever at least one LP was solved; the status then tells
/// how the loop ended. Fails only if no LP iterate could be produced.
pub fn solve_subspace_sdp<O: LinearOperator + ?Sized>(
    m: &O,
    basis: &Basis,
    cfg: &SipConfig,
) -> Result<SipSolution> {
    cfg.validate()?;
    let started = std::time::Instant::now();
    let n = m.dim();
    let k = basis.k();
    let (mut cuts1, mut cuts2) = init_cuts(m, basis, cfg.n_init_cuts, cfg.seed)?;
    let mut matvecs = 2 * cfg.n_init_cuts;
    let mut lanczos_matvecs = 0usize;
    let mut extra_rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, u64::MAX, 0));
    let mut unbounded_cuts = 0usize;
    let mut lp_solves = 0usize;
    let mut trace: Vec<SipRound> = Vec::new();
    // (τ, z, block-One multipliers, block-Two multipliers) of the last LP.
    let mut best: Option<LpIterate> = None;
    let mut status = SipStatus::IterLimit;

    let mut warm: [Option<Vec<f64>>; 2] = [None, None];
    // Last optimal LP basis and the block-One row count it was built with.
    let mut lp_basis: Option<(Vec<usize>, usize)> = None;
    let mut round = 0usize;
    while round < cfg.max_rounds {
        let lp = build_lp(&cuts1, &cuts2, k);
        let warm_rows = lp_basis.as_ref().map(|(b, c1)| shift_block_two(b, *c1, cuts1.len()));
        let sol = match solve_lp_warm(&lp, cfg.lp_tol, warm_rows.as_deref()) {
            Ok(s) => s,
            Err(e) => {
                if best.is_none() {
                    return Err(Error::LpFailure(e.to_string()));
                }
                status = SipStatus::LpFailure;
                break;
            }
        };
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Unbounded => {
                if unbounded_cuts >= cfg.max_unbounded_cuts {
                    if best.is_none() {
                        return Err(Error::UnboundednessCapExceeded(unbounded_cuts));
                    }
                    status = SipStatus::LpFailure;
                    break;
                }
                cuts1.cuts.push(Cut::new(m, basis, gaussian(n, &mut extra_rng))?);
                cuts2.cuts.push(Cut::new(m, basis, gaussian(n, &mut extra_rng))?);
                matvecs += 2;
                unbounded_cuts += 1;
                continue;
            }
            LpStatus::Infeasible => {
                if best.is_none() {
                    return Err(Error::LpFailure("cutting-plane LP reported infeasible".into()));
                }
                status = SipStatus::LpFailure;
                break;
            }
        }
        lp_solves += 1;
        round += 1;
        lp_basis = sol.basis.clone().map(|b| (b, cuts1.len()));
        let tau = sol.x[0];
        let z = sol.x[1..].to_vec();
        let (y1, y2) = sol.y.split_at(cuts1.len());
        best = Some((tau, z.clone(), y1.to_vec(), y2.to_vec()));

        let mut lam = [f64::NAN; 2];
        let mut violated: Vec<(Block, Vec<f64>)> = Vec::new();
        let mut inconclusive = false;
        for (bi, block) in [Block::One, Block::Two].into_iter().enumerate() {
            let op = ConstraintOperator::new(m, basis.vectors(), &z, tau, block)?;
            let mut lcfg = cfg.lanczos.with_seed(mix_seed(cfg.seed, round as u64, bi as u64 + 1));
            lcfg.start = warm[bi].take();
            let probe = separation_probe(&op, cfg.eps, &lcfg, cfg.early_exit)?;
            warm[bi] = Some(probe.vector.clone());
            lanczos_matvecs += probe.matvecs;
            matvecs += probe.matvecs;
            lam[bi] = probe.lambda();
            match probe.outcome {
                ProbeOutcome::Feasible { .. } => {}
                ProbeOutcome::Violated { vector, .. } => violated.push((block, vector)),
                ProbeOutcome::Inconclusive { .. } => inconclusive = true,
            }
        }
        trace.push(SipRound {
            round,
            lam_min_block1: lam[0],
            lam_min_block2: lam[1],
            tau,
            cuts1: cuts1.len(),
            cuts2: cuts2.len(),
            lanczos_matvecs,
        });
        if violated.is_empty() {
            status = if inconclusive {
                SipStatus::OracleInconclusive
            } else {
                SipStatus::Converged
            };
            break;
        }
        if round >= cfg.max_rounds {
            break;
        }
        if cfg.time_limit_s.is_some_and(|t| started.elapsed().as_secs_f64() >= t) {
            status = SipStatus::TimeLimit;
            break;
        }
        for (block, v) in violated {
            let cut = Cut::new(m, basis, v)?;
            matvecs += 1;
            match block {
                Block::One => cuts1.cuts.push(cut),
                Block::Two => cuts2.cuts.push(cut),
            }
        }
    }

    let Some((tau_hat, z_hat, y1, y2)) = best else {
        return Err(Error::LpFailure("no LP solve completed".into()));
    };
    // Cuts added after the last LP solve carry no multiplier.
    let mut dual_weights1 = y1;
    dual_weights1.resize(cuts1.len(), 0.0);
    let mut dual_weights2 = y2;
    dual_weights2.resize(cuts2.len(), 0.0);
    Ok(SipSolution {
        tau_hat,
        z_hat,
        tau_prime: None,
        z_prime: None,
        cuts1,
        cuts2,
        dual_weights1,
        dual_weights2,
        trace,
        status,
        eps: cfg.eps,
        matvecs,
        lanczos_matvecs,
        lp_solves,
        unbounded_cuts,
    })
}

type LpIterate = (f64, Vec<f64>, Vec<f64>, Vec<f64>);

/// Block-Two rows follow the block-One rows, so appending block-One cuts
/// moves them.
fn shift_block_two(basis: &[usize], old_c1: usize, new_c1: usize) -> Vec<usize> {
    basis
        .iter()
        .map(|&j| if j >= old_c1 && j < usize::MAX / 2 { j - old_c1 + new_c1 } else { j })
        .collect()
}

/// The shifted pair `(τ̂ − 2ε/λ, ẑ − ε·a)`, exactly feasible whenever
/// `(τ̂, ẑ)` is `ε`-feasible, `Σ aᵢDᵢ = I` and `λ ≤ λmin(M)`.
pub fn shift_to_feasible(tau_hat: f64, z_hat: &[f64], a: &[f64], eps: f64, lambda_min: f64) -> (f64, Vec<f64>) {
    let tau = tau_hat - 2.0 * eps / lambda_min;
    let z = z_hat.iter().zip(a).map(|(z, a)| z - eps * a).collect();
    (tau, z)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Extraction {
    pub tau_prime: f64,
    pub z_prime: Vec<f64>,
    /// Infeasibility level the shift was computed for.
    pub eps_used: f64,
    /// Oracle `λmin` of each block at the shifted point.
    pub lambda_block1: f64,
    pub lambda_block2: f64,
    pub matvecs: usize,
}

/// Shifts an `eps`-feasible solution to an exactly feasible one and checks
/// both blocks with the oracle.
///
/// The shift first uses the infeasibility measured in the final round, which
/// is usually far below `eps`, and falls back to `eps` if that point fails
/// verification. `lambda_min_m` must be a lower bound on `λmin(M)`.
pub fn extract_feasible<O: LinearOperator + ?Sized>(
    sol: &SipSolution,
    basis: &Basis,
    m: &O,
    lambda_min_m: f64,
    lanczos: &LanczosConfig,
) -> Result<Extraction> {
    let a = basis.identity_combo().ok_or(Error::NoIdentityCombo)?;
    if !(lambda_min_m > 0.0 && lambda_min_m.is_finite()) {
        return Err(Error::NonPositiveLambda(lambda_min_m));
    }
    let norm_m = sol
        .cuts1
        .cuts
        .iter()
        .chain(&sol.cuts2.cuts)
        .map(|c| c.mv)
        .fold(0.0, f64::max);
    let threshold = -1e-12 * norm_m;
    let mut candidates = Vec::with_capacity(2);
    if let Some(last) = sol.trace.last() {
        let violation = (-last.lam_min_block1).max(-last.lam_min_block2).max(0.0);
        let measured = violation + 10.0 * lanczos.rel_tol * norm_m;
        if measured.is_finite() && measured < sol.eps {
            candidates.push(measured);
        }
    }
    candidates.push(sol.eps);
    let mut matvecs = 0;
    let mut failure = None;
    for eps in candidates {
        let (tau_prime, z_prime) = shift_to_feasible(sol.tau_hat, &sol.z_hat, a, eps, lambda_min_m);
        let mut lams = [0.0; 2];
        let mut ok = true;
        for (bi, block) in [Block::One, Block::Two].into_iter().enumerate() {
            let op = ConstraintOperator::new(m, basis.vectors(), &z_prime, tau_prime, block)?;
            let res = crate::eigsolve::lanczos_extreme(
                &op,
                crate::eigsolve::Which::Smallest,
                &lanczos.with_seed(mix_seed(lanczos.seed, 0xE7, bi as u64)),
            )?;
            matvecs += res.matvecs;
            lams[bi] = res.value;
            if res.value < threshold {
                failure = Some(Error::VerificationFailed {
                    block,
                    lambda: res.value,
                    threshold,
                });
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(Extraction {
                tau_prime,
                z_prime,
                eps_used: eps,
                lambda_block1: lams[0],
                lambda_block2: lams[1],
                matvecs,
            });
        }
    }
    Err(failure.expect("at least one candidate was tried"))
}

/// `diag(X₁ − X₂)` where `X₁` collects the block-Two cuts (the multiplier of
/// `Σ Dᵢzᵢ ⪯ M`) and `X₂` the block-One cuts, normalized so `⟨M, X₂⟩ = 1`.
pub fn dual_diag(sol: &SipSolution) -> Result<DiagonalVec> {
    if sol.status != SipStatus::Converged {
        return Err(Error::NotConverged);
    }
    dual_diag_unchecked(sol)
}

pub(crate) fn dual_diag_unchecked(sol: &SipSolution) -> Result<DiagonalVec> {
    let n = sol
        .cuts1
        .cuts
        .first()
        .or(sol.cuts2.cuts.first())
        .map(|c| c.vector.len())
        .ok_or_else(|| Error::InvalidArgument("solution has no cuts".into()))?;
    let mut g = vec![0.0; n];
    for (cut, &y) in sol.cuts2.cuts.iter().zip(&sol.dual_weights2) {
        if y != 0.0 {
            g.iter_mut().zip(&cut.vector).for_each(|(g, v)| *g += y * v * v);
        }
    }
    for (cut, &y) in sol.cuts1.cuts.iter().zip(&sol.dual_weights1) {
        if y != 0.0 {
            g.iter_mut().zip(&cut.vector).for_each(|(g, v)| *g -= y * v * v);
        }
    }
    let mass = sol.x2_mass();
    if (mass - 1.0).abs() > 1e-7 && mass > 0.0 {
        g.iter_mut().for_each(|x| *x /= mass);
    }
    Ok(DiagonalVec::new(g)?)
}

/// Writes the per-round trace as CSV.
pub fn write_trace_csv<W: Write>(trace: &[SipRound], w: &mut W) -> std::io::Result<()> {
    writeln!(w, "round,lam_min_block1,lam_min_block2,tau,cuts1,cuts2,lanczos_matvecs")?;
    for r in trace {
        writeln!(
            w,
            "{},{:e},{:e},{:.17e},{},{},{}",
            r.round, r.lam_min_block1, r.lam_min_block2, r.tau, r.cuts1, r.cuts2, r.lanczos_matvecs
        )?;
    }
    Ok(())
}
