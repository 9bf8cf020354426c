//! Iterative preconditioner improvement by pricing on the dual diagonal, and
//! an off-diagonal sparsity-pattern score.

use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::eigsolve::{lanczos_both, LanczosConfig};
use crate::error::{Error, Result};
use crate::operator::{DiagonalVec, SparseSymMatrix};
use crate::precond::{optimize_in_subspace, Method, PrecondResult};
use crate::sip::{dual_diag, Basis, SipConfig, SipStatus};

/// Norm constraining the pricing direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PricingNorm {
    L1,
    #[default]
    L2,
    Linf,
}

impl FromStr for PricingNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" | "1" => Ok(Self::L1),
            "l2" | "2" => Ok(Self::L2),
            "linf" | "inf" => Ok(Self::Linf),
            other => Err(Error::InvalidArgument(format!("unknown pricing norm {other:?}"))),
        }
    }
}

impl std::fmt::Display for PricingNorm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::L1 => "l1",
            Self::L2 => "l2",
            Self::Linf => "linf",
        })
    }
}

/// The maximizer of `⟨d, g⟩` over `‖d‖_p = 1`.
pub fn pricing(g: &DiagonalVec, p: PricingNorm) -> Result<DiagonalVec> {
    let g = g.as_slice();
    if g.iter().all(|&x| x == 0.0) {
        return Err(Error::ZeroDualDiagonal);
    }
    let d = match p {
        PricingNorm::L2 => {
            let nrm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
            g.iter().map(|x| x / nrm).collect()
        }
        PricingNorm::Linf => g.iter().map(|&x| if x < 0.0 { -1.0 } else { 1.0 }).collect(),
        PricingNorm::L1 => {
            let mut best = 0;
            for (i, x) in g.iter().enumerate() {
                if x.abs() > g[best].abs() {
                    best = i;
                }
            }
            let mut d = vec![0.0; g.len()];
            d[best] = g[best].signum();
            d
        }
    };
    Ok(DiagonalVec::new(d)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterateConfig {
    pub sip: SipConfig,
    pub pricing: PricingNorm,
    /// Number of outer iterations.
    pub iterations: usize,
    /// Iteration stops once `‖g‖∞ ≤ stall_tol·(1 + τ̂)`.
    pub stall_tol: f64,
}

impl Default for IterateConfig {
    fn default() -> Self {
        Self {
            sip: SipConfig::default(),
            pricing: PricingNorm::L2,
            iterations: 5,
            stall_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterateRecord {
    pub t: usize,
    pub d_best: DiagonalVec,
    /// Best bound so far.
    pub kappa_bound: f64,
    /// Bound of this iteration's subspace solve.
    pub round_kappa: f64,
    pub tau: f64,
    pub pricing_norm: PricingNorm,
    /// `‖g‖∞` of the dual diagonal.
    pub g_norm: f64,
    pub sip_rounds: usize,
    pub cuts: usize,
    pub matvecs_cumulative: usize,
    pub certified: bool,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct IterateTrace {
    pub records: Vec<IterateRecord>,
    /// The dual diagonal vanished: the whole-space optimum was reached.
    pub stalled: bool,
}

impl IterateTrace {
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "t,kappa_bound,tau,cuts,matvecs")?;
        for r in &self.records {
            writeln!(w, "{},{:e},{:e},{},{}", r.t, r.kappa_bound, r.tau, r.cuts, r.matvecs_cumulative)?;
        }
        Ok(())
    }
}

/// Repeatedly optimizes over `span{d_best, d̂, 1}` where `d̂` is the
/// pricing direction from the previous solve. The first solve uses
/// `span{d0, 1}`. The best preconditioner seen is kept.
pub fn iterate_preconditioner(
    m: &SparseSymMatrix,
    d0: &DiagonalVec,
    cfg: &IterateConfig,
) -> Result<(PrecondResult, IterateTrace)> {
    if cfg.iterations == 0 {
        return Err(Error::InvalidArgument("iteration count must be at least 1".into()));
    }
    if d0.len() != m.n() || !d0.is_positive() {
        return Err(Error::InvalidArgument("initial diagonal must be strictly positive with matching length".into()));
    }
    if !(cfg.stall_tol >= 0.0) {
        return Err(Error::InvalidArgument("stall_tol must be nonnegative".into()));
    }
    let n = m.n();
    let mut best: Option<PrecondResult> = None;
    let mut direction: Option<DiagonalVec> = None;
    let mut trace = IterateTrace::default();
    let mut matvecs = 0usize;
    for t in 1..=cfg.iterations {
        let d_best = best.as_ref().map_or_else(|| d0.clone(), |b| b.d.clone());
        let mut vectors = vec![d_best];
        vectors.extend(direction.take());
        vectors.push(DiagonalVec::ones(n));
        let basis = Basis::new_dedup(vectors)?;
        let mut sipcfg = cfg.sip.clone();
        sipcfg.seed = crate::sip::mix_seed(cfg.sip.seed, t as u64, 0xC0);
        let res = optimize_in_subspace(m, &basis, &sipcfg)?;
        matvecs += res.matvecs;
        let sol = res.sip.as_ref().expect("subspace result carries its solve");
        let (sip_rounds, cuts, tau_hat, converged) =
            (sol.rounds(), sol.cuts1.len() + sol.cuts2.len(), sol.tau_hat, sol.status == SipStatus::Converged);
        let g = if converged { Some(dual_diag(sol)?) } else { None };
        let round_kappa = res.kappa_bound;
        let improved = best.as_ref().is_none_or(|b| round_kappa < b.kappa_bound);
        if improved {
            best = Some(PrecondResult {
                method: Method::Iterative,
                ..res
            });
        }
        let b = best.as_ref().expect("set above");
        let g_norm = g.as_ref().map_or(f64::NAN, |g| g.as_slice().iter().fold(0.0, |a, x| a.max(x.abs())));
        trace.records.push(IterateRecord {
            t,
            d_best: b.d.clone(),
            kappa_bound: b.kappa_bound,
            round_kappa,
            tau: b.tau,
            pricing_norm: cfg.pricing,
            g_norm,
            sip_rounds,
            cuts,
            matvecs_cumulative: matvecs,
            certified: b.certified,
        });
        match g {
            Some(g) if g_norm > cfg.stall_tol * (1.0 + tau_hat) => direction = Some(pricing(&g, cfg.pricing)?),
            Some(_) => {
                trace.stalled = true;
                break;
            }
            None => {}
        }
    }
    let mut out = best.expect("at least one iteration ran");
    out.matvecs = matvecs;
    Ok((out, trace))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreConfig {
    pub lanczos: LanczosConfig,
    /// Largest dimension for which the full matrix is returned.
    pub dense_cap: usize,
    /// Entries kept above `dense_cap`.
    pub top_q: usize,
    /// Relative Ritz gap below which an extreme eigenvalue counts as repeated.
    pub gap_tol: f64,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        Self {
            lanczos: LanczosConfig::default(),
            dense_cap: 100,
            top_q: 50,
            gap_tol: 1e-8,
        }
    }
}

/// `|vmax vmaxᵀ − vmin vminᵀ|`, as a full matrix or its largest entries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PatternScore {
    pub n: usize,
    /// Row-major `n×n` scores when `n ≤ dense_cap`.
    pub dense: Option<Vec<f64>>,
    /// `(i, j, score)` with `i ≤ j`, by decreasing score.
    pub top: Vec<(usize, usize, f64)>,
    pub warnings: Vec<String>,
    pub matvecs: usize,
}

impl PatternScore {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.dense.as_ref().map(|d| d[i * self.n + j])
    }

    /// Writes `i,j,score` rows, both triangles of the dense matrix or the
    /// kept entries mirrored.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "i,j,score")?;
        if let Some(d) = &self.dense {
            for i in 0..self.n {
                for j in 0..self.n {
                    writeln!(w, "{i},{j},{:e}", d[i * self.n + j])?;
                }
            }
        } else {
            for &(i, j, s) in &self.top {
                writeln!(w, "{i},{j},{s:e}")?;
                if i != j {
                    writeln!(w, "{j},{i},{s:e}")?;
                }
            }
        }
        Ok(())
    }
}

pub fn sparsity_score(m: &SparseSymMatrix, cfg: &ScoreConfig) -> Result<PatternScore> {
    let n = m.n();
    let pairs = lanczos_both(m, &cfg.lanczos)?;
    if !pairs.smallest.converged || !pairs.largest.converged {
        return Err(Error::NotConverged);
    }
    let mut warnings = Vec::new();
    let scale = pairs.largest.value.abs().max(f64::MIN_POSITIVE);
    if n >= 2 && pairs.gap_low <= cfg.gap_tol * scale {
        warnings.push(format!("smallest eigenvalue may be repeated (gap {:e})", pairs.gap_low));
    }
    if n >= 2 && pairs.gap_high <= cfg.gap_tol * scale {
        warnings.push(format!("largest eigenvalue may be repeated (gap {:e})", pairs.gap_high));
    }
    let a = &pairs.largest.vector;
    let b = &pairs.smallest.vector;
    let entry = |i: usize, j: usize| (a[i] * a[j] - b[i] * b[j]).abs();
    let q = cfg.top_q;
    if n <= cfg.dense_cap {
        let mut dense = vec![0.0; n * n];
        let mut all = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in 0..n {
                dense[i * n + j] = entry(i, j);
            }
            for j in i..n {
                all.push((i, j, dense[i * n + j]));
            }
        }
        all.sort_by(|x, y| y.2.total_cmp(&x.2));
        all.truncate(q);
        return Ok(PatternScore {
            n,
            dense: Some(dense),
            top: all,
            warnings,
            matvecs: pairs.matvecs,
        });
    }
    // Large entries need a large coordinate in one of the two vectors, so
    // only pairs among the leading coordinates of each are scanned.
    let lead = ((4.0 * (q as f64).sqrt()).ceil() as usize + 4).min(n);
    let mut cand: Vec<usize> = Vec::new();
    for v in [a, b] {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.select_nth_unstable_by(lead - 1, |&x, &y| v[y].abs().total_cmp(&v[x].abs()));
        cand.extend_from_slice(&idx[..lead]);
    }
    cand.sort_unstable();
    cand.dedup();
    let mut top = Vec::new();
    for (s, &i) in cand.iter().enumerate() {
        for &j in &cand[s..] {
            top.push((i, j, entry(i, j)));
        }
    }
    top.sort_by(|x, y| y.2.total_cmp(&x.2));
    top.truncate(q);
    warnings.push(format!("top entries searched among {} leading coordinates", cand.len()));
    Ok(PatternScore {
        n,
        dense: None,
        top,
        warnings,
        matvecs: pairs.matvecs,
    })
}
