//! Small dense linear programs `max cᵀx s.t. Ax ≤ b` with free `x`.
//!
//! The solver runs a two-phase revised simplex on the dual standard form
//! `min bᵀy s.t. Aᵀy = c, y ≥ 0`, whose basis has only `len(x)` columns.
//! The primal solution is read off the simplex multipliers.

use serde::{Deserialize, Serialize};

use crate::error::LpError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowOrigin {
    CutBlock1,
    CutBlock2,
    Auxiliary,
}

#[derive(Debug, Clone)]
pub struct LpProblem {
    pub c: Vec<f64>,
    /// Row-major constraint matrix.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub origin: Vec<RowOrigin>,
}

impl LpProblem {
    pub fn new(c: Vec<f64>) -> Self {
        Self {
            c,
            a: Vec::new(),
            b: Vec::new(),
            origin: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<f64>, rhs: f64, origin: RowOrigin) {
        self.a.push(row);
        self.b.push(rhs);
        self.origin.push(origin);
    }

    pub fn n_vars(&self) -> usize {
        self.c.len()
    }

    pub fn n_rows(&self) -> usize {
        self.a.len()
    }

    fn validate(&self) -> Result<(), LpError> {
        let p = self.c.len();
        if p == 0 {
            return Err(LpError::Malformed("no variables".into()));
        }
        if self.b.len() != self.a.len() || self.origin.len() != self.a.len() {
            return Err(LpError::Malformed("row counts disagree".into()));
        }
        if let Some(i) = self.a.iter().position(|r| r.len() != p) {
            return Err(LpError::Malformed(format!("row {i} has wrong length")));
        }
        let finite = self.c.iter().chain(&self.b).chain(self.a.iter().flatten()).all(|v| v.is_finite());
        if !finite {
            return Err(LpError::Malformed("non-finite coefficient".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Unbounded,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Optimal point; a feasible point when unbounded; zeros when infeasible.
    pub x: Vec<f64>,
    /// Row multipliers, nonnegative, zero unless optimal.
    pub y: Vec<f64>,
    pub objective: f64,
    /// Direction `r` with `Ar ≤ 0`, `cᵀr > 0` when unbounded.
    pub ray: Option<Vec<f64>>,
    pub iterations: usize,
    /// Optimal basis, reusable after rows are appended. Rows are given by
    /// index, artificial columns as `usize::MAX − i`.
    pub basis: Option<Vec<usize>>,
}

pub const DEFAULT_TOL: f64 = 1e-10;

const BLAND_AFTER: usize = 50;

pub fn solve_lp(p: &LpProblem, tol: f64) -> Result<LpSolution, LpError> {
    solve_lp_warm(p, tol, None)
}

/// Like [`solve_lp`], starting phase two from `warm` when it is still a
/// feasible basis. Holds whenever rows were only appended since `warm` was
/// produced with the same objective.
pub fn solve_lp_warm(p: &LpProblem, tol: f64, warm: Option<&[usize]>) -> Result<LpSolution, LpError> {
    p.validate()?;
    if !(tol > 0.0) {
        return Err(LpError::Malformed(format!("tolerance must be positive, got {tol}")));
    }
    let scaled = Scaled::new(p);
    let mut sol = solve_scaled(&scaled.a, &scaled.b, &scaled.c, &scaled.row, tol, warm)?;
    scaled.unscale(&mut sol);
    sol.objective = dotp(&p.c, &sol.x);
    if sol.status == LpStatus::Optimal {
        for y in &mut sol.y {
            if *y < 0.0 {
                *y = 0.0;
            }
        }
    }
    Ok(sol)
}

struct Scaled {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c: Vec<f64>,
    row: Vec<f64>,
    col: Vec<f64>,
}

impl Scaled {
    fn new(p: &LpProblem) -> Self {
        let nv = p.c.len();
        let mut a = p.a.clone();
        let mut b = p.b.clone();
        let mut row = vec![1.0; a.len()];
        for (i, r) in a.iter_mut().enumerate() {
            let s = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if s > 0.0 {
                r.iter_mut().for_each(|v| *v /= s);
                b[i] /= s;
                row[i] = 1.0 / s;
            }
        }
        let mut col = vec![1.0; nv];
        for (j, cj) in col.iter_mut().enumerate() {
            let s = a.iter().fold(0.0f64, |m, r| m.max(r[j].abs()));
            if s > 0.0 {
                *cj = 1.0 / s;
            }
        }
        for r in &mut a {
            r.iter_mut().zip(&col).for_each(|(v, s)| *v *= s);
        }
        let c = p.c.iter().zip(&col).map(|(v, s)| v * s).collect();
        Self { a, b, c, row, col }
    }

    fn unscale(&self, sol: &mut LpSolution) {
        sol.x.iter_mut().zip(&self.col).for_each(|(x, s)| *x *= s);
        if let Some(r) = sol.ray.as_mut() {
            r.iter_mut().zip(&self.col).for_each(|(x, s)| *x *= s);
        }
        sol.y.iter_mut().zip(&self.row).for_each(|(y, s)| *y *= s);
    }
}

fn dotp(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dense LU with partial pivoting of a small square matrix.
struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(mut m: Vec<f64>, n: usize) -> Result<Self, LpError> {
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = m.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(f64::MIN_POSITIVE);
        for k in 0..n {
            let (piv, val) = (k..n)
                .map(|i| (i, m[i * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if val <= 1e-14 * scale {
                return Err(LpError::SingularBasis);
            }
            if piv != k {
                for j in 0..n {
                    m.swap(k * n + j, piv * n + j);
                }
                perm.swap(k, piv);
            }
            let d = m[k * n + k];
            for i in k + 1..n {
                let l = m[i * n + k] / d;
                m[i * n + k] = l;
                if l != 0.0 {
                    for j in k + 1..n {
                        m[i * n + j] -= l * m[k * n + j];
                    }
                }
            }
        }
        Ok(Self { n, lu: m, perm })
    }

    /// Solves `B x = rhs`.
    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] -= self.lu[i * n + j] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= self.lu[i * n + j] * x[j];
            }
            x[i] /= self.lu[i * n + i];
        }
        x
    }

    /// Solves `Bᵀ x = rhs`.
    fn solve_t(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = rhs.to_vec();
        for i in 0..n {
            for j in 0..i {
                x[i] -= self.lu[j * n + i] * x[j];
            }
            x[i] /= self.lu[i * n + i];
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= self.lu[j * n + i] * x[j];
            }
        }
        let mut out = vec![0.0; n];
        for (k, &p) in self.perm.iter().enumerate() {
            out[p] = x[k];
        }
        out
    }
}

/// Column `j` of the dual standard form: rows of `A` first, then one
/// signed artificial per equality.
struct DualForm<'a> {
    a: &'a [Vec<f64>],
    b: &'a [f64],
    /// Factor each row was multiplied by; feasibility tolerances apply to
    /// the original rows.
    row_scale: &'a [f64],
    sign: Vec<f64>,
    p: usize,
}

impl DualForm<'_> {
    fn n_cols(&self) -> usize {
        self.a.len() + self.p
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.a.len()
    }

    fn column(&self, j: usize) -> Vec<f64> {
        if j < self.a.len() {
            self.a[j].clone()
        } else {
            let mut e = vec![0.0; self.p];
            e[j - self.a.len()] = self.sign[j - self.a.len()];
            e
        }
    }

    fn col_dot(&self, j: usize, pi: &[f64]) -> f64 {
        if j < self.a.len() {
            dotp(&self.a[j], pi)
        } else {
            self.sign[j - self.a.len()] * pi[j - self.a.len()]
        }
    }

    /// Pricing threshold for column `j`: the absolute tolerance in original
    /// units, raised to cover rounding in the reduced cost itself.
    fn threshold(&self, j: usize, pi: &[f64], tol: f64) -> f64 {
        if j < self.a.len() {
            let mag = self.b[j].abs() + self.a[j].iter().zip(pi).map(|(a, p)| (a * p).abs()).sum::<f64>();
            tol * self.row_scale[j] + 64.0 * f64::EPSILON * mag
        } else {
            tol
        }
    }

    fn basis_matrix(&self, basis: &[usize]) -> Vec<f64> {
        let p = self.p;
        let mut m = vec![0.0; p * p];
        for (k, &j) in basis.iter().enumerate() {
            for (i, v) in self.column(j).into_iter().enumerate() {
                m[i * p + k] = v;
            }
        }
        m
    }
}

enum PhaseEnd {
    Optimal { pi: Vec<f64>, value: f64 },
    Unbounded,
}

/// Runs the simplex method on `min costᵀw s.t. [Aᵀ S] w = c, w ≥ 0` from a
/// feasible basis. In phase two, artificials may not enter and basic ones are
/// held at zero.
#[allow(clippy::too_many_arguments)]
fn simplex(
    form: &DualForm,
    c: &[f64],
    cost: &[f64],
    basis: &mut [usize],
    phase_two: bool,
    tol: f64,
    iterations: &mut usize,
    cap: usize,
) -> Result<PhaseEnd, LpError> {
    let p = form.p;
    let ncols = form.n_cols();
    let mut degenerate = 0usize;
    let mut in_basis = vec![false; ncols];
    basis.iter().for_each(|&j| in_basis[j] = true);
    loop {
        let lu = Lu::factor(form.basis_matrix(basis), p)?;
        let mut xb = lu.solve(c);
        for (k, v) in xb.iter_mut().enumerate() {
            if *v < 0.0 && (*v > -tol || (phase_two && form.is_artificial(basis[k]))) {
                *v = 0.0;
            }
        }
        let cb: Vec<f64> = basis.iter().map(|&j| cost[j]).collect();
        let pi = lu.solve_t(&cb);

        let bland = degenerate >= BLAND_AFTER;
        let mut entering: Option<(usize, f64)> = None;
        for j in 0..ncols {
            if in_basis[j] || (phase_two && form.is_artificial(j)) {
                continue;
            }
            let r = cost[j] - form.col_dot(j, &pi);
            let threshold = if phase_two { form.threshold(j, &pi, tol) } else { tol };
            if r < -threshold {
                if bland {
                    entering = Some((j, r));
                    break;
                }
                if entering.is_none_or(|(_, best)| r < best) {
                    entering = Some((j, r));
                }
            }
        }
        let Some((q, _)) = entering else {
            let value = dotp(&cb, &xb);
            return Ok(PhaseEnd::Optimal { pi, value });
        };

        *iterations += 1;
        if *iterations > cap {
            return Err(LpError::IterationLimit(cap));
        }
        let w = lu.solve(&form.column(q));
        let mut leave: Option<(usize, f64)> = None;
        for k in 0..p {
            let held_at_zero = phase_two && form.is_artificial(basis[k]);
            let ratio = if held_at_zero && w[k].abs() > tol {
                0.0
            } else if w[k] > tol {
                xb[k].max(0.0) / w[k]
            } else {
                continue;
            };
            let better = match leave {
                None => true,
                Some((kb, rb)) => {
                    ratio < rb - 1e-14 || (ratio <= rb + 1e-14 && basis[k] < basis[kb])
                }
            };
            if better {
                leave = Some((k, ratio));
            }
        }
        let Some((k, ratio)) = leave else {
            return Ok(PhaseEnd::Unbounded);
        };
        if ratio <= tol {
            degenerate += 1;
        } else {
            degenerate = 0;
        }
        in_basis[basis[k]] = false;
        in_basis[q] = true;
        basis[k] = q;
    }
}

fn solve_scaled(
    a: &[Vec<f64>],
    b: &[f64],
    c: &[f64],
    row_scale: &[f64],
    tol: f64,
    warm: Option<&[usize]>,
) -> Result<LpSolution, LpError> {
    let m = a.len();
    let p = c.len();
    let sign: Vec<f64> = c.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
    let form = DualForm {
        a,
        b,
        row_scale,
        sign,
        p,
    };
    let cap = 50 * (m + p) + 1000;
    let mut iterations = 0usize;

    if let Some(basis) = warm.and_then(|w| warm_basis(&form, c, w, tol)) {
        let mut basis = basis;
        let mut cost2 = b.to_vec();
        cost2.extend(std::iter::repeat_n(0.0, p));
        if let Ok(end) = simplex(&form, c, &cost2, &mut basis, true, tol, &mut iterations, cap) {
            return phase_two_result(&form, c, basis, end, iterations);
        }
    }

    let mut basis: Vec<usize> = (m..m + p).collect();
    let mut cost1 = vec![0.0; m + p];
    cost1[m..].iter_mut().for_each(|v| *v = 1.0);
    let phase1 = simplex(&form, c, &cost1, &mut basis, false, tol, &mut iterations, cap)?;
    let PhaseEnd::Optimal { pi: pi1, value } = phase1 else {
        unreachable!("phase one is bounded below by zero");
    };
    let cnorm = c.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    if value > tol * (1.0 + cnorm) {
        // `pi1` satisfies A·pi1 ≤ 0 with cᵀ·pi1 > 0.
        let ray = pi1;
        return Ok(match feasible_point(a, b, row_scale, tol)? {
            Some(x) => LpSolution {
                status: LpStatus::Unbounded,
                x,
                y: vec![0.0; m],
                objective: f64::INFINITY,
                ray: Some(ray),
                iterations,
                basis: None,
            },
            None => infeasible(m, p, iterations),
        });
    }

    let mut cost2 = b.to_vec();
    cost2.extend(std::iter::repeat_n(0.0, p));
    let end = simplex(&form, c, &cost2, &mut basis, true, tol, &mut iterations, cap)?;
    phase_two_result(&form, c, basis, end, iterations)
}

/// Maps a stored basis onto `form` and keeps it if it is primal feasible.
fn warm_basis(form: &DualForm, c: &[f64], warm: &[usize], tol: f64) -> Option<Vec<usize>> {
    let (m, p) = (form.a.len(), form.p);
    if warm.len() != p {
        return None;
    }
    let basis: Vec<usize> = warm
        .iter()
        .map(|&j| if j < m { Some(j) } else { usize::MAX.checked_sub(j).filter(|&i| i < p).map(|i| m + i) })
        .collect::<Option<_>>()?;
    let mut seen = vec![false; m + p];
    for &j in &basis {
        if std::mem::replace(&mut seen[j], true) {
            return None;
        }
    }
    let lu = Lu::factor(form.basis_matrix(&basis), p).ok()?;
    let xb = lu.solve(c);
    let ok = xb
        .iter()
        .zip(&basis)
        .all(|(&v, &j)| v >= -tol && (!form.is_artificial(j) || v <= tol));
    ok.then_some(basis)
}

fn phase_two_result(
    form: &DualForm,
    c: &[f64],
    basis: Vec<usize>,
    end: PhaseEnd,
    iterations: usize,
) -> Result<LpSolution, LpError> {
    let (m, p) = (form.a.len(), form.p);
    match end {
        PhaseEnd::Unbounded => Ok(infeasible(m, p, iterations)),
        PhaseEnd::Optimal { pi, .. } => {
            let lu = Lu::factor(form.basis_matrix(&basis), p)?;
            let xb = lu.solve(c);
            let mut y = vec![0.0; m];
            for (k, &j) in basis.iter().enumerate() {
                if j < m {
                    y[j] = xb[k];
                }
            }
            let stored = basis.iter().map(|&j| if j < m { j } else { usize::MAX - (j - m) }).collect();
            Ok(LpSolution {
                status: LpStatus::Optimal,
                objective: dotp(c, &pi),
                x: pi,
                y,
                ray: None,
                iterations,
                basis: Some(stored),
            })
        }
    }
}

fn infeasible(m: usize, p: usize, iterations: usize) -> LpSolution {
    LpSolution {
        status: LpStatus::Infeasible,
        x: vec![0.0; p],
        y: vec![0.0; m],
        objective: f64::NEG_INFINITY,
        ray: None,
        iterations,
        basis: None,
    }
}

/// A point with `Ax ≤ b` (to tolerance), via `max −t s.t. Ax − t ≤ b, t ≥ 0`.
fn feasible_point(
    a: &[Vec<f64>],
    b: &[f64],
    row_scale: &[f64],
    tol: f64,
) -> Result<Option<Vec<f64>>, LpError> {
    let p = a.first().map_or(0, |r| r.len());
    let mut aux_a: Vec<Vec<f64>> = a
        .iter()
        .map(|r| {
            let mut row = r.clone();
            row.push(-1.0);
            row
        })
        .collect();
    let mut aux_b = b.to_vec();
    let mut neg_t = vec![0.0; p + 1];
    neg_t[p] = -1.0;
    aux_a.push(neg_t);
    aux_b.push(0.0);
    let mut c = vec![0.0; p + 1];
    c[p] = -1.0;
    let mut aux_scale = row_scale.to_vec();
    aux_scale.push(1.0);
    let sol = solve_scaled(&aux_a, &aux_b, &c, &aux_scale, tol, None)?;
    if sol.status != LpStatus::Optimal {
        return Ok(None);
    }
    // The slack `t` is in scaled-row units; compare it row by row.
    let worst = row_scale.iter().fold(f64::INFINITY, |m, &s| m.min(s));
    if sol.x[p] > tol * worst.min(1.0) {
        return Ok(None);
    }
    Ok(Some(sol.x[..p].to_vec()))
}
