//! Conjugate gradients with a diagonal preconditioner.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{dot, norm2, DiagonalVec, LinearOperator};

/// True residual recomputation interval.
const REPLACE_EVERY: usize = 50;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PcgReport {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// `iterations + matvec_offset`.
    pub matvecs: usize,
    /// Extra products spent on true-residual checks.
    pub check_matvecs: usize,
    /// `‖b − Mx‖/‖b‖` after each iteration; entry 0 is the initial residual.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    /// Verified final relative residual.
    pub final_residual: f64,
}

impl PcgReport {
    /// Writes `iteration,matvecs_cumulative,rel_residual` rows.
    pub fn write_csv<W: Write>(&self, offset: usize, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "iteration,matvecs_cumulative,rel_residual")?;
        for (i, r) in self.residual_history.iter().enumerate() {
            writeln!(w, "{i},{},{r:e}", i + offset)?;
        }
        Ok(())
    }
}

fn true_residual<O: LinearOperator + ?Sized>(m: &O, b: &[f64], x: &[f64], r: &mut [f64]) {
    m.apply_into(x, r);
    r.iter_mut().zip(b).for_each(|(r, b)| *r = b - *r);
}

/// Solves `Mx = b` from `x = 0`, preconditioning with `diag(d)^{-1}`.
///
/// Non-convergence within `max_iter` is reported through the `converged`
/// flag; only breakdown and invalid input are errors.
pub fn pcg_solve<O: LinearOperator + ?Sized>(
    m: &O,
    b: &[f64],
    d: &DiagonalVec,
    tol: f64,
    max_iter: usize,
    matvec_offset: usize,
) -> Result<PcgReport> {
    let n = m.dim();
    if b.len() != n || d.len() != n {
        return Err(Error::InvalidArgument(format!(
            "dimension mismatch: operator {n}, rhs {}, preconditioner {}",
            b.len(),
            d.len()
        )));
    }
    if !d.is_positive() {
        return Err(Error::InvalidArgument("preconditioner must be strictly positive".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    if b.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("rhs is not finite".into()));
    }
    let inv: Vec<f64> = d.as_slice().iter().map(|x| 1.0 / x).collect();
    let bnorm = norm2(b);
    let mut x = vec![0.0; n];
    let mut history = vec![if bnorm > 0.0 { 1.0 } else { 0.0 }];
    if bnorm == 0.0 {
        return Ok(PcgReport {
            x,
            iterations: 0,
            matvecs: matvec_offset,
            check_matvecs: 0,
            residual_history: history,
            converged: true,
            final_residual: 0.0,
        });
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv).map(|(r, s)| r * s).collect();
    let mut p = z.clone();
    let mut q = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut iterations = 0;
    let mut checks = 0;
    let mut converged = false;
    let mut final_residual = 1.0;
    while iterations < max_iter {
        m.apply_into(&p, &mut q);
        iterations += 1;
        let pq = dot(&p, &q);
        if !(pq > 0.0) || !pq.is_finite() {
            return Err(Error::Breakdown("nonpositive curvature in conjugate gradients"));
        }
        let alpha = rz / pq;
        x.iter_mut().zip(&p).for_each(|(x, p)| *x += alpha * p);
        r.iter_mut().zip(&q).for_each(|(r, q)| *r -= alpha * q);
        let mut rel = norm2(&r) / bnorm;
        if !rel.is_finite() {
            return Err(Error::Breakdown("non-finite residual in conjugate gradients"));
        }
        if rel <= tol || iterations % REPLACE_EVERY == 0 {
            true_residual(m, b, &x, &mut r);
            checks += 1;
            rel = norm2(&r) / bnorm;
            if rel <= tol {
                history.push(rel);
                converged = true;
                final_residual = rel;
                break;
            }
        }
        history.push(rel);
        final_residual = rel;
        z.iter_mut().zip(r.iter().zip(&inv)).for_each(|(z, (r, s))| *z = r * s);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.iter_mut().zip(&z).for_each(|(p, z)| *p = z + beta * *p);
    }
    Ok(PcgReport {
        x,
        iterations,
        matvecs: iterations + matvec_offset,
        check_matvecs: checks,
        residual_history: history,
        converged,
        final_residual,
    })
}

/// `b = M x*` with `x*` standard Gaussian from `seed`.
pub fn gaussian_rhs<O: LinearOperator + ?Sized>(m: &O, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<f64> = (0..m.dim()).map(|_| StandardNormal.sample(&mut rng)).collect();
    m.apply(&xs)
}
