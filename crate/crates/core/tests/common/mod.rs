#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use precond_core::{generate_synthetic, EntryDist, SparseSymMatrix};

pub fn dense(m: &SparseSymMatrix) -> DMatrix<f64> {
    let n = m.n();
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for (j, v) in m.row(i) {
            a[(i, j)] = v;
        }
    }
    a
}

/// Eigenvalues ascending with matching eigenvector columns.
pub fn eig(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let e = SymmetricEigen::new(a.clone());
    let mut idx: Vec<usize> = (0..a.nrows()).collect();
    idx.sort_by(|&i, &j| e.eigenvalues[i].total_cmp(&e.eigenvalues[j]));
    let vals = idx.iter().map(|&i| e.eigenvalues[i]).collect();
    let vecs = DMatrix::from_columns(&idx.iter().map(|&i| e.eigenvectors.column(i).into_owned()).collect::<Vec<_>>());
    (vals, vecs)
}

pub fn kappa_dense(a: &DMatrix<f64>) -> f64 {
    let (v, _) = eig(a);
    v[v.len() - 1] / v[0]
}

pub fn kappa(m: &SparseSymMatrix) -> f64 {
    kappa_dense(&dense(m))
}

/// `κ(D^{-1/2} M D^{-1/2})`.
pub fn precond_kappa(m: &SparseSymMatrix, d: &[f64]) -> f64 {
    let mut a = dense(m);
    let n = a.nrows();
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] /= (d[i] * d[j]).sqrt();
        }
    }
    kappa_dense(&a)
}

/// `κ(P^{-1/2} M P^{-1/2})` for a symmetric positive definite `P`.
pub fn general_precond_kappa(a: &DMatrix<f64>, p: &DMatrix<f64>) -> f64 {
    let (pv, pq) = eig(p);
    if pv[0] <= 0.0 {
        return f64::INFINITY;
    }
    let inv_sqrt = &pq * DMatrix::from_diagonal(&DVector::from_iterator(pv.len(), pv.iter().map(|x| 1.0 / x.sqrt()))) * pq.transpose();
    let s = &inv_sqrt * a * &inv_sqrt;
    kappa_dense(&(0.5 * (&s + s.transpose())))
}

pub fn instance(n: usize, sigma: f64, alpha: f64, dist: EntryDist, seed: u64) -> SparseSymMatrix {
    generate_synthetic(n, sigma, alpha, dist, seed).expect("valid generator parameters")
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for k in i..=j {
                r[idx[k]] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

pub fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
