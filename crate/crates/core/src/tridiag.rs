//! Extreme eigenpairs of small symmetric tridiagonal matrices.

/// Number of eigenvalues of `T` strictly below `x` (Sturm count).
fn count_below(alpha: &[f64], beta: &[f64], x: f64, pivmin: f64) -> usize {
    let mut count = 0;
    let mut q = alpha[0] - x;
    if q.abs() < pivmin {
        q = -pivmin;
    }
    if q < 0.0 {
        count += 1;
    }
    for i in 1..alpha.len() {
        q = alpha[i] - x - beta[i - 1] * beta[i - 1] / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn gershgorin(alpha: &[f64], beta: &[f64]) -> (f64, f64) {
    let m = alpha.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..m {
        let r = if i > 0 { beta[i - 1].abs() } else { 0.0 } + if i + 1 < m { beta[i].abs() } else { 0.0 };
        lo = lo.min(alpha[i] - r);
        hi = hi.max(alpha[i] + r);
    }
    (lo, hi)
}

/// The `k`-th smallest eigenvalue (0-based) by bisection.
pub fn kth_eigenvalue(alpha: &[f64], beta: &[f64], k: usize) -> f64 {
    let m = alpha.len();
    assert!(k < m && beta.len() + 1 >= m);
    let (mut lo, mut hi) = gershgorin(alpha, beta);
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    let pivmin = f64::MIN_POSITIVE.max(scale * f64::EPSILON * f64::EPSILON);
    let pad = scale * f64::EPSILON * 4.0 * m as f64;
    lo -= pad;
    hi += pad;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(alpha, beta, mid, pivmin) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves `(T − θI) x = b` in place by Gaussian elimination with partial
/// pivoting, perturbing exactly singular pivots.
fn shifted_solve(alpha: &[f64], beta: &[f64], theta: f64, b: &mut [f64], tiny: f64) {
    let m = alpha.len();
    if m == 1 {
        let d = alpha[0] - theta;
        b[0] /= if d.abs() < tiny { tiny } else { d };
        return;
    }
    // Row i of the upper factor is (d[i], e[i], f[i]) at columns i, i+1, i+2.
    let mut d: Vec<f64> = alpha.iter().map(|a| a - theta).collect();
    let mut e: Vec<f64> = beta[..m - 1].to_vec();
    let mut f = vec![0.0; m];
    let mut lower: Vec<f64> = beta[..m - 1].to_vec();
    for i in 0..m - 1 {
        let sub = lower[i];
        if sub.abs() > d[i].abs() {
            // Swap rows i and i+1.
            let (ri0, ri1, ri2) = (d[i], e[i], f[i]);
            let below_diag = d[i + 1];
            let below_sup = if i + 1 < m - 1 { e[i + 1] } else { 0.0 };
            d[i] = sub;
            e[i] = below_diag;
            f[i] = below_sup;
            let l = ri0 / sub;
            d[i + 1] = ri1 - l * below_diag;
            if i + 1 < m - 1 {
                e[i + 1] = ri2 - l * below_sup;
            }
            b.swap(i, i + 1);
            b[i + 1] -= l * b[i];
            lower[i] = l;
        } else {
            if d[i].abs() < tiny {
                d[i] = tiny;
            }
            let l = sub / d[i];
            d[i + 1] -= l * e[i];
            if i + 1 < m - 1 {
                e[i + 1] -= l * f[i];
            }
            b[i + 1] -= l * b[i];
            lower[i] = l;
        }
    }
    if d[m - 1].abs() < tiny {
        d[m - 1] = tiny;
    }
    for i in (0..m).rev() {
        let mut s = b[i];
        if i + 1 < m {
            s -= e[i] * b[i + 1];
        }
        if i + 2 < m {
            s -= f[i] * b[i + 2];
        }
        b[i] = s / d[i];
    }
}

/// Unit eigenvector for the eigenvalue `theta` by inverse iteration.
pub fn eigenvector(alpha: &[f64], beta: &[f64], theta: f64) -> Vec<f64> {
    let m = alpha.len();
    let (lo, hi) = gershgorin(alpha, beta);
    let scale = lo.abs().max(hi.abs());
    // Deterministic, generic starting vector.
    let mut x: Vec<f64> = (0..m).map(|i| 1.0 + ((i as f64 + 1.0) * 0.618_033_988_75).fract()).collect();
    if !(scale > 0.0 && scale.is_finite()) {
        let nrm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= nrm);
        return x;
    }
    // Work on T/scale so the pivot floor is scale-free.
    let a: Vec<f64> = alpha.iter().map(|v| v / scale).collect();
    let b: Vec<f64> = beta.iter().map(|v| v / scale).collect();
    let th = theta / scale;
    for _ in 0..3 {
        shifted_solve(&a, &b, th, &mut x, f64::EPSILON);
        let nrm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(nrm.is_finite() && nrm > 0.0) {
            break;
        }
        for v in &mut x {
            *v /= nrm;
        }
    }
    x
}

/// An eigenpair of a tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct TriEigen {
    pub value: f64,
    pub vector: Vec<f64>,
}

pub fn smallest(alpha: &[f64], beta: &[f64]) -> TriEigen {
    let value = kth_eigenvalue(alpha, beta, 0);
    TriEigen {
        value,
        vector: eigenvector(alpha, beta, value),
    }
}

pub fn largest(alpha: &[f64], beta: &[f64]) -> TriEigen {
    let value = kth_eigenvalue(alpha, beta, alpha.len() - 1);
    TriEigen {
        value,
        vector: eigenvector(alpha, beta, value),
    }
}
