//! Random sparse test matrices of the form `AᵀA + αI`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::SparseSymMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryDist {
    /// `U[0, 1]`
    Uniform01,
    /// `N(0, 1)`
    StdNormal,
}

impl std::str::FromStr for EntryDist {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "uniform" | "uniform01" => Ok(Self::Uniform01),
            "normal" | "std_normal" | "stdnormal" => Ok(Self::StdNormal),
            _ => Err(format!("unknown distribution '{s}' (expected uniform or normal)")),
        }
    }
}

impl std::fmt::Display for EntryDist {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Uniform01 => "uniform",
            Self::StdNormal => "normal",
        })
    }
}

/// Generates `M = AᵀA + αI` where each entry of the `n×n` matrix `A` is
/// present independently with probability `sigma`.
pub fn generate_synthetic(
    n: usize,
    sigma: f64,
    alpha: f64,
    dist: EntryDist,
    seed: u64,
) -> Result<SparseSymMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(Error::InvalidArgument(format!("sigma must be in (0, 1], got {sigma}")));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = (n as u128) * (n as u128);
    let mut entries: Vec<(usize, usize, f64)> =
        Vec::with_capacity(((total as f64) * sigma * 1.05) as usize + 16);
    let mut pos: u128 = 0;
    if sigma >= 1.0 {
        while pos < total {
            let v = draw(&mut rng, dist);
            entries.push(((pos / n as u128) as usize, (pos % n as u128) as usize, v));
            pos += 1;
        }
    } else {
        let gap = Geometric::new(sigma).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        loop {
            pos += gap.sample(&mut rng) as u128;
            if pos >= total {
                break;
            }
            let v = draw(&mut rng, dist);
            entries.push(((pos / n as u128) as usize, (pos % n as u128) as usize, v));
            pos += 1;
        }
    }
    gram_plus_shift(n, &entries, alpha)
}

fn draw(rng: &mut ChaCha8Rng, dist: EntryDist) -> f64 {
    match dist {
        EntryDist::Uniform01 => rng.random::<f64>(),
        EntryDist::StdNormal => StandardNormal.sample(rng),
    }
}

/// `AᵀA + αI` for `A` given as row-major `(row, col, value)` entries with
/// unique positions sorted by `(row, col)`.
///
/// Every product `A[r][i]·A[r][j]` is accumulated in ascending `r`, so the
/// result is exactly symmetric and reproducible.
pub fn gram_plus_shift(n: usize, a: &[(usize, usize, f64)], alpha: f64) -> Result<SparseSymMatrix> {
    if n > u32::MAX as usize {
        return Err(Error::InvalidArgument(format!("n = {n} too large")));
    }
    // Row-major CSR of A.
    let mut a_ptr = vec![0usize; n + 1];
    for &(r, c, _) in a {
        if r >= n || c >= n {
            return Err(Error::InvalidArgument(format!("entry ({r}, {c}) outside {n}x{n}")));
        }
        a_ptr[r + 1] += 1;
    }
    for i in 0..n {
        a_ptr[i + 1] += a_ptr[i];
    }
    let mut a_col = vec![0u32; a.len()];
    let mut a_val = vec![0.0; a.len()];
    let mut fill = a_ptr.clone();
    for &(r, c, v) in a {
        a_col[fill[r]] = c as u32;
        a_val[fill[r]] = v;
        fill[r] += 1;
    }
    // Column lists of A (rows ascending because entries are visited by row).
    let mut t_ptr = vec![0usize; n + 1];
    for &c in &a_col {
        t_ptr[c as usize + 1] += 1;
    }
    for i in 0..n {
        t_ptr[i + 1] += t_ptr[i];
    }
    let mut t_row = vec![0u32; a.len()];
    let mut t_val = vec![0.0; a.len()];
    let mut fill = t_ptr.clone();
    for r in 0..n {
        for p in a_ptr[r]..a_ptr[r + 1] {
            let c = a_col[p] as usize;
            t_row[fill[c]] = r as u32;
            t_val[fill[c]] = a_val[p];
            fill[c] += 1;
        }
    }

    // Row i of AᵀA = Σ_r A[r][i] · (row r of A).
    let mut acc = vec![0.0f64; n];
    let mut mark = vec![usize::MAX; n];
    let mut touched: Vec<u32> = Vec::new();
    let mut row_ptr = Vec::with_capacity(n + 1);
    row_ptr.push(0usize);
    let mut col_idx: Vec<u32> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    for i in 0..n {
        touched.clear();
        mark[i] = i;
        acc[i] = 0.0;
        touched.push(i as u32);
        for q in t_ptr[i]..t_ptr[i + 1] {
            let r = t_row[q] as usize;
            let ari = t_val[q];
            for p in a_ptr[r]..a_ptr[r + 1] {
                let j = a_col[p] as usize;
                if mark[j] != i {
                    mark[j] = i;
                    acc[j] = 0.0;
                    touched.push(j as u32);
                }
                acc[j] += ari * a_val[p];
            }
        }
        acc[i] += alpha;
        touched.sort_unstable();
        for &j in &touched {
            col_idx.push(j);
            values.push(acc[j as usize]);
        }
        row_ptr.push(col_idx.len());
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Breakdown("synthetic generation"));
    }
    Ok(SparseSymMatrix::from_csr_unchecked(n, row_ptr, col_idx, values))
}
