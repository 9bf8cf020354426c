//! Symmetric operators: CSR storage, the matrix-free operator trait, and the
//! lazily composed operators used by the preconditioning solvers.

use serde::{Deserialize, Serialize};

use crate::error::OperatorError;

/// A symmetric linear operator accessed only through matrix-vector products.
///
/// Implementations must be linear and symmetric up to round-off. `apply_into`
/// overwrites `out` completely.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    fn apply_into(&self, v: &[f64], out: &mut [f64]);

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.apply_into(v, &mut out);
        out
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        (**self).apply_into(v, out)
    }
}

/// Checked matrix-vector product.
pub fn matvec<O: LinearOperator + ?Sized>(op: &O, v: &[f64]) -> Result<Vec<f64>, OperatorError> {
    if v.len() != op.dim() {
        return Err(OperatorError::DimensionMismatch {
            expected: op.dim(),
            found: v.len(),
        });
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(OperatorError::NonFinite);
    }
    let mut out = vec![0.0; op.dim()];
    op.apply_into(v, &mut out);
    Ok(out)
}

/// Symmetric matrix in CSR form with both triangles stored.
///
/// Column indices are strictly increasing within each row and the stored
/// pattern is symmetric with `a[i][j] == a[j][i]` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<f64>,
}

impl SparseSymMatrix {
    /// Builds a matrix from raw CSR arrays, validating every invariant.
    pub fn from_csr(
        n: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<u32>,
        values: Vec<f64>,
    ) -> Result<Self, OperatorError> {
        let m = Self {
            n,
            row_ptr,
            col_idx,
            values,
        };
        m.validate()?;
        Ok(m)
    }

    /// CSR arrays produced by trusted internal code; debug builds still validate.
    pub(crate) fn from_csr_unchecked(
        n: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<u32>,
        values: Vec<f64>,
    ) -> Self {
        let m = Self {
            n,
            row_ptr,
            col_idx,
            values,
        };
        debug_assert!(m.validate().is_ok());
        m
    }

    /// Builds a matrix from entries covering both triangles. Duplicates are
    /// summed; the result must be exactly symmetric.
    pub fn from_triplets(n: usize, entries: &[(usize, usize, f64)]) -> Result<Self, OperatorError> {
        Self::assemble(n, entries.iter().copied(), false)
    }

    /// Builds a matrix from entries of one triangle (or a mix); each
    /// off-diagonal entry is mirrored. Duplicates are summed.
    pub fn from_sym_triplets(
        n: usize,
        entries: &[(usize, usize, f64)],
    ) -> Result<Self, OperatorError> {
        Self::assemble(n, entries.iter().copied(), true)
    }

    fn assemble(
        n: usize,
        entries: impl Iterator<Item = (usize, usize, f64)>,
        mirror: bool,
    ) -> Result<Self, OperatorError> {
        if n == 0 {
            return Err(OperatorError::EmptyDimension);
        }
        if n > u32::MAX as usize {
            return Err(OperatorError::TooLarge(n));
        }
        let mut all: Vec<(usize, usize, f64)> = Vec::new();
        for (i, j, v) in entries {
            if i >= n || j >= n {
                return Err(OperatorError::IndexOutOfRange { row: i, col: j, n });
            }
            if !v.is_finite() {
                return Err(OperatorError::NonFinite);
            }
            all.push((i, j, v));
            if mirror && i != j {
                all.push((j, i, v));
            }
        }
        all.sort_by_key(|e| (e.0, e.1));

        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx: Vec<u32> = Vec::with_capacity(all.len());
        let mut values: Vec<f64> = Vec::with_capacity(all.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in all {
            if last == Some((i, j)) {
                *values.last_mut().expect("entry present") += v;
                continue;
            }
            last = Some((i, j));
            row_ptr[i + 1] += 1;
            col_idx.push(j as u32);
            values.push(v);
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self::from_csr(n, row_ptr, col_idx, values)
    }

    /// Dense row-major input; exact zeros are dropped.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self, OperatorError> {
        let n = rows.len();
        let mut entries = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(OperatorError::NotSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    entries.push((i, j, v));
                }
            }
        }
        Self::from_triplets(n, &entries)
    }

    pub fn from_diagonal(d: &[f64]) -> Result<Self, OperatorError> {
        let entries: Vec<_> = d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self::from_triplets(d.len(), &entries)
    }

    pub fn identity(n: usize) -> Result<Self, OperatorError> {
        Self::from_diagonal(&vec![1.0; n])
    }

    fn validate(&self) -> Result<(), OperatorError> {
        let n = self.n;
        if n == 0 {
            return Err(OperatorError::EmptyDimension);
        }
        if self.row_ptr.len() != n + 1
            || self.row_ptr[0] != 0
            || self.row_ptr[n] != self.col_idx.len()
            || self.col_idx.len() != self.values.len()
        {
            return Err(OperatorError::MalformedCsr("array lengths inconsistent".into()));
        }
        for i in 0..n {
            let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
            if lo > hi {
                return Err(OperatorError::MalformedCsr("row_ptr decreasing".into()));
            }
            let cols = &self.col_idx[lo..hi];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(OperatorError::MalformedCsr(format!(
                    "columns of row {i} not strictly increasing"
                )));
            }
            if cols.last().is_some_and(|&c| c as usize >= n) {
                return Err(OperatorError::IndexOutOfRange {
                    row: i,
                    col: *cols.last().unwrap() as usize,
                    n,
                });
            }
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(OperatorError::NonFinite);
        }
        for i in 0..n {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[p] as usize;
                if j == i {
                    continue;
                }
                match self.get(j, i) {
                    Some(v) if v == self.values[p] => {}
                    _ => return Err(OperatorError::NotSymmetric { row: i, col: j }),
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[u32] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Stored entry at `(i, j)`, if present.
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.col_idx[lo..hi]
            .binary_search(&(j as u32))
            .ok()
            .map(|p| self.values[lo + p])
    }

    /// Iterates `(col, value)` over row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.col_idx[lo..hi]
            .iter()
            .zip(&self.values[lo..hi])
            .map(|(&c, &v)| (c as usize, v))
    }

    /// Main diagonal, with zeros where no entry is stored.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i).unwrap_or(0.0)).collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n]; self.n];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        out
    }

    /// Largest absolute row sum, an upper bound on the spectral norm.
    pub fn inf_norm(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl LinearOperator for SparseSymMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.n);
        for (i, o) in out.iter_mut().enumerate() {
            let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut acc = 0.0;
            for (&c, &a) in self.col_idx[lo..hi].iter().zip(&self.values[lo..hi]) {
                acc += a * v[c as usize];
            }
            *o = acc;
        }
    }
}

/// Diagonal of a diagonal matrix, `D = diagm(d)`.
///
/// Entries may be of either sign (basis elements of a preconditioner subspace
/// need not be positive); use [`DiagonalVec::is_positive`] before treating it
/// as a preconditioner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DiagonalVec(Vec<f64>);

impl DiagonalVec {
    pub fn new(d: Vec<f64>) -> Result<Self, OperatorError> {
        if d.is_empty() {
            return Err(OperatorError::EmptyDimension);
        }
        if d.iter().any(|x| !x.is_finite()) {
            return Err(OperatorError::NonFinite);
        }
        Ok(Self(d))
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_positive(&self) -> bool {
        self.0.iter().all(|&x| x > 0.0)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self(self.0.iter().map(|x| x * c).collect())
    }

    /// `⟨v, diagm(d) v⟩`.
    pub fn quad(&self, v: &[f64]) -> f64 {
        self.0.iter().zip(v).map(|(d, x)| d * x * x).sum()
    }
}

impl std::ops::Index<usize> for DiagonalVec {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl LinearOperator for DiagonalVec {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        for ((o, d), x) in out.iter_mut().zip(&self.0).zip(v) {
            *o = d * x;
        }
    }
}

/// `v ↦ D^{-1/2} M D^{-1/2} v`, composed lazily.
#[derive(Debug, Clone)]
pub struct ScaledOperator<O> {
    inner: O,
    inv_sqrt: Vec<f64>,
}

impl<O: LinearOperator> ScaledOperator<O> {
    pub fn inv_sqrt(&self) -> &[f64] {
        &self.inv_sqrt
    }
}

impl<O: LinearOperator> LinearOperator for ScaledOperator<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        let scaled: Vec<f64> = v.iter().zip(&self.inv_sqrt).map(|(x, s)| x * s).collect();
        self.inner.apply_into(&scaled, out);
        for (o, s) in out.iter_mut().zip(&self.inv_sqrt) {
            *o *= s;
        }
    }
}

/// Symmetric diagonal scaling of `m` by a strictly positive `d`.
pub fn scaled_operator<O: LinearOperator>(
    m: O,
    d: &DiagonalVec,
) -> Result<ScaledOperator<O>, OperatorError> {
    if d.len() != m.dim() {
        return Err(OperatorError::DimensionMismatch {
            expected: m.dim(),
            found: d.len(),
        });
    }
    if let Some((i, &x)) = d.as_slice().iter().enumerate().find(|(_, &x)| !(x > 0.0)) {
        return Err(OperatorError::NonPositiveDiagonal { index: i, value: x });
    }
    let inv_sqrt = d.as_slice().iter().map(|x| 1.0 / x.sqrt()).collect();
    Ok(ScaledOperator { inner: m, inv_sqrt })
}

/// Which of the two linear matrix inequalities a constraint operator encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Block {
    /// `Σ Dᵢzᵢ − τM ⪰ 0`
    One,
    /// `M − Σ Dᵢzᵢ ⪰ 0`
    Two,
}

/// One LMI block of the subspace problem evaluated at `(τ, z)`.
///
/// The combined diagonal `Σ dᵢzᵢ` is formed once on construction, so each
/// application costs one product with `M` plus `O(n)`.
#[derive(Debug, Clone)]
pub struct ConstraintOperator<'a, O: ?Sized> {
    m: &'a O,
    combined: Vec<f64>,
    z: Vec<f64>,
    tau: f64,
    block: Block,
}

impl<'a, O: LinearOperator + ?Sized> ConstraintOperator<'a, O> {
    pub fn new(
        m: &'a O,
        basis: &[DiagonalVec],
        z: &[f64],
        tau: f64,
        block: Block,
    ) -> Result<Self, OperatorError> {
        if basis.len() != z.len() {
            return Err(OperatorError::DimensionMismatch {
                expected: basis.len(),
                found: z.len(),
            });
        }
        let n = m.dim();
        if let Some(d) = basis.iter().find(|d| d.len() != n) {
            return Err(OperatorError::DimensionMismatch {
                expected: n,
                found: d.len(),
            });
        }
        Ok(Self {
            m,
            combined: combine(basis, z, n),
            z: z.to_vec(),
            tau,
            block,
        })
    }

    pub fn block(&self) -> Block {
        self.block
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    /// `Σ dᵢzᵢ`.
    pub fn combined_diagonal(&self) -> &[f64] {
        &self.combined
    }
}

/// `Σ dᵢzᵢ` for basis vectors of length `n`.
pub(crate) fn combine(basis: &[DiagonalVec], z: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (d, &zi) in basis.iter().zip(z) {
        if zi == 0.0 {
            continue;
        }
        for (o, x) in out.iter_mut().zip(d.as_slice()) {
            *o += x * zi;
        }
    }
    out
}

impl<O: LinearOperator + ?Sized> LinearOperator for ConstraintOperator<'_, O> {
    fn dim(&self) -> usize {
        self.m.dim()
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        self.m.apply_into(v, out);
        match self.block {
            Block::One => {
                for ((o, c), x) in out.iter_mut().zip(&self.combined).zip(v) {
                    *o = c * x - self.tau * *o;
                }
            }
            Block::Two => {
                for ((o, c), x) in out.iter_mut().zip(&self.combined).zip(v) {
                    *o -= c * x;
                }
            }
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (ca, ra) = a[..n].as_chunks::<4>();
    let (cb, rb) = b[..n].as_chunks::<4>();
    let mut acc = [0.0f64; 4];
    for (x, y) in ca.iter().zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let tail: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
    (acc[0] + acc[2]) + (acc[1] + acc[3]) + tail
}

/// `y ← y + a·x`.
pub(crate) fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd5() -> SparseSymMatrix {
        SparseSymMatrix::from_dense(&[
            vec![4.0, 1.0, 0.0, 0.5, 0.0],
            vec![1.0, 3.0, 0.2, 0.0, 0.0],
            vec![0.0, 0.2, 5.0, 0.0, 1.0],
            vec![0.5, 0.0, 0.0, 2.0, 0.3],
            vec![0.0, 0.0, 1.0, 0.3, 6.0],
        ])
        .unwrap()
    }

    #[test]
    fn identity_and_diagonal_action() {
        let i3 = SparseSymMatrix::identity(3).unwrap();
        assert_eq!(matvec(&i3, &[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
        let d = SparseSymMatrix::from_diagonal(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(matvec(&d, &[1.0, 1.0, 1.0]).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn matvec_rejects_bad_input() {
        let i3 = SparseSymMatrix::identity(3).unwrap();
        assert!(matches!(
            matvec(&i3, &[1.0, 2.0]),
            Err(OperatorError::DimensionMismatch { expected: 3, found: 2 })
        ));
        assert!(matches!(matvec(&i3, &[1.0, f64::NAN, 0.0]), Err(OperatorError::NonFinite)));
    }

    #[test]
    fn construction_rejects_asymmetry_and_nan() {
        assert!(matches!(
            SparseSymMatrix::from_triplets(2, &[(0, 1, 1.0)]),
            Err(OperatorError::NotSymmetric { .. })
        ));
        assert!(matches!(
            SparseSymMatrix::from_triplets(2, &[(0, 0, f64::INFINITY)]),
            Err(OperatorError::NonFinite)
        ));
        assert!(SparseSymMatrix::from_triplets(0, &[]).is_err());
    }

    #[test]
    fn sym_triplets_mirror_and_sum_duplicates() {
        let m =
            SparseSymMatrix::from_sym_triplets(2, &[(0, 0, 2.0), (1, 0, 0.5), (1, 0, 0.5), (1, 1, 2.0)])
                .unwrap();
        assert_eq!(m.nnz(), 4);
        assert_eq!(m.get(0, 1), Some(1.0));
        assert_eq!(m.get(1, 0), Some(1.0));
    }

    #[test]
    fn jacobi_scaling_of_diagonal_is_identity() {
        let m = SparseSymMatrix::from_diagonal(&[4.0, 9.0]).unwrap();
        let d = DiagonalVec::new(vec![4.0, 9.0]).unwrap();
        let s = scaled_operator(&m, &d).unwrap();
        let v = [0.3, -1.7];
        let out = s.apply(&v);
        assert!((out[0] - v[0]).abs() < 1e-15 && (out[1] - v[1]).abs() < 1e-15);

        let ones = DiagonalVec::ones(5);
        let spd = spd5();
        let s = scaled_operator(&spd, &ones).unwrap();
        let v = [1.0, -2.0, 0.5, 3.0, 0.25];
        assert_eq!(s.apply(&v), spd.apply(&v));
    }

    #[test]
    fn scaling_rejects_nonpositive() {
        let m = SparseSymMatrix::identity(2).unwrap();
        let d = DiagonalVec::new(vec![1.0, 0.0]).unwrap();
        assert!(matches!(
            scaled_operator(&m, &d),
            Err(OperatorError::NonPositiveDiagonal { index: 1, .. })
        ));
    }

    #[test]
    fn constraint_blocks_match_definition() {
        let m = spd5();
        let basis = vec![DiagonalVec::ones(5), DiagonalVec::new(m.diagonal()).unwrap()];
        let z = [0.25, 0.1];
        let v = [1.0, -1.0, 2.0, 0.5, -0.5];
        let mv = m.apply(&v);
        let one = ConstraintOperator::new(&m, &basis, &z, 0.3, Block::One).unwrap();
        let two = ConstraintOperator::new(&m, &basis, &z, 0.3, Block::Two).unwrap();
        let (o1, o2) = (one.apply(&v), two.apply(&v));
        for i in 0..5 {
            let dz = z[0] + z[1] * m.diagonal()[i];
            assert!((o1[i] - (dz * v[i] - 0.3 * mv[i])).abs() < 1e-14);
            assert!((o2[i] - (mv[i] - dz * v[i])).abs() < 1e-14);
        }
    }
}
