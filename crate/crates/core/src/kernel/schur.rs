//! Real Schur form with block reordering.
//!
//! `M = Z·T·Zᵀ` with `T` quasi upper triangular (1×1 and 2×2 diagonal
//! blocks). Blocks are kept in a canonical order so that block indices are
//! stable identifiers: ascending real part, then ascending |imaginary part|,
//! then 1×1 before 2×2. The invariant subspace of any block subset is the
//! span of the leading Schur vectors after moving those blocks to the front
//! with orthogonal adjacent-block swaps.

use alloc::vec::Vec;
use core::cmp::Ordering;

use nalgebra::Schur;
use num_complex::Complex64;

use super::{spectral_norm, Matrix, DISTINCT_TOL, TOL_INV};
use crate::error::{Error, Result};

/// One diagonal block of the real Schur form.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SchurBlock {
    pub size: usize,
    /// The eigenvalue (for a pair, the member with positive imaginary part).
    pub eigenvalue: Complex64,
}

impl SchurBlock {
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        if self.size == 1 {
            alloc::vec![self.eigenvalue]
        } else {
            alloc::vec![self.eigenvalue, self.eigenvalue.conj()]
        }
    }

    fn canonical_cmp(&self, other: &Self) -> Ordering {
        let a = (self.eigenvalue.re, self.eigenvalue.im.abs(), self.size);
        let b = (other.eigenvalue.re, other.eigenvalue.im.abs(), other.size);
        a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2))
    }
}

#[derive(Debug, Clone)]
pub(crate) struct RealSchur {
    pub z: Matrix,
    pub t: Matrix,
    /// (start row, size) of each diagonal block, top to bottom.
    pub blocks: Vec<(usize, usize)>,
}

impl RealSchur {
    pub fn new(m: &Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch("Schur form needs a square matrix"));
        }
        let n = m.nrows();
        if n == 0 {
            return Ok(Self { z: Matrix::zeros(0, 0), t: Matrix::zeros(0, 0), blocks: Vec::new() });
        }
        if n == 1 || m.iter().all(|&x| x == 0.0) {
            if n > 1 {
                let blocks = (0..n).map(|i| (i, 1)).collect();
                return Ok(Self { z: Matrix::identity(n, n), t: m.clone(), blocks });
            }
            return Ok(Self { z: Matrix::identity(1, 1), t: m.clone(), blocks: alloc::vec![(0, 1)] });
        }
        let (z, t) = Schur::try_new(m.clone(), 1e-15, 100 * n.max(10)).ok_or(Error::EigenFailure)?.unpack();
        let mut s = Self { z, t, blocks: Vec::new() };
        s.detect_blocks();
        Ok(s)
    }

    fn detect_blocks(&mut self) {
        let n = self.t.nrows();
        let mut blocks = Vec::new();
        let mut i = 0;
        while i < n {
            if i + 1 < n {
                let sub = self.t[(i + 1, i)];
                let diag = self.t[(i, i)].abs() + self.t[(i + 1, i + 1)].abs();
                if sub.abs() <= 1e-14 * diag.max(f64::MIN_POSITIVE) {
                    self.t[(i + 1, i)] = 0.0;
                } else if self.split_real_pair(i) {
                    // real eigenvalues: now two 1×1 blocks
                } else {
                    blocks.push((i, 2));
                    for r in i + 2..n {
                        self.t[(r, i)] = 0.0;
                        self.t[(r, i + 1)] = 0.0;
                    }
                    i += 2;
                    continue;
                }
            }
            for r in i + 1..n {
                self.t[(r, i)] = 0.0;
            }
            blocks.push((i, 1));
            i += 1;
        }
        self.blocks = blocks;
    }

    /// Triangularize a 2×2 diagonal block at `p` when its eigenvalues are real.
    fn split_real_pair(&mut self, p: usize) -> bool {
        let (a, b, c, d) = (self.t[(p, p)], self.t[(p, p + 1)], self.t[(p + 1, p)], self.t[(p + 1, p + 1)]);
        let half = 0.5 * (a - d);
        let disc = half * half + b * c;
        if disc < 0.0 {
            return false;
        }
        let mean = 0.5 * (a + d);
        let root = libm::sqrt(disc);
        let lambda = if mean >= 0.0 { mean + root } else { mean - root };
        // eigenvector candidates: (b, λ − a) and (λ − d, c)
        let v1 = (b, lambda - a);
        let v2 = (lambda - d, c);
        let n1 = libm::hypot(v1.0, v1.1);
        let n2 = libm::hypot(v2.0, v2.1);
        let (x, y, nrm) = if n1 >= n2 { (v1.0, v1.1, n1) } else { (v2.0, v2.1, n2) };
        if nrm == 0.0 {
            return false;
        }
        let (cs, sn) = (x / nrm, y / nrm);
        let g = Matrix::from_row_slice(2, 2, &[cs, -sn, sn, cs]);
        self.apply(p, &g);
        self.t[(p + 1, p)] = 0.0;
        true
    }

    /// T ← Gᵀ·T·G and Z ← Z·G on the rows/columns `p..p+k`.
    fn apply(&mut self, p: usize, g: &Matrix) {
        let k = g.nrows();
        let rows = g.transpose() * self.t.rows(p, k);
        self.t.rows_mut(p, k).copy_from(&rows);
        let cols = self.t.columns(p, k) * g;
        self.t.columns_mut(p, k).copy_from(&cols);
        let zc = self.z.columns(p, k) * g;
        self.z.columns_mut(p, k).copy_from(&zc);
    }

    pub fn block_eigenvalue(&self, k: usize) -> Complex64 {
        let (p, s) = self.blocks[k];
        if s == 1 {
            return Complex64::new(self.t[(p, p)], 0.0);
        }
        let (a, b, c, d) = (self.t[(p, p)], self.t[(p, p + 1)], self.t[(p + 1, p)], self.t[(p + 1, p + 1)]);
        let half = 0.5 * (a - d);
        let disc = half * half + b * c;
        let im = libm::sqrt((-disc).max(0.0));
        Complex64::new(0.5 * (a + d), im)
    }

    /// Swap blocks `k` and `k+1`.
    fn swap(&mut self, k: usize) -> Result<()> {
        let (p, n1) = self.blocks[k];
        let (_, n2) = self.blocks[k + 1];
        let m = n1 + n2;
        // Solve T11·X − X·T22 = T12 for X (n1×n2), column-major unknowns.
        let t11 = self.t.view((p, p), (n1, n1)).clone_owned();
        let t22 = self.t.view((p + n1, p + n1), (n2, n2)).clone_owned();
        let t12 = self.t.view((p, p + n1), (n1, n2)).clone_owned();
        let dim = n1 * n2;
        let mut kmat = Matrix::zeros(dim, dim);
        let mut rhs = nalgebra::DVector::zeros(dim);
        for j in 0..n2 {
            for i in 0..n1 {
                let row = i + n1 * j;
                rhs[row] = t12[(i, j)];
                for l in 0..n2 {
                    for kk in 0..n1 {
                        let col = kk + n1 * l;
                        let mut v = 0.0;
                        if j == l {
                            v += t11[(i, kk)];
                        }
                        if i == kk {
                            v -= t22[(l, j)];
                        }
                        kmat[(row, col)] = v;
                    }
                }
            }
        }
        let x = kmat.lu().solve(&rhs).ok_or(Error::EigenFailure)?;
        let mut basis = Matrix::zeros(m, n2);
        for j in 0..n2 {
            for i in 0..n1 {
                basis[(i, j)] = -x[i + n1 * j];
            }
            basis[(n1 + j, j)] = 1.0;
        }
        let q = householder_q(&basis);
        let scale = self.t.view((p, p), (m, m)).norm();
        self.apply(p, &q);
        let leak = self.t.view((p + n2, p), (n1, n2)).norm();
        if !(leak <= 1e-8 * (1.0 + scale)) {
            return Err(Error::EigenFailure);
        }
        self.t.view_mut((p + n2, p), (n1, n2)).fill(0.0);
        self.blocks[k] = (p, n2);
        self.blocks[k + 1] = (p + n2, n1);
        Ok(())
    }

    /// Reorder blocks so that block `order[i]` (an index into the current
    /// block list) ends up at position `i`.
    pub fn permute(&mut self, order: &[usize]) -> Result<()> {
        let mut ids: Vec<usize> = (0..self.blocks.len()).collect();
        for (pos, &want) in order.iter().enumerate() {
            let mut cur = ids.iter().position(|&id| id == want).expect("valid block id");
            while cur > pos {
                self.swap(cur - 1)?;
                ids.swap(cur - 1, cur);
                cur -= 1;
            }
        }
        Ok(())
    }
}

/// Full orthogonal factor of a Householder QR of `m` (rows ≥ cols); its
/// leading columns span the range of `m`.
fn householder_q(m: &Matrix) -> Matrix {
    let (r, c) = m.shape();
    let mut a = m.clone();
    let mut q = Matrix::identity(r, r);
    for j in 0..c.min(r.saturating_sub(1)) {
        let x = a.view((j, j), (r - j, 1)).clone_owned();
        let norm = x.norm();
        if norm == 0.0 {
            continue;
        }
        let alpha = if x[0] >= 0.0 { -norm } else { norm };
        let mut v = x;
        v[0] -= alpha;
        let vn2 = v.norm_squared();
        if vn2 == 0.0 {
            continue;
        }
        // A ← H·A on rows j.., Q ← Q·H on columns j..
        let sub = a.rows(j, r - j).clone_owned();
        let upd = &v * (v.transpose() * &sub) * (2.0 / vn2);
        a.rows_mut(j, r - j).copy_from(&(sub - upd));
        let qs = q.columns(j, r - j).clone_owned();
        let qupd = (&qs * &v) * v.transpose() * (2.0 / vn2);
        q.columns_mut(j, r - j).copy_from(&(qs - qupd));
    }
    q
}

/// Real Schur form of a square matrix with canonically ordered blocks.
#[derive(Debug, Clone)]
pub struct SchurStructure {
    source: Matrix,
    schur: RealSchur,
    blocks: Vec<SchurBlock>,
}

/// Orthonormal basis of an invariant subspace spanned by a set of Schur blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantSubspace {
    /// Sorted block indices into the parent [`SchurStructure`].
    pub block_indices: Vec<usize>,
    /// n×k matrix with orthonormal columns.
    pub basis: Matrix,
}

impl InvariantSubspace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient_dim()
    }

    /// Orthonormal basis of the orthogonal complement.
    pub fn complement(&self) -> Matrix {
        let (n, k) = self.basis.shape();
        householder_q(&self.basis).columns(k, n - k).into_owned()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    /// ‖(I − VVᵀ)·M·V‖ for the basis V.
    pub fn invariance_error(&self, m: &Matrix) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        let mv = m * &self.basis;
        (&mv - &self.basis * (self.basis.transpose() * &mv)).norm()
    }

    /// Fails with `InvarianceViolation` unless the invariance error is within
    /// `TOL_INV`·(1 + ‖M‖).
    pub fn check_invariant(&self, m: &Matrix) -> Result<()> {
        if m.nrows() != self.ambient_dim() {
            return Err(Error::DimensionMismatch("subspace and matrix dimensions differ"));
        }
        let error = self.invariance_error(m);
        let tol = TOL_INV * (1.0 + m.norm());
        if error <= tol {
            Ok(())
        } else {
            Err(Error::InvarianceViolation { error, tol })
        }
    }
}

/// Real Schur structure of `m` with blocks in canonical order.
pub fn schur_structure(m: &Matrix) -> Result<SchurStructure> {
    SchurStructure::new(m)
}

impl SchurStructure {
    pub fn new(m: &Matrix) -> Result<Self> {
        let mut schur = RealSchur::new(m)?;
        let raw: Vec<SchurBlock> =
            (0..schur.blocks.len()).map(|k| SchurBlock { size: schur.blocks[k].1, eigenvalue: schur.block_eigenvalue(k) }).collect();
        let mut order: Vec<usize> = (0..raw.len()).collect();
        order.sort_by(|&a, &b| raw[a].canonical_cmp(&raw[b]));
        schur.permute(&order)?;
        let blocks =
            (0..schur.blocks.len()).map(|k| SchurBlock { size: schur.blocks[k].1, eigenvalue: schur.block_eigenvalue(k) }).collect();
        Ok(Self { source: m.clone(), schur, blocks })
    }

    pub fn source(&self) -> &Matrix {
        &self.source
    }

    pub fn dim(&self) -> usize {
        self.source.nrows()
    }

    pub fn blocks(&self) -> &[SchurBlock] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Orthogonal Schur vectors Z.
    pub fn vectors(&self) -> &Matrix {
        &self.schur.z
    }

    /// Quasi-triangular factor T.
    pub fn triangular(&self) -> &Matrix {
        &self.schur.t
    }

    /// All eigenvalues, block by block; conjugate pairs as (λ, λ̄) with Im λ > 0.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.blocks.iter().flat_map(|b| b.eigenvalues()).collect()
    }

    /// Eigenvalues of the selected blocks.
    pub fn eigenvalues_of(&self, indices: &[usize]) -> Vec<Complex64> {
        indices.iter().flat_map(|&k| self.blocks[k].eigenvalues()).collect()
    }

    fn normalize(&self, indices: &[usize]) -> Result<Vec<usize>> {
        let mut idx: Vec<usize> = indices.to_vec();
        idx.sort_unstable();
        idx.dedup();
        if let Some(&bad) = idx.iter().find(|&&k| k >= self.blocks.len()) {
            return Err(Error::BlockIndexOutOfRange { index: bad, blocks: self.blocks.len() });
        }
        Ok(idx)
    }

    /// Orthonormal basis of the invariant subspace spanned by the selected blocks.
    pub fn basis_for(&self, indices: &[usize]) -> Result<Matrix> {
        let idx = self.normalize(indices)?;
        let k: usize = idx.iter().map(|&i| self.blocks[i].size).sum();
        let n = self.dim();
        if k == 0 {
            return Ok(Matrix::zeros(n, 0));
        }
        if k == n {
            return Ok(Matrix::identity(n, n));
        }
        let mut schur = self.schur.clone();
        let mut order = idx.clone();
        order.extend((0..self.blocks.len()).filter(|i| !idx.contains(i)));
        schur.permute(&order)?;
        Ok(schur.z.columns(0, k).clone_owned())
    }

    pub fn subspace(&self, indices: &[usize]) -> Result<InvariantSubspace> {
        let block_indices = self.normalize(indices)?;
        let basis = self.basis_for(&block_indices)?;
        Ok(InvariantSubspace { block_indices, basis })
    }

    pub fn zero_subspace(&self) -> InvariantSubspace {
        InvariantSubspace { block_indices: Vec::new(), basis: Matrix::zeros(self.dim(), 0) }
    }

    pub fn full_subspace(&self) -> InvariantSubspace {
        InvariantSubspace { block_indices: (0..self.blocks.len()).collect(), basis: Matrix::identity(self.dim(), self.dim()) }
    }

    /// Fails with `RepeatedEigenvalues` unless all eigenvalues are pairwise distinct.
    pub fn check_distinct(&self) -> Result<()> {
        if super::eigenvalue_separation(&self.eigenvalues()) > DISTINCT_TOL {
            Ok(())
        } else {
            Err(Error::RepeatedEigenvalues)
        }
    }

    /// Scale used by invariance checks: 1 + ‖source‖₂.
    pub fn scale(&self) -> f64 {
        1.0 + spectral_norm(&self.source)
    }
}

/// Block subset encoded by a bit mask (bit i selects block i).
pub(crate) fn mask_indices(mask: u64, blocks: usize) -> Vec<usize> {
    (0..blocks).filter(|i| mask >> i & 1 == 1).collect()
}

/// Every invariant subspace that is a sum of Schur blocks, one per subset,
/// ordered by the subset's bit mask (block i ↔ bit i). The first entry is the
/// zero subspace and the last is the whole space.
pub fn enumerate_subspaces(s: &SchurStructure) -> Result<Vec<InvariantSubspace>> {
    s.check_distinct()?;
    let b = s.block_count();
    assert!(b < 64, "too many Schur blocks to enumerate");
    (0..1u64 << b).map(|mask| s.subspace(&mask_indices(mask, b))).collect()
}
