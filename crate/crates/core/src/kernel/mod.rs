//! Dense matrix primitives shared by the rest of the crate.
//!
//! Everything here works on `nalgebra::DMatrix<f64>`. Rank and kernel
//! decisions use the single relative cutoff [`RTOL`].

mod jacobi;
mod schur;
mod stein;

pub(crate) use jacobi::sym_eigen;
pub use jacobi::{svd, Svd, SymEigen};
pub use schur::{enumerate_subspaces, schur_structure, InvariantSubspace, SchurBlock, SchurStructure};
pub use stein::solve_stein;

use alloc::vec::Vec;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type CMatrix = DMatrix<Complex64>;

/// Relative singular-value cutoff for every rank and kernel decision.
pub const RTOL: f64 = 1e-10;
/// Relative residual tolerance for Stein and Riccati solutions.
pub const TOL_RESIDUAL: f64 = 1e-8;
/// Relative tolerance of the invariant-subspace check.
pub const TOL_INV: f64 = 1e-10;
/// Relative positivity threshold for symmetric positive definite checks.
pub const EPS_PD: f64 = 1e-10;
/// Tolerance on |λᵢλⱼ − 1| below which a matrix counts as mixed.
pub const UNMIXED_TOL: f64 = 1e-8;
/// Relative separation below which two eigenvalues count as repeated.
pub const DISTINCT_TOL: f64 = 1e-8;

/// (M + Mᵀ)/2.
pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

pub fn is_finite(m: &Matrix) -> bool {
    m.iter().all(|x| x.is_finite())
}

/// Largest singular value.
pub fn spectral_norm(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    match svd(m) {
        Ok(s) => s.max(),
        Err(_) => m.norm(),
    }
}

/// Moore-Penrose pseudoinverse with singular values ≤ `rtol`·σ_max treated as zero.
/// Non-finite input yields a zero matrix.
pub fn pinv(m: &Matrix, rtol: f64) -> Matrix {
    let (r, c) = m.shape();
    let Ok(dec) = svd(m) else {
        return Matrix::zeros(c, r);
    };
    let cut = rtol * dec.max();
    let mut out = Matrix::zeros(c, r);
    for (k, &s) in dec.s.iter().enumerate() {
        if s > cut && s > 0.0 {
            out += (dec.v.column(k) * dec.u.column(k).transpose()) / s;
        }
    }
    out
}

/// Numerical rank with cutoff `rtol`·σ_max.
pub fn rank(m: &Matrix, rtol: f64) -> usize {
    match svd(m) {
        Ok(d) => d.s.iter().filter(|&&x| x > 0.0 && x > rtol * d.max()).count(),
        Err(_) => 0,
    }
}

/// True when the square matrix is numerically nonsingular under [`RTOL`].
pub fn is_nonsingular(m: &Matrix) -> bool {
    m.is_square() && rank(m, RTOL) == m.nrows()
}

/// Orthonormal basis of the numerical null space.
pub fn null_space(m: &Matrix, rtol: f64) -> Matrix {
    let (r, n) = m.shape();
    // pad to at least square so that V is complete
    let padded = if r < n { m.clone().resize_vertically(n, 0.0) } else { m.clone() };
    let Ok(dec) = svd(&padded) else {
        return Matrix::zeros(n, 0);
    };
    let smax = dec.max();
    let cols: Vec<_> =
        dec.s.iter().enumerate().filter(|(_, &s)| smax == 0.0 || s <= rtol * smax).map(|(k, _)| dec.v.column(k).into_owned()).collect();
    if cols.is_empty() {
        Matrix::zeros(n, 0)
    } else {
        Matrix::from_columns(&cols)
    }
}

/// Sine of the largest principal angle between two subspaces given by
/// orthonormal bases; 1.0 when their dimensions differ.
pub fn subspace_gap(v1: &Matrix, v2: &Matrix) -> f64 {
    if v1.ncols() != v2.ncols() || v1.nrows() != v2.nrows() {
        return 1.0;
    }
    if v1.ncols() == 0 {
        return 0.0;
    }
    let resid = v2 - v1 * (v1.transpose() * v2);
    spectral_norm(&resid)
}

/// Symmetric positive definite square root via the symmetric eigendecomposition.
pub fn sqrtm_spd(m: &Matrix) -> Result<Matrix> {
    let (vals, vecs) = spd_eigen(m)?;
    let roots = vals.map(libm::sqrt);
    Ok(symmetrize(&(&vecs * Matrix::from_diagonal(&roots) * vecs.transpose())))
}

/// Inverse of the symmetric positive definite square root.
pub fn inv_sqrtm_spd(m: &Matrix) -> Result<Matrix> {
    let (vals, vecs) = spd_eigen(m)?;
    let roots = vals.map(|x| 1.0 / libm::sqrt(x));
    Ok(symmetrize(&(&vecs * Matrix::from_diagonal(&roots) * vecs.transpose())))
}

/// True when the symmetric matrix passes the positivity threshold used by [`sqrtm_spd`].
pub fn is_positive_definite(m: &Matrix) -> bool {
    spd_eigen(m).is_ok()
}

fn spd_eigen(m: &Matrix) -> Result<(nalgebra::DVector<f64>, Matrix)> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("square matrix expected"));
    }
    if m.is_empty() {
        return Ok((nalgebra::DVector::zeros(0), Matrix::zeros(0, 0)));
    }
    let eig = sym_eigen(m)?;
    let n = m.nrows() as f64;
    let scale = m.trace() / n;
    let threshold = EPS_PD * scale;
    let min = eig.eigenvalues.min();
    if !(scale > 0.0) || !(min > threshold) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok((eig.eigenvalues, eig.eigenvectors))
}

/// Orthogonal projector basis·basisᵀ onto the span of orthonormal columns.
pub fn orth_projector(basis: &Matrix) -> Result<Matrix> {
    let (n, k) = basis.shape();
    if k == 0 {
        return Ok(Matrix::zeros(n, n));
    }
    let gram = basis.transpose() * basis;
    let err = (gram - Matrix::identity(k, k)).norm();
    if err > 1e-10 * (1.0 + k as f64) {
        return Err(Error::NotOrthonormal);
    }
    Ok(symmetrize(&(basis * basis.transpose())))
}

/// True iff no two eigenvalues (an eigenvalue with itself included) have
/// |λᵢλⱼ − 1| ≤ `tol`. Returns false when the eigenvalues cannot be computed.
pub fn is_unmixed(m: &Matrix, tol: f64) -> bool {
    match eigenvalues(m) {
        Ok(ev) => unmixed_margin(&ev) > tol,
        Err(_) => false,
    }
}

/// min over i ≤ j of |λᵢλⱼ − 1|.
pub fn unmixed_margin(ev: &[Complex64]) -> f64 {
    let one = Complex64::new(1.0, 0.0);
    let mut margin = f64::INFINITY;
    for i in 0..ev.len() {
        for j in i..ev.len() {
            margin = margin.min((ev[i] * ev[j] - one).norm());
        }
    }
    margin
}

/// Eigenvalues in canonical order (see [`SchurStructure`]).
pub fn eigenvalues(m: &Matrix) -> Result<Vec<Complex64>> {
    Ok(schur_structure(m)?.eigenvalues())
}

/// Smallest relative gap |λᵢ − λⱼ| / (1 + max|λ|) between distinct entries.
pub fn eigenvalue_separation(ev: &[Complex64]) -> f64 {
    let scale = 1.0 + ev.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut gap = f64::INFINITY;
    for i in 0..ev.len() {
        for j in i + 1..ev.len() {
            gap = gap.min((ev[i] - ev[j]).norm() / scale);
        }
    }
    gap
}

/// Greedy nearest-neighbour comparison of two eigenvalue multisets. Returns
/// the largest mismatch relative to the larger modulus of each matched pair,
/// or infinity when the sizes differ.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = alloc::vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let mut best = None;
        let mut best_d = f64::INFINITY;
        for (j, y) in b.iter().enumerate() {
            if used[j] {
                continue;
            }
            let d = (x - y).norm();
            if d < best_d {
                best_d = d;
                best = Some(j);
            }
        }
        let j = best.expect("sizes match");
        used[j] = true;
        let scale = x.norm().max(b[j].norm()).max(f64::MIN_POSITIVE);
        worst = worst.max(best_d / scale);
    }
    worst
}

/// Multiset equality to relative tolerance `rtol`.
pub fn multisets_match(a: &[Complex64], b: &[Complex64], rtol: f64) -> bool {
    multiset_distance(a, b) <= rtol
}

/// Solve M·X = R for square nonsingular M, reporting `err` when M is singular.
pub(crate) fn solve(m: &Matrix, rhs: &Matrix, err: Error) -> Result<Matrix> {
    if !is_nonsingular(m) {
        return Err(err);
    }
    m.clone().lu().solve(rhs).ok_or(err)
}
