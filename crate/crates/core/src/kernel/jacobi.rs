//! Jacobi-type singular value and symmetric eigenvalue decompositions.
//!
//! Both converge to full working accuracy on the small dense matrices used
//! here, including exactly rank-deficient ones, where the QR-iteration
//! routines in nalgebra can lose several digits.

use alloc::vec::Vec;

use nalgebra::DVector;

use super::{symmetrize, Matrix};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// Thin decomposition M = U·diag(s)·Vᵀ with s sorted descending.
///
/// For an r×c input with k = min(r, c): U is r×k, V is c×k. Columns of U
/// belonging to zero singular values are zero.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

impl Svd {
    pub fn max(&self) -> f64 {
        self.s.first().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.s.last().copied().unwrap_or(0.0)
    }
}

pub fn svd(m: &Matrix) -> Result<Svd> {
    if !super::is_finite(m) {
        return Err(Error::NonFinite("svd input"));
    }
    if m.nrows() < m.ncols() {
        let t = jacobi(&m.transpose())?;
        return Ok(Svd { u: t.v, s: t.s, v: t.u });
    }
    jacobi(m)
}

/// Requires rows ≥ cols.
fn jacobi(m: &Matrix) -> Result<Svd> {
    let (r, c) = m.shape();
    let mut w = m.clone();
    let mut v = Matrix::identity(c, c);
    // columns below this squared norm are rounding noise; rotating them
    // cannot change any singular value above ε·‖M‖ and may cycle forever
    let floor = {
        let e = f64::EPSILON * m.norm();
        e * e
    };
    let tol = f64::EPSILON * r as f64;
    let mut converged = c < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for i in 0..c - 1 {
            for j in i + 1..c {
                let (alpha, beta, gamma) = {
                    let (ci, cj) = (w.column(i), w.column(j));
                    (ci.norm_squared(), cj.norm_squared(), ci.dot(&cj))
                };
                if gamma == 0.0 || alpha.min(beta) <= floor || gamma.abs() <= tol * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
                let cs = 1.0 / libm::sqrt(1.0 + t * t);
                let sn = cs * t;
                rotate(&mut w, i, j, cs, sn);
                rotate(&mut v, i, j, cs, sn);
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::EigenFailure);
    }

    let mut order: Vec<(usize, f64)> = (0..c).map(|k| (k, w.column(k).norm())).collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut u = Matrix::zeros(r, c);
    let mut vs = Matrix::zeros(c, c);
    let mut s = Vec::with_capacity(c);
    for (dst, &(src, sigma)) in order.iter().enumerate() {
        if sigma > 0.0 {
            u.set_column(dst, &(w.column(src) / sigma));
        }
        vs.set_column(dst, &v.column(src));
        s.push(sigma);
    }
    Ok(Svd { u, s, v: vs })
}

/// A = V·diag(λ)·Vᵀ for symmetric A, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: Matrix,
}

/// Cyclic two-sided Jacobi on the symmetric part of `m`.
pub fn sym_eigen(m: &Matrix) -> Result<SymEigen> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("square matrix expected"));
    }
    if !super::is_finite(m) {
        return Err(Error::NonFinite("eigen input"));
    }
    let n = m.nrows();
    let mut a = symmetrize(m);
    let mut v = Matrix::identity(n, n);
    let scale = a.norm();
    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 || apq.abs() <= f64::EPSILON * 1e-3 * scale {
                    continue;
                }
                let (app, aqq) = (a[(p, p)], a[(q, q)]);
                if apq.abs() <= f64::EPSILON * libm::sqrt(app.abs()) * libm::sqrt(aqq.abs()) {
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta == 0.0 { 1.0 } else { theta.signum() / (theta.abs() + libm::sqrt(1.0 + theta * theta)) };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                // A ← JᵀAJ with J the rotation in the (p, q) plane
                rotate(&mut a, p, q, c, s);
                rotate_rows(&mut a, p, q, c, s);
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                rotate(&mut v, p, q, c, s);
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::EigenFailure);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    Ok(SymEigen { eigenvalues: DVector::from_iterator(n, order.iter().map(|&k| a[(k, k)])), eigenvectors: v.select_columns(&order) })
}

fn rotate_rows(m: &mut Matrix, i: usize, j: usize, cs: f64, sn: f64) {
    for k in 0..m.ncols() {
        let (a, b) = (m[(i, k)], m[(j, k)]);
        m[(i, k)] = cs * a - sn * b;
        m[(j, k)] = sn * a + cs * b;
    }
}

fn rotate(m: &mut Matrix, i: usize, j: usize, cs: f64, sn: f64) {
    for k in 0..m.nrows() {
        let (a, b) = (m[(k, i)], m[(k, j)]);
        m[(k, i)] = cs * a - sn * b;
        m[(k, j)] = sn * a + cs * b;
    }
}
