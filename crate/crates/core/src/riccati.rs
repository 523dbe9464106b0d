//! The two homogeneous algebraic Riccati equations that parametrize zero
//! flips (P) and pole flips (Q), their nonsingular anchors, and the closed
//! form that combines a zero flip with a prior pole flip.
//!
//! Zero-flip equation:
//!   P = ΓPΓᵀ − ΓPCᵀ(DDᵀ + CPCᵀ)⁻¹CPΓᵀ
//! Pole-flip equation:
//!   Q = AᵀQA − AᵀQB(I + BᵀQB)⁻¹BᵀQA
//!
//! The pole-flip equation is the zero-flip equation with (Γ, C, DDᵀ)
//! replaced by (Aᵀ, Bᵀ, I), so both families are computed the same way:
//! for an invariant subspace S with orthogonal projector Π,
//!   X = [(I − Π)·X₊⁻¹·(I − Π)]†
//! where X₊⁻¹ solves the anchor Stein equation.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::flip;
use crate::kernel::{
    self, enumerate_subspaces, is_positive_definite, null_space, solve_stein, subspace_gap, symmetrize, InvariantSubspace, Matrix, EPS_PD,
    RTOL, TOL_RESIDUAL,
};
use crate::realization::{check_admissible, ReferenceFamily};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum SolutionKind {
    /// Solution of the zero-flip equation.
    ZeroFlip,
    /// Solution of the pole-flip equation.
    PoleFlip,
    /// Zero-flip solution relative to a pole-flipped reference.
    Combined,
}

/// A symmetric Riccati solution with its kernel and equation residual.
#[derive(Debug, Clone)]
pub struct RiccatiSolution {
    pub kind: SolutionKind,
    pub matrix: Matrix,
    pub kernel: InvariantSubspace,
    /// Frobenius norm of the equation residual.
    pub residual: f64,
}

impl RiccatiSolution {
    /// residual / (1 + ‖matrix‖).
    pub fn relative_residual(&self) -> f64 {
        self.residual / (1.0 + self.matrix.norm())
    }
}

/// Residual threshold for a solution of norm `x_norm`.
pub fn residual_tolerance(x_norm: f64) -> f64 {
    TOL_RESIDUAL * (1.0 + x_norm)
}

/// X solving X − ΓᵀXΓ + Cᵀ(DDᵀ)⁻¹C = 0.
pub(crate) fn p_anchor_inverse(gamma: &Matrix, c: &Matrix, d: &Matrix) -> Result<Matrix> {
    let ddt = d * d.transpose();
    let w = kernel::solve(&ddt, c, Error::SingularD)?;
    let rhs = -(c.transpose() * w);
    solve_stein(gamma, &symmetrize(&rhs)).map(|x| symmetrize(&x))
}

/// X solving A·X·Aᵀ − X = B·Bᵀ, i.e. X − (Aᵀ)ᵀX(Aᵀ) = −BBᵀ.
pub(crate) fn q_anchor_inverse(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    let rhs = -(b * b.transpose());
    solve_stein(&a.transpose(), &symmetrize(&rhs)).map(|x| symmetrize(&x))
}

/// P₊⁻¹ for the reference, recomputed from its Stein equation.
pub fn p_plus_inverse(fam: &ReferenceFamily) -> Result<Matrix> {
    let m = fam.model();
    p_anchor_inverse(fam.gamma(), m.c(), m.d())
}

/// Q₊⁻¹ for the reference. Q₊ itself is the inverse of the returned matrix.
pub fn q_plus_inverse(fam: &ReferenceFamily) -> Result<Matrix> {
    if fam.a_is_singular() {
        return Err(Error::SingularA);
    }
    let m = fam.model();
    let x = q_anchor_inverse(m.a(), m.b())?;
    if !kernel::is_nonsingular(&x) {
        return Err(Error::SingularAnchor);
    }
    Ok(x)
}

/// [(I − Π_S)·X·(I − Π_S)]† for the anchor inverse X, evaluated as
/// V·(VᵀXV)⁻¹·Vᵀ with V an orthonormal basis of S^⊥.
fn compress(anchor_inv: &Matrix, sub: &InvariantSubspace) -> Result<Matrix> {
    let v = sub.complement();
    let inner = symmetrize(&(v.transpose() * anchor_inv * &v));
    Ok(symmetrize(&(&v * sym_inverse(&inner)? * v.transpose())))
}

/// Inverse of a symmetric matrix through its eigendecomposition.
fn sym_inverse(m: &Matrix) -> Result<Matrix> {
    if m.is_empty() {
        return Ok(m.clone());
    }
    let eig = kernel::sym_eigen(m)?;
    let big = eig.eigenvalues.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if eig.eigenvalues.iter().any(|x| !(x.abs() > RTOL * big)) {
        return Err(Error::SingularAnchor);
    }
    let inv = eig.eigenvalues.map(|x| 1.0 / x);
    Ok(symmetrize(&(&eig.eigenvectors * Matrix::from_diagonal(&inv) * eig.eigenvectors.transpose())))
}

fn check_kernel(x: &Matrix, sub: &InvariantSubspace) -> Result<()> {
    let ker = null_space(x, RTOL);
    if ker.ncols() != sub.dim() || subspace_gap(&sub.basis, &ker) > 1e-6 {
        return Err(Error::KernelMismatch { expected: sub.dim(), found: ker.ncols() });
    }
    Ok(())
}

fn check_residual(residual: f64, x: &Matrix) -> Result<()> {
    let tol = residual_tolerance(x.norm());
    if residual <= tol {
        Ok(())
    } else {
        Err(Error::ResidualTooLarge { residual, tol })
    }
}

/// Zero-flip solution P with ker P = S for a Γᵀ-invariant subspace S.
pub fn solve_p(fam: &ReferenceFamily, sub: &InvariantSubspace) -> Result<RiccatiSolution> {
    let gamma_t = fam.gamma().transpose();
    sub.check_invariant(&gamma_t)?;
    let matrix = if sub.is_full() { Matrix::zeros(fam.order(), fam.order()) } else { compress(fam.p_plus_inv(), sub)? };
    check_kernel(&matrix, sub)?;
    let m = fam.model();
    let residual = riccati_residual_p(&matrix, fam.gamma(), m.c(), m.d())?;
    check_residual(residual, &matrix)?;
    Ok(RiccatiSolution { kind: SolutionKind::ZeroFlip, matrix, kernel: sub.clone(), residual })
}

/// Pole-flip solution Q with ker Q = Y for an A-invariant subspace Y.
///
/// Every result is checked against its residual and for I + BᵀQB ≻ 0.
pub fn solve_q(fam: &ReferenceFamily, sub: &InvariantSubspace) -> Result<RiccatiSolution> {
    let m = fam.model();
    sub.check_invariant(m.a())?;
    let matrix = if sub.is_full() {
        Matrix::zeros(fam.order(), fam.order())
    } else {
        let anchor = fam.q_plus_inv().ok_or(Error::SingularA)?;
        compress(anchor, sub)?
    };
    check_kernel(&matrix, sub)?;
    let residual = riccati_residual_q(&matrix, m.a(), m.b())?;
    check_residual(residual, &matrix)?;
    if !is_positive_definite(&delta(&matrix, m.b())) {
        return Err(Error::DeltaNotPD);
    }
    Ok(RiccatiSolution { kind: SolutionKind::PoleFlip, matrix, kernel: sub.clone(), residual })
}

/// Δ_Q = I + BᵀQB.
pub(crate) fn delta(q: &Matrix, b: &Matrix) -> Matrix {
    let m = b.ncols();
    symmetrize(&(Matrix::identity(m, m) + b.transpose() * q * b))
}

/// P_Q = [PP†·Q·PP† + P†]†.
///
/// With P = VΛVᵀ on its range (V orthonormal, Λ nonsingular) the formula
/// reads V·(VᵀQV + Λ⁻¹)⁻¹·Vᵀ, which is how it is evaluated.
pub fn combine_pq_matrix(p: &Matrix, q: &Matrix) -> Result<Matrix> {
    let n = p.nrows();
    let eig = kernel::sym_eigen(p)?;
    let big = eig.eigenvalues.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let range: Vec<usize> = (0..n).filter(|&k| big > 0.0 && eig.eigenvalues[k].abs() > RTOL * big).collect();
    if range.is_empty() {
        return Ok(Matrix::zeros(n, n));
    }
    let v = eig.eigenvectors.select_columns(&range);
    let lambda_inv = Matrix::from_diagonal(&nalgebra::DVector::from_iterator(range.len(), range.iter().map(|&k| 1.0 / eig.eigenvalues[k])));
    let inner = symmetrize(&(v.transpose() * q * &v + lambda_inv));
    Ok(symmetrize(&(&v * sym_inverse(&inner)? * v.transpose())))
}

/// Combined solution P_Q for the pole-flipped reference W_Q, with
/// ker P_Q = ker P. The residual is taken against W_Q's zero-flip equation.
pub fn combine_pq(fam: &ReferenceFamily, p: &RiccatiSolution, q: &RiccatiSolution) -> Result<RiccatiSolution> {
    assert_eq!(p.kind, SolutionKind::ZeroFlip, "first argument must be a zero-flip solution");
    assert_eq!(q.kind, SolutionKind::PoleFlip, "second argument must be a pole-flip solution");
    let matrix = combine_pq_matrix(&p.matrix, &q.matrix)?;
    let wq = flip::flip_poles(fam, q)?;
    let residual = riccati_residual_p(&matrix, fam.gamma(), wq.c(), wq.d())?;
    check_residual(residual, &matrix)?;
    Ok(RiccatiSolution { kind: SolutionKind::Combined, matrix, kernel: p.kernel.clone(), residual })
}

/// Oracle for [`combine_pq`]: build W_Q, validate it as a reference of its
/// own and solve its zero-flip equation for the subspace S from scratch.
pub fn solve_pq_direct(fam: &ReferenceFamily, q: &RiccatiSolution, sub: &InvariantSubspace) -> Result<RiccatiSolution> {
    let wq = flip::flip_poles(fam, q)?;
    let fam_q = check_admissible(&wq)?;
    let mut sol = solve_p(&fam_q, sub)?;
    sol.kind = SolutionKind::Combined;
    Ok(sol)
}

/// ‖P − ΓPΓᵀ + ΓPCᵀ(DDᵀ + CPCᵀ)⁻¹CPΓᵀ‖_F.
pub fn riccati_residual_p(p: &Matrix, gamma: &Matrix, c: &Matrix, d: &Matrix) -> Result<f64> {
    let inner = symmetrize(&(d * d.transpose() + c * p * c.transpose()));
    inner_check(&inner)?;
    let gp = gamma * p;
    let cpg = c * gp.transpose(); // C·P·Γᵀ
    let corr = cpg.transpose() * kernel::solve(&inner, &cpg, Error::InnerSingular)?;
    Ok((p - &gp * gamma.transpose() + corr).norm())
}

/// ‖Q − AᵀQA + AᵀQB(I + BᵀQB)⁻¹BᵀQA‖_F.
pub fn riccati_residual_q(q: &Matrix, a: &Matrix, b: &Matrix) -> Result<f64> {
    let inner = delta(q, b);
    inner_check(&inner)?;
    let bqa = b.transpose() * q * a;
    let corr = bqa.transpose() * kernel::solve(&inner, &bqa, Error::InnerSingular)?;
    Ok((q - a.transpose() * q * a + corr).norm())
}

/// The middle term is singular when its smallest eigenvalue magnitude falls
/// below `EPS_PD` times its trace scale.
fn inner_check(inner: &Matrix) -> Result<()> {
    let m = inner.nrows();
    let eig = kernel::sym_eigen(inner).map_err(|_| Error::InnerSingular)?;
    let scale = eig.eigenvalues.iter().map(|x| x.abs()).sum::<f64>() / m as f64;
    let min = eig.eigenvalues.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
    if scale > 0.0 && min > EPS_PD * scale {
        Ok(())
    } else {
        Err(Error::InnerSingular)
    }
}

/// One zero-flip solution per Γᵀ-invariant block sum, in subset-mask order.
pub fn enumerate_p(fam: &ReferenceFamily) -> Result<Vec<RiccatiSolution>> {
    enumerate_subspaces(fam.zero_structure())?.iter().map(|s| solve_p(fam, s)).collect()
}

/// One pole-flip solution per A-invariant block sum, in subset-mask order.
pub fn enumerate_q(fam: &ReferenceFamily) -> Result<Vec<RiccatiSolution>> {
    enumerate_subspaces(fam.pole_structure())?.iter().map(|s| solve_q(fam, s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::realization::StateSpaceModel;

    fn scalar_family() -> ReferenceFamily {
        check_admissible(&StateSpaceModel::scalar(0.5, 1.0, 1.0, 1.0).unwrap()).unwrap()
    }

    fn s(x: f64) -> Matrix {
        Matrix::from_element(1, 1, x)
    }

    #[test]
    fn anchors_scalar() {
        let fam = scalar_family();
        assert!((p_plus_inverse(&fam).unwrap()[(0, 0)] + 4.0 / 3.0).abs() < 1e-14);
        let x = q_plus_inverse(&fam).unwrap()[(0, 0)];
        assert!((x + 4.0 / 3.0).abs() < 1e-14);
        assert!((1.0 / x + 0.75).abs() < 1e-14);

        let b2 = check_admissible(&StateSpaceModel::scalar(0.5, 2.0, 1.0, 1.0).unwrap()).unwrap();
        assert!((q_plus_inverse(&b2).unwrap()[(0, 0)] + 16.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn q_anchor_matches_scalar_closed_form() {
        // Q₊ = (a² − 1)/b² for a scalar model
        for &(a, b) in &[(0.5, 1.0), (0.3, 2.0), (-0.7, 0.4), (0.9, 1.5)] {
            let x = q_anchor_inverse(&s(a), &s(b)).unwrap()[(0, 0)];
            assert!((1.0 / x - (a * a - 1.0) / (b * b)).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_a_gate() {
        let m = StateSpaceModel::new(
            Matrix::from_diagonal(&nalgebra::dvector![0.0, 0.4]),
            Matrix::from_column_slice(2, 1, &[1.0, 1.0]),
            Matrix::from_row_slice(1, 2, &[1.0, 0.5]),
            Matrix::identity(1, 1),
        )
        .unwrap();
        let fam = check_admissible(&m).unwrap();
        assert_eq!(q_plus_inverse(&fam), Err(Error::SingularA));
        let zero = fam.pole_structure().zero_subspace();
        assert_eq!(solve_q(&fam, &zero).unwrap_err(), Error::SingularA);
        // keeping every pole needs no anchor
        let q = solve_q(&fam, &fam.pole_structure().full_subspace()).unwrap();
        assert_eq!(q.matrix, Matrix::zeros(2, 2));
    }

    #[test]
    fn solve_p_scalar() {
        let fam = scalar_family();
        let full = solve_p(&fam, &fam.zero_structure().full_subspace()).unwrap();
        assert_eq!(full.matrix, s(0.0));
        let plus = solve_p(&fam, &fam.zero_structure().zero_subspace()).unwrap();
        assert!((plus.matrix[(0, 0)] + 0.75).abs() < 1e-14);
        assert!(plus.residual < 1e-12);
    }

    #[test]
    fn solve_q_scalar() {
        let fam = scalar_family();
        let full = solve_q(&fam, &fam.pole_structure().full_subspace()).unwrap();
        assert_eq!(full.matrix, s(0.0));
        let plus = solve_q(&fam, &fam.pole_structure().zero_subspace()).unwrap();
        assert!((plus.matrix[(0, 0)] + 0.75).abs() < 1e-14);
        assert!((delta(&plus.matrix, fam.model().b())[(0, 0)] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn invariance_is_validated() {
        let m = StateSpaceModel::new(
            Matrix::from_diagonal(&nalgebra::dvector![0.5, -0.3]),
            Matrix::from_row_slice(2, 1, &[1.0, 1.0]),
            Matrix::from_row_slice(1, 2, &[1.0, 1.0]),
            Matrix::identity(1, 1),
        )
        .unwrap();
        let fam = check_admissible(&m).unwrap();
        let bogus = InvariantSubspace {
            block_indices: alloc::vec![0],
            basis: Matrix::from_column_slice(2, 1, &[libm::sqrt(0.5), libm::sqrt(0.5)]),
        };
        assert!(matches!(solve_q(&fam, &bogus), Err(Error::InvarianceViolation { .. })));
    }

    #[test]
    fn residual_examples() {
        let g = s(-0.5);
        let (c, d) = (s(1.0), s(1.0));
        assert_eq!(riccati_residual_p(&s(0.0), &g, &c, &d).unwrap(), 0.0);
        assert!(riccati_residual_p(&s(-0.75), &g, &c, &d).unwrap() < 1e-12);
        assert!(riccati_residual_p(&s(1.0), &g, &c, &d).unwrap() > 0.1);
        assert_eq!(riccati_residual_p(&s(-1.0), &g, &c, &d), Err(Error::InnerSingular));
        assert!(riccati_residual_q(&s(-0.75), &s(0.5), &s(1.0)).unwrap() < 1e-12);
    }

    #[test]
    fn combine_examples() {
        let z = s(0.0);
        assert_eq!(combine_pq_matrix(&z, &s(-0.75)).unwrap(), z);
        assert!((combine_pq_matrix(&s(-0.75), &z).unwrap() - s(-0.75)).norm() < 1e-14);
        let pq = combine_pq_matrix(&s(-0.75), &s(-0.75)).unwrap();
        assert!((pq[(0, 0)] + 0.48).abs() < 1e-14);
        // cross check: 1/P_Q = Q + P₊⁻¹
        assert!((1.0 / pq[(0, 0)] - (-0.75 - 4.0 / 3.0)).abs() < 1e-13);
    }

    #[test]
    fn direct_oracle_scalar() {
        let fam = scalar_family();
        let zero = fam.zero_structure().zero_subspace();
        let q = solve_q(&fam, &fam.pole_structure().zero_subspace()).unwrap();
        let direct = solve_pq_direct(&fam, &q, &zero).unwrap();
        assert!((direct.matrix[(0, 0)] + 0.48).abs() < 1e-13);
        let p = solve_p(&fam, &zero).unwrap();
        let combined = combine_pq(&fam, &p, &q).unwrap();
        assert!((combined.matrix[(0, 0)] + 0.48).abs() < 1e-14);

        let q0 = solve_q(&fam, &fam.pole_structure().full_subspace()).unwrap();
        let d0 = solve_pq_direct(&fam, &q0, &zero).unwrap();
        assert!((d0.matrix - &p.matrix).norm() < 1e-13);
        let full = fam.zero_structure().full_subspace();
        assert_eq!(solve_pq_direct(&fam, &q, &full).unwrap().matrix, s(0.0));
    }

    #[test]
    fn scalar_families() {
        let fam = scalar_family();
        let ps: Vec<f64> = enumerate_p(&fam).unwrap().iter().map(|p| p.matrix[(0, 0)]).collect();
        let qs: Vec<f64> = enumerate_q(&fam).unwrap().iter().map(|q| q.matrix[(0, 0)]).collect();
        assert_eq!(ps.len(), 2);
        assert!((ps[0] + 0.75).abs() < 1e-14 && ps[1] == 0.0);
        assert!((qs[0] + 0.75).abs() < 1e-14 && qs[1] == 0.0);
    }
}
