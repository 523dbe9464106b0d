//! Construction of spectral factors by flipping zeros and/or poles of a
//! reference factor.
//!
//! A [`FlipSpec`] lists the Schur blocks whose singularities are KEPT; every
//! other block is flipped to reciprocal positions. Kept blocks span the
//! kernel of the corresponding Riccati solution, so "keep everything" is the
//! zero solution and reproduces the reference.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kernel::{self, inv_sqrtm_spd, sqrtm_spd, symmetrize, Matrix, RTOL};
use crate::realization::{check_admissible, ReferenceFamily, StateSpaceModel};
use crate::riccati::{self, combine_pq, delta, solve_p, solve_q, RiccatiSolution, SolutionKind};

/// Which zero blocks (of Γᵀ) and pole blocks (of A) keep their position.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct FlipSpec {
    pub zero_keep: Vec<usize>,
    pub pole_keep: Vec<usize>,
}

impl FlipSpec {
    pub fn new(zero_keep: &[usize], pole_keep: &[usize]) -> Self {
        let norm = |v: &[usize]| {
            let mut v = v.to_vec();
            v.sort_unstable();
            v.dedup();
            v
        };
        Self { zero_keep: norm(zero_keep), pole_keep: norm(pole_keep) }
    }

    /// Keep every zero and pole: the identity flip.
    pub fn keep_all(fam: &ReferenceFamily) -> Self {
        Self { zero_keep: (0..fam.zero_structure().block_count()).collect(), pole_keep: (0..fam.pole_structure().block_count()).collect() }
    }

    /// Flip every zero and pole.
    pub fn flip_all() -> Self {
        Self::default()
    }

    /// Flip only zeros: all poles kept.
    pub fn zeros_only(fam: &ReferenceFamily, zero_keep: &[usize]) -> Self {
        Self::new(zero_keep, &(0..fam.pole_structure().block_count()).collect::<Vec<_>>())
    }

    /// Flip only poles: all zeros kept.
    pub fn poles_only(fam: &ReferenceFamily, pole_keep: &[usize]) -> Self {
        Self::new(&(0..fam.zero_structure().block_count()).collect::<Vec<_>>(), pole_keep)
    }

    pub fn validate(&self, fam: &ReferenceFamily) -> Result<()> {
        let zb = fam.zero_structure().block_count();
        let pb = fam.pole_structure().block_count();
        if let Some(&index) = self.zero_keep.iter().find(|&&i| i >= zb) {
            return Err(Error::BlockIndexOutOfRange { index, blocks: zb });
        }
        if let Some(&index) = self.pole_keep.iter().find(|&&i| i >= pb) {
            return Err(Error::BlockIndexOutOfRange { index, blocks: pb });
        }
        Ok(())
    }

    /// True when no pole is flipped.
    pub fn keeps_all_poles(&self, fam: &ReferenceFamily) -> bool {
        self.pole_keep.len() == fam.pole_structure().block_count()
    }
}

/// Zero flip of (A, B, C, D) by a solution P of its zero-flip equation:
/// B_P = (BDᵀ + APCᵀ)(DDᵀ + CPCᵀ)^{-1/2}, D_P = (DDᵀ + CPCᵀ)^{1/2}.
fn zero_flip(m: &StateSpaceModel, p: &Matrix) -> Result<StateSpaceModel> {
    let (a, b, c, d) = (m.a(), m.b(), m.c(), m.d());
    let inner = symmetrize(&(d * d.transpose() + c * p * c.transpose()));
    let root = sqrtm_spd(&inner)?;
    let inv_root = inv_sqrtm_spd(&inner)?;
    let b_p = (b * d.transpose() + a * p * c.transpose()) * inv_root;
    StateSpaceModel::new(a.clone(), b_p, c.clone(), root)
}

/// Pole flip of (A, B, C, D) by a solution Q of its pole-flip equation.
fn pole_flip(m: &StateSpaceModel, q: &Matrix) -> Result<StateSpaceModel> {
    let (a, b, c, d) = (m.a(), m.b(), m.c(), m.d());
    let dq = delta(q, b);
    let dq_inv_sqrt = inv_sqrtm_spd(&dq).map_err(|_| Error::DeltaNotPD)?;
    // Δ⁻¹·BᵀQA
    let gain = kernel::solve(&dq, &(b.transpose() * q * a), Error::DeltaNotPD)?;
    let c_q = c - d * &gain;
    let a_q = a - b * &gain;
    let scaled = d * &dq_inv_sqrt;
    let u = polar_factor(&scaled.transpose())?;
    let b_q = b * &dq_inv_sqrt * &u;
    let d_q = symmetrize(&(scaled * u));
    StateSpaceModel::new(a_q, b_q, c_q, d_q)
}

/// Orthogonal polar factor U·Vᵀ of M = U·Σ·Vᵀ.
fn polar_factor(m: &Matrix) -> Result<Matrix> {
    let dec = kernel::svd(m).map_err(|_| Error::PolarFailure)?;
    if !(dec.min() > RTOL * dec.max()) {
        return Err(Error::PolarFailure);
    }
    Ok(&dec.u * dec.v.transpose())
}

/// W_P: same A and C, new B_P and D_P.
pub fn flip_zeros(fam: &ReferenceFamily, p: &RiccatiSolution) -> Result<StateSpaceModel> {
    zero_flip(fam.model(), &p.matrix)
}

/// W_Q: same numerator matrix Γ, poles flipped outside ker Q, feedthrough
/// normalized to be symmetric positive definite.
pub fn flip_poles(fam: &ReferenceFamily, q: &RiccatiSolution) -> Result<StateSpaceModel> {
    pole_flip(fam.model(), &q.matrix)
}

/// Intermediate results of the pole-then-zero construction.
#[derive(Debug, Clone)]
pub struct FlipOutcome {
    pub model: StateSpaceModel,
    pub p: RiccatiSolution,
    pub q: RiccatiSolution,
    pub p_q: RiccatiSolution,
}

/// Pole flip by Q, then zero flip of W_Q by the combined solution P_Q.
pub fn flip_both_detailed(fam: &ReferenceFamily, spec: &FlipSpec) -> Result<FlipOutcome> {
    spec.validate(fam)?;
    let q = solve_q(fam, &fam.pole_structure().subspace(&spec.pole_keep)?)?;
    let p = solve_p(fam, &fam.zero_structure().subspace(&spec.zero_keep)?)?;
    let p_q = combine_pq(fam, &p, &q)?;
    let w_q = flip_poles(fam, &q)?;
    let model = zero_flip(&w_q, &p_q.matrix)?;
    Ok(FlipOutcome { model, p, q, p_q })
}

/// The factor with the zero and pole structure selected by `spec`.
pub fn flip_both(fam: &ReferenceFamily, spec: &FlipSpec) -> Result<StateSpaceModel> {
    Ok(flip_both_detailed(fam, spec)?.model)
}

/// Same factor by the other route: zero flip first, then a pole flip of
/// W_P computed from W_P's own reference family.
pub fn flip_both_dual(fam: &ReferenceFamily, spec: &FlipSpec) -> Result<StateSpaceModel> {
    spec.validate(fam)?;
    let p = solve_p(fam, &fam.zero_structure().subspace(&spec.zero_keep)?)?;
    let w_p = flip_zeros(fam, &p)?;
    let fam_p = check_admissible(&w_p)?;
    // W_P reuses A, so its pole blocks carry the same canonical indices.
    debug_assert_eq!(fam_p.pole_structure().block_count(), fam.pole_structure().block_count());
    let q_p = solve_q(&fam_p, &fam_p.pole_structure().subspace(&spec.pole_keep)?)?;
    flip_poles(&fam_p, &q_p)
}

/// Every zero and every pole moved to its reciprocal.
pub fn total_flip(fam: &ReferenceFamily) -> Result<StateSpaceModel> {
    if fam.a_is_singular() {
        return Err(Error::SingularA);
    }
    flip_both(fam, &FlipSpec::flip_all())
}

/// All 2^(#Γ-blocks)·2^(#A-blocks) factors, zero subsets in the outer loop.
/// Specs follow the subset bit-mask order of the block enumeration.
pub fn enumerate_factors(fam: &ReferenceFamily) -> Result<Vec<(FlipSpec, StateSpaceModel)>> {
    let ps = riccati::enumerate_p(fam)?;
    let qs = riccati::enumerate_q(fam)?;
    let w_qs: Vec<StateSpaceModel> = qs.iter().map(|q| flip_poles(fam, q)).collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(ps.len() * qs.len());
    for p in &ps {
        for (q, w_q) in qs.iter().zip(&w_qs) {
            debug_assert_eq!(q.kind, SolutionKind::PoleFlip);
            let p_q = combine_pq(fam, p, q)?;
            let spec = FlipSpec::new(&p.kernel.block_indices, &q.kernel.block_indices);
            out.push((spec, zero_flip(w_q, &p_q.matrix)?));
        }
    }
    Ok(out)
}
