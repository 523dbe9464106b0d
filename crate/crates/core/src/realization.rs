//! State-space realizations W(z) = C(zI − A)⁻¹B + D of square spectral
//! factors, their derived quantities and the admissibility gate.

use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::kernel::{
    self, eigenvalue_separation, is_nonsingular, is_positive_definite, schur_structure, unmixed_margin, CMatrix, Matrix, SchurStructure,
    UNMIXED_TOL,
};
use crate::riccati;

/// The quadruple (A, B, C, D) of a square spectral factor.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    a: Matrix,
    b: Matrix,
    c: Matrix,
    d: Matrix,
}

impl StateSpaceModel {
    /// Checks dimensions (A n×n, B n×m, C m×n, D m×m) and finiteness.
    pub fn new(a: Matrix, b: Matrix, c: Matrix, d: Matrix) -> Result<Self> {
        let n = a.nrows();
        let m = d.nrows();
        if !a.is_square() {
            return Err(Error::DimensionMismatch("A must be square"));
        }
        if !d.is_square() || m == 0 {
            return Err(Error::DimensionMismatch("D must be square and non-empty"));
        }
        if b.shape() != (n, m) {
            return Err(Error::DimensionMismatch("B must be n×m"));
        }
        if c.shape() != (m, n) {
            return Err(Error::DimensionMismatch("C must be m×n"));
        }
        for (name, mat) in [("A", &a), ("B", &b), ("C", &c), ("D", &d)] {
            if !kernel::is_finite(mat) {
                return Err(Error::NonFinite(name));
            }
        }
        Ok(Self { a, b, c, d })
    }

    /// Scalar model (a, b, c, d).
    pub fn scalar(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let s = |x| Matrix::from_element(1, 1, x);
        Self::new(s(a), s(b), s(c), s(d))
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }
    pub fn b(&self) -> &Matrix {
        &self.b
    }
    pub fn c(&self) -> &Matrix {
        &self.c
    }
    pub fn d(&self) -> &Matrix {
        &self.d
    }

    /// State dimension n.
    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    /// Output (and input) dimension m.
    pub fn outputs(&self) -> usize {
        self.d.nrows()
    }

    pub fn into_parts(self) -> (Matrix, Matrix, Matrix, Matrix) {
        (self.a, self.b, self.c, self.d)
    }

    /// Copy with B replaced; used for perturbation controls.
    pub fn with_b(&self, b: Matrix) -> Result<Self> {
        Self::new(self.a.clone(), b, self.c.clone(), self.d.clone())
    }
}

/// Numerator matrix Γ = A − B·D⁻¹·C.
pub fn numerator_matrix(m: &StateSpaceModel) -> Result<Matrix> {
    let dinv_c = kernel::solve(&m.d, &m.c, Error::SingularD)?;
    Ok(&m.a - &m.b * dinv_c)
}

fn to_complex(m: &Matrix) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Relative LU pivot of zI − A below which z counts as a pole.
const POLE_HIT_RTOL: f64 = 1e-14;

/// W(z) = C(zI − A)⁻¹B + D.
pub fn eval_tf(m: &StateSpaceModel, z: Complex64) -> Result<CMatrix> {
    let n = m.order();
    let d = to_complex(&m.d);
    if n == 0 {
        return Ok(d);
    }
    let shifted = CMatrix::from_fn(n, n, |i, j| {
        let diag = if i == j { z } else { Complex64::new(0.0, 0.0) };
        diag - m.a[(i, j)]
    });
    let scale = shifted.norm();
    let lu = shifted.lu();
    let min_pivot = lu.u().diagonal().iter().map(|p| p.norm()).fold(f64::INFINITY, f64::min);
    if !(min_pivot > POLE_HIT_RTOL * scale) {
        return Err(Error::PoleHit);
    }
    let x = lu.solve(&to_complex(&m.b)).ok_or(Error::PoleHit)?;
    let w = to_complex(&m.c) * x + d;
    if w.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        Ok(w)
    } else {
        Err(Error::PoleHit)
    }
}

/// Φ(e^{iθ}) = W(e^{iθ})·W(e^{−iθ})ᵀ.
pub fn eval_spectrum(m: &StateSpaceModel, theta: f64) -> Result<CMatrix> {
    let z = Complex64::new(libm::cos(theta), libm::sin(theta));
    let w = eval_tf(m, z)?;
    let w_conj = eval_tf(m, z.inv())?;
    Ok(w * w_conj.transpose())
}

/// Eigenvalues of A in canonical order.
pub fn poles(m: &StateSpaceModel) -> Result<Vec<Complex64>> {
    kernel::eigenvalues(&m.a)
}

/// Eigenvalues of Γ in canonical order.
pub fn zeros(m: &StateSpaceModel) -> Result<Vec<Complex64>> {
    kernel::eigenvalues(&numerator_matrix(m)?)
}

/// Below this PBH margin a realization counts as non-minimal.
pub const MINIMAL_TOL: f64 = 1e-8;

/// min over eigenvalues λ of F of σ_min([λI − F, X]), relative to 1 + ‖F‖ + ‖X‖.
/// Zero exactly when some mode of F is invisible through X.
fn pbh_margin(f: &Matrix, x: &Matrix) -> Result<f64> {
    let n = f.nrows();
    let k = x.ncols();
    let scale = 1.0 + kernel::spectral_norm(f) + kernel::spectral_norm(x);
    let mut margin = f64::INFINITY;
    for lambda in kernel::eigenvalues(f)? {
        let pencil = if lambda.im == 0.0 {
            let mut p = Matrix::zeros(n, n + k);
            p.columns_mut(0, n).copy_from(&(Matrix::from_diagonal_element(n, n, lambda.re) - f));
            p.columns_mut(n, k).copy_from(x);
            p
        } else if lambda.im < 0.0 {
            // the conjugate gives the same singular values
            continue;
        } else {
            // real embedding [[Re, −Im], [Im, Re]] of the complex pencil; it
            // carries every singular value of the pencil twice
            let mut p = Matrix::zeros(2 * n, 2 * (n + k));
            for i in 0..n {
                for j in 0..n {
                    let re = if i == j { lambda.re } else { 0.0 } - f[(i, j)];
                    let im = if i == j { lambda.im } else { 0.0 };
                    p[(i, j)] = re;
                    p[(n + i, n + k + j)] = re;
                    p[(i, n + k + j)] = -im;
                    p[(n + i, j)] = im;
                }
                for j in 0..k {
                    p[(i, n + j)] = x[(i, j)];
                    p[(n + i, 2 * n + k + j)] = x[(i, j)];
                }
            }
            p
        };
        margin = margin.min(kernel::svd(&pencil)?.min() / scale);
    }
    Ok(margin)
}

/// Smaller of the controllability and observability PBH margins.
pub fn minimality_margin(m: &StateSpaceModel) -> Result<f64> {
    if m.order() == 0 {
        return Ok(f64::INFINITY);
    }
    Ok(pbh_margin(&m.a, &m.b)?.min(pbh_margin(&m.a.transpose(), &m.c.transpose())?))
}

/// Joint controllability of (A, B) and observability of (C, A) by the PBH test.
pub fn check_minimal(m: &StateSpaceModel) -> bool {
    minimality_margin(m).is_ok_and(|g| g > MINIMAL_TOL)
}

/// A validated reference factor with the data every flip needs.
#[derive(Debug, Clone)]
pub struct ReferenceFamily {
    model: StateSpaceModel,
    gamma: Matrix,
    p_plus_inv: Matrix,
    q_plus_inv: Option<Matrix>,
    zero_structure: SchurStructure,
    pole_structure: SchurStructure,
}

impl ReferenceFamily {
    pub fn model(&self) -> &StateSpaceModel {
        &self.model
    }
    /// Numerator matrix Γ.
    pub fn gamma(&self) -> &Matrix {
        &self.gamma
    }
    /// P₊⁻¹, the solution of X − ΓᵀXΓ + Cᵀ(DDᵀ)⁻¹C = 0.
    pub fn p_plus_inv(&self) -> &Matrix {
        &self.p_plus_inv
    }
    /// Q₊⁻¹, the solution of AXAᵀ − X = BBᵀ; absent when A is singular.
    pub fn q_plus_inv(&self) -> Option<&Matrix> {
        self.q_plus_inv.as_ref()
    }
    /// Real Schur structure of Γᵀ (indexes zero flips).
    pub fn zero_structure(&self) -> &SchurStructure {
        &self.zero_structure
    }
    /// Real Schur structure of A (indexes pole flips).
    pub fn pole_structure(&self) -> &SchurStructure {
        &self.pole_structure
    }
    pub fn order(&self) -> usize {
        self.model.order()
    }
    pub fn a_is_singular(&self) -> bool {
        self.q_plus_inv.is_none()
    }
}

/// Validate every admissibility assumption and build the reference family.
///
/// Checks, in order: D symmetric, D positive definite, A unmixed, Γ
/// nonsingular, Γ unmixed, minimality.
pub fn check_admissible(m: &StateSpaceModel) -> Result<ReferenceFamily> {
    let d = &m.d;
    if (d - d.transpose()).norm() > 1e-12 * (1.0 + d.norm()) {
        return Err(Error::AsymmetricD);
    }
    if !is_positive_definite(d) {
        return Err(Error::NotPDD);
    }
    let pole_structure = schur_structure(&m.a)?;
    if unmixed_margin(&pole_structure.eigenvalues()) <= UNMIXED_TOL {
        return Err(Error::MixedA);
    }
    let gamma = numerator_matrix(m)?;
    if m.order() > 0 && !is_nonsingular(&gamma) {
        return Err(Error::SingularGamma);
    }
    let zero_structure = schur_structure(&gamma.transpose())?;
    if unmixed_margin(&zero_structure.eigenvalues()) <= UNMIXED_TOL {
        return Err(Error::MixedGamma);
    }
    if !check_minimal(m) {
        return Err(Error::NotMinimal);
    }
    let p_plus_inv = riccati::p_anchor_inverse(&gamma, &m.c, d)?;
    let q_plus_inv = if m.order() == 0 || is_nonsingular(&m.a) { Some(riccati::q_anchor_inverse(&m.a, &m.b)?) } else { None };
    Ok(ReferenceFamily { model: m.clone(), gamma, p_plus_inv, q_plus_inv, zero_structure, pole_structure })
}

/// Attempts made by [`random_admissible`] before giving up.
pub const GENERATION_ATTEMPTS: usize = 20_000;

/// Conditioning margin required of generated models: unmixedness margin of
/// every flipped configuration and relative eigenvalue separation.
const GEN_MARGIN: f64 = 0.05;
const GEN_MINIMAL_MARGIN: f64 = 1e-3;
const GEN_MAX_ANCHOR_COND: f64 = 1e3;
const GEN_MAX_CANCELLATION: f64 = 300.0;
const LAMBDA_ATTEMPTS: usize = 1000;
const MAX_SIMILARITY_COND: f64 = 4.0;

/// Deterministic random admissible model with a stable, nonsingular A and
/// pairwise-distinct, well-separated poles and zeros.
///
/// A = R·Λ·R⁻¹ with Λ block diagonal (real eigenvalues and rotation blocks)
/// of moduli in [0.2, 0.8]; B and C Gaussian; D = I + a small SPD term.
/// Candidates are rejected until Γ is unmixed with distinct eigenvalues,
/// every pole/zero flip pattern stays unmixed with margin, and the model
/// passes [`check_admissible`].
pub fn random_admissible(n: usize, m: usize, seed: u64) -> Result<StateSpaceModel> {
    assert!(n >= 1 && m >= 1, "n and m must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last = "none";
    for _ in 0..GENERATION_ATTEMPTS {
        match candidate(&mut rng, n, m) {
            Ok(model) => return Ok(model),
            Err(reason) => last = reason,
        }
    }
    Err(Error::GenerationFailure { attempts: GENERATION_ATTEMPTS, last })
}

fn gaussian(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Matrix {
    let mut out = Matrix::zeros(r, c);
    for i in 0..r {
        for j in 0..c {
            out[(i, j)] = rng.sample::<f64, _>(StandardNormal);
        }
    }
    out
}

/// Block-diagonal Λ with separated eigenvalues: real entries and rotation
/// blocks, moduli in [0.2, 0.8].
fn sample_lambda(rng: &mut ChaCha8Rng, n: usize) -> core::result::Result<Matrix, &'static str> {
    for _ in 0..LAMBDA_ATTEMPTS {
        let mut lambda = Matrix::zeros(n, n);
        let mut ev = Vec::with_capacity(n);
        let mut i = 0;
        while i < n {
            let radius = rng.gen_range(0.2..0.8);
            if i + 1 < n && rng.gen_bool(0.3) {
                let angle = rng.gen_range(0.3..core::f64::consts::PI - 0.3);
                let (c, s) = (radius * libm::cos(angle), radius * libm::sin(angle));
                lambda[(i, i)] = c;
                lambda[(i, i + 1)] = -s;
                lambda[(i + 1, i)] = s;
                lambda[(i + 1, i + 1)] = c;
                ev.push(Complex64::new(c, s));
                ev.push(Complex64::new(c, -s));
                i += 2;
            } else {
                let x = if rng.gen_bool(0.5) { radius } else { -radius };
                lambda[(i, i)] = x;
                ev.push(Complex64::new(x, 0.0));
                i += 1;
            }
        }
        if well_separated(&ev) {
            return Ok(lambda);
        }
    }
    Err("poles too close")
}

/// Random orthogonal matrix from the QR factor of a Gaussian matrix.
fn orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    gaussian(rng, n, n).qr().q()
}

fn candidate(rng: &mut ChaCha8Rng, n: usize, m: usize) -> core::result::Result<StateSpaceModel, &'static str> {
    let lambda = sample_lambda(rng, n)?;
    // R = U·diag(σ)·Vᵀ with σ in [1, MAX_SIMILARITY_COND], so cond(R) is bounded by construction
    let sigma = Matrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| rng.gen_range(1.0..MAX_SIMILARITY_COND)));
    let (u, v) = (orthogonal(rng, n), orthogonal(rng, n));
    let r = &u * &sigma * v.transpose();
    let r_inv = &v * sigma.map(|x| if x == 0.0 { 0.0 } else { 1.0 / x }) * u.transpose();
    let a = &r * lambda * r_inv;

    let scale = 1.0 / libm::sqrt(n as f64);
    let b = gaussian(rng, n, m) * scale;
    let c = gaussian(rng, m, n) * scale;
    let e = gaussian(rng, m, m);
    let d = kernel::symmetrize(&(Matrix::identity(m, m) + &e * e.transpose() * (0.1 / m as f64)));
    let model = StateSpaceModel::new(a, b, c, d).map_err(|_| "non-finite")?;

    let pole_ev = poles(&model).map_err(|_| "pole eigenvalues")?;
    let zero_ev = zeros(&model).map_err(|_| "zero eigenvalues")?;
    if !well_separated(&pole_ev) {
        return Err("poles too close");
    }
    if !well_separated(&zero_ev) {
        return Err("zeros too close");
    }
    if !cross_separated(&pole_ev, &zero_ev) {
        return Err("pole near a zero or its reciprocal");
    }
    if zero_ev.iter().any(|z| z.norm() < 0.1 || z.norm() > 5.0) {
        return Err("zero modulus out of range");
    }
    if minimality_margin(&model).map_err(|_| "pbh")? < GEN_MINIMAL_MARGIN {
        return Err("weakly minimal");
    }
    let fam = check_admissible(&model).map_err(|e| e.name())?;
    let anchor_q = fam.q_plus_inv().ok_or("singular A")?;
    if condition(fam.p_plus_inv()) > GEN_MAX_ANCHOR_COND || condition(anchor_q) > GEN_MAX_ANCHOR_COND {
        return Err("ill-conditioned anchor");
    }
    if flip_cancellation(&fam).map_err(|e| e.name())? > GEN_MAX_CANCELLATION {
        return Err("flip cancellation");
    }
    Ok(model)
}

/// Distinct eigenvalues and no product or ratio of two of them near one, so
/// any subset can be inverted while staying unmixed.
fn well_separated(ev: &[Complex64]) -> bool {
    if eigenvalue_separation(ev) < GEN_MARGIN {
        return false;
    }
    let one = Complex64::new(1.0, 0.0);
    for i in 0..ev.len() {
        for j in 0..ev.len() {
            if (ev[i] * ev[j] - one).norm() < GEN_MARGIN {
                return false;
            }
            if i != j && (ev[i] / ev[j] - one).norm() < GEN_MARGIN {
                return false;
            }
        }
    }
    true
}

/// Cancellation in the feedthrough updates of the two total flips:
/// 1/λ_min(I + BᵀQ₊B) and ‖DDᵀ‖/λ_min(DDᵀ + CP₊Cᵀ). Every flip of a reference
/// whose total flips stay below a bound inherits a comparable bound.
fn flip_cancellation(fam: &ReferenceFamily) -> Result<f64> {
    let m = &fam.model;
    let q_plus = riccati::solve_q(fam, &fam.pole_structure.zero_subspace())?;
    let p_plus = riccati::solve_p(fam, &fam.zero_structure.zero_subspace())?;
    let k = m.outputs();
    let delta = Matrix::identity(k, k) + m.b.transpose() * &q_plus.matrix * &m.b;
    let dd = &m.d * m.d.transpose();
    let dp = &dd + &m.c * &p_plus.matrix * m.c.transpose();
    let lmin = |x: &Matrix| kernel::sym_eigen(x).map(|e| e.eigenvalues.min());
    let (lp, lz) = (lmin(&delta)?, lmin(&dp)?);
    if !(lp > 0.0 && lz > 0.0) {
        return Err(Error::DeltaNotPD);
    }
    Ok((1.0 / lp).max(kernel::spectral_norm(&dd) / lz))
}

fn condition(m: &Matrix) -> f64 {
    kernel::svd(m).map_or(f64::INFINITY, |d| d.max() / d.min())
}

/// No pole sits near the reciprocal of a zero, so no flip can cancel.
/// Closeness of a pole to an unflipped zero is caught by the minimality margin.
fn cross_separated(poles: &[Complex64], zeros: &[Complex64]) -> bool {
    let one = Complex64::new(1.0, 0.0);
    poles.iter().all(|p| zeros.iter().all(|z| (p * z - one).norm() >= GEN_MARGIN))
}
