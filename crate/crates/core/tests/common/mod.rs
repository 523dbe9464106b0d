//! Shared test helpers: random matrices with prescribed spectra and the
//! Kronecker-product Stein oracle.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use specfac_core::nalgebra::DMatrix;
use specfac_core::Matrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Matrix {
    Matrix::from_fn(r, c, |_, _| rng.sample(StandardNormal))
}

pub fn orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    gaussian(rng, n, n).qr().q()
}

/// R·Λ·R⁻¹ with eigenvalue moduli in [lo, hi], pairwise separated, R of
/// condition number at most 3. Λ mixes real eigenvalues and rotation blocks.
pub fn with_spectrum(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Matrix {
    let mut lambda = Matrix::zeros(n, n);
    let mut i = 0;
    while i < n {
        // radii on a jittered grid keep eigenvalues apart
        let r = lo + (hi - lo) * (i as f64 + rng.gen_range(0.2..0.8)) / n as f64;
        if i + 1 < n && rng.gen_bool(0.4) {
            let t: f64 = rng.gen_range(0.4..2.7);
            lambda[(i, i)] = r * t.cos();
            lambda[(i + 1, i + 1)] = r * t.cos();
            lambda[(i, i + 1)] = r * t.sin();
            lambda[(i + 1, i)] = -r * t.sin();
            i += 2;
        } else {
            lambda[(i, i)] = if rng.gen_bool(0.5) { r } else { -r };
            i += 1;
        }
    }
    let u = orthogonal(rng, n);
    let v = orthogonal(rng, n);
    let s: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..3.0)).collect();
    let r = &u * Matrix::from_diagonal(&s.clone().into()) * v.transpose();
    let r_inv = &v * Matrix::from_diagonal(&s.iter().map(|x| 1.0 / x).collect::<Vec<_>>().into()) * u.transpose();
    r * lambda * r_inv
}

/// Symmetric positive definite with eigenvalues in [lo, hi].
pub fn spd(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Matrix {
    let q = orthogonal(rng, n);
    let d: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
    &q * Matrix::from_diagonal(&d.into()) * q.transpose()
}

/// X − FᵀXF = G solved as the n²×n² linear system (I − Fᵀ⊗Fᵀ)·vec X = vec G.
pub fn stein_kronecker(f: &Matrix, g: &Matrix) -> Matrix {
    let n = f.nrows();
    let ft = f.transpose();
    let op = DMatrix::<f64>::identity(n * n, n * n) - ft.kronecker(&ft);
    let rhs = DMatrix::from_column_slice(n * n, 1, g.as_slice());
    let x = op.lu().solve(&rhs).expect("unmixed F gives a nonsingular Kronecker operator");
    Matrix::from_column_slice(n, n, x.as_slice())
}
