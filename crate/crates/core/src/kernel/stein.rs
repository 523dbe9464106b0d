use super::schur::RealSchur;
use super::{eigenvalues, unmixed_margin, Matrix, UNMIXED_TOL};
use crate::error::{Error, Result};

/// Unique solution of the Stein equation X − Fᵀ·X·F = G.
///
/// F is reduced to real Schur form F = Z·T·Zᵀ; the transformed equation
/// Y − TᵀYT = ZᵀGZ is solved block column by block column, each diagonal
/// block pair giving an at most 4×4 linear system. O(n³) overall.
pub fn solve_stein(f: &Matrix, g: &Matrix) -> Result<Matrix> {
    let n = f.nrows();
    if !f.is_square() || g.shape() != (n, n) {
        return Err(Error::DimensionMismatch("Stein equation needs square F and G of equal size"));
    }
    if !super::is_finite(f) || !super::is_finite(g) {
        return Err(Error::NonFinite("Stein equation input"));
    }
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    if unmixed_margin(&eigenvalues(f)?) <= UNMIXED_TOL {
        return Err(Error::NotUnmixed);
    }
    let schur = RealSchur::new(f)?;
    let (z, t) = (&schur.z, &schur.t);
    let h = z.transpose() * g * z;
    let mut y = Matrix::zeros(n, n);

    for &(cj, q) in &schur.blocks {
        // Σ_{l<j} Y_{:,l}·T_{l,j}
        let known = if cj > 0 { y.columns(0, cj) * t.view((0, cj), (cj, q)) } else { Matrix::zeros(n, q) };
        let tjj = t.view((cj, cj), (q, q)).clone_owned();
        for &(ri, p) in &schur.blocks {
            let end = ri + p;
            let mut rhs = h.view((ri, cj), (p, q)).clone_owned();
            // Σ_{k≤i} T_{k,i}ᵀ · known_k
            rhs += t.view((0, ri), (end, p)).transpose() * known.rows(0, end);
            // Σ_{k<i} T_{k,i}ᵀ · Y_{k,j} · T_{j,j}
            if ri > 0 {
                rhs += t.view((0, ri), (ri, p)).transpose() * (y.view((0, cj), (ri, q)) * &tjj);
            }
            let tii = t.view((ri, ri), (p, p)).clone_owned();
            let block = solve_small(&tii, &tjj, &rhs)?;
            y.view_mut((ri, cj), (p, q)).copy_from(&block);
        }
    }
    Ok(z * y * z.transpose())
}

/// Solve Y − T_iiᵀ·Y·T_jj = R for a p×q block.
fn solve_small(tii: &Matrix, tjj: &Matrix, rhs: &Matrix) -> Result<Matrix> {
    let (p, q) = rhs.shape();
    let dim = p * q;
    // column-major vec: vec(T_iiᵀ Y T_jj) = (T_jjᵀ ⊗ T_iiᵀ) vec(Y)
    let mut k = Matrix::identity(dim, dim);
    for j in 0..q {
        for i in 0..p {
            for l in 0..q {
                for m in 0..p {
                    k[(i + p * j, m + p * l)] -= tjj[(l, j)] * tii[(m, i)];
                }
            }
        }
    }
    let r = nalgebra::DVector::from_column_slice(rhs.as_slice());
    let v = k.lu().solve(&r).ok_or(Error::NotUnmixed)?;
    Ok(Matrix::from_column_slice(p, q, v.as_slice()))
}
