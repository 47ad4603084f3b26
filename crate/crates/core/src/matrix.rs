//! Dense complex linear algebra used throughout the crate.
//!
//! Matrices are plain `nalgebra` dynamic matrices over `Complex64`. Hermitian
//! and PSD are roles checked at the call sites that need them, with
//! tolerances relative to `1 + ‖H‖_F`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type RMat = DMatrix<f64>;

/// Relative tolerance for the Hermitian check.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Relative tolerance for the PSD check.
pub const PSD_TOL: f64 = 1e-8;

/// Magnitudes within this relative distance of the maximum count as ties
/// when fixing eigenvector phases.
const PHASE_TIE_TOL: f64 = 1e-9;

#[inline]
pub fn cplx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Lifts a real matrix into the complex field.
pub fn from_real(m: &RMat) -> CMat {
    m.map(|x| cplx(x, 0.0))
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn diag(values: &[f64]) -> CMat {
    let n = values.len();
    CMat::from_fn(n, n, |i, j| if i == j { cplx(values[i], 0.0) } else { Complex64::ZERO })
}

/// Column vector with a single unit entry.
pub fn basis(n: usize, i: usize) -> CMat {
    CMat::from_fn(n, 1, |r, _| if r == i { Complex64::ONE } else { Complex64::ZERO })
}

pub fn frobenius_norm_sq(c: &CMat) -> f64 {
    c.iter().map(|z| z.norm_sqr()).sum()
}

pub fn frobenius_norm(c: &CMat) -> f64 {
    frobenius_norm_sq(c).sqrt()
}

/// Real part of the trace.
pub fn trace_re(h: &CMat) -> f64 {
    (0..h.nrows().min(h.ncols())).map(|i| h[(i, i)].re).sum()
}

pub fn max_diag(h: &CMat) -> f64 {
    (0..h.nrows().min(h.ncols()))
        .map(|i| h[(i, i)].re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Largest entrywise deviation `|H[i,j] − conj(H[j,i])|`.
pub fn hermitian_asymmetry(h: &CMat) -> f64 {
    let n = h.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn is_hermitian(h: &CMat) -> bool {
    h.is_square() && hermitian_asymmetry(h) <= HERMITIAN_TOL * (1.0 + frobenius_norm(h))
}

pub fn check_hermitian(h: &CMat) -> Result<()> {
    if !h.is_square() {
        return Err(Error::Dimension(format!(
            "expected a square matrix, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    let asymmetry = hermitian_asymmetry(h);
    if asymmetry > HERMITIAN_TOL * (1.0 + frobenius_norm(h)) {
        return Err(Error::NotHermitian { asymmetry });
    }
    Ok(())
}

/// `(X + X^H) / 2`.
pub fn hermitianize(x: &CMat) -> CMat {
    (x + x.adjoint()).scale(0.5)
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues are ascending. Each eigenvector is scaled so that its
/// largest-magnitude entry (lowest index on ties) is real and positive.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl HermitianEig {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Rebuilds `V f(Λ) V^H`.
    pub fn compose(&self, f: impl Fn(f64) -> f64) -> CMat {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            for i in 0..n {
                scaled[(i, j)] *= w;
            }
        }
        hermitianize(&(scaled * self.vectors.adjoint()))
    }
}

pub fn hermitian_eig(h: &CMat) -> Result<HermitianEig> {
    check_hermitian(h)?;
    let n = h.nrows();
    if n == 0 {
        return Ok(HermitianEig { values: Vec::new(), vectors: CMat::zeros(0, 0) });
    }
    let eig = hermitianize(h).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (j, &k) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(k).into_owned();
        fix_phase(&mut col);
        vectors.set_column(j, &col);
    }
    Ok(HermitianEig { values, vectors })
}

fn fix_phase(col: &mut nalgebra::DVector<Complex64>) {
    let peak = col.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    if peak == 0.0 {
        return;
    }
    let pivot = col
        .iter()
        .position(|z| z.norm() >= peak * (1.0 - PHASE_TIE_TOL))
        .unwrap_or(0);
    let z = col[pivot];
    let rot = z.conj() / z.norm();
    for v in col.iter_mut() {
        *v *= rot;
    }
    // exact zero imaginary part on the pivot
    col[pivot] = cplx(col[pivot].re, 0.0);
}

pub fn min_eigenvalue(h: &CMat) -> Result<f64> {
    Ok(hermitian_eig(h)?.min())
}

pub fn check_psd(h: &CMat) -> Result<HermitianEig> {
    let eig = hermitian_eig(h)?;
    if eig.min() < -PSD_TOL * (1.0 + frobenius_norm(h)) {
        return Err(Error::NotPsd { min_eigenvalue: eig.min() });
    }
    Ok(eig)
}

/// Hermitian PSD square root.
pub fn psd_sqrt(h: &CMat) -> Result<CMat> {
    let eig = check_psd(h)?;
    Ok(eig.compose(|l| l.max(0.0).sqrt()))
}

/// Inverse of the Hermitian PSD square root. Rejects matrices whose smallest
/// eigenvalue is below `1e-12 · trace / n`.
pub fn psd_inv_sqrt(h: &CMat) -> Result<CMat> {
    let eig = check_psd(h)?;
    check_nonsingular(&eig)?;
    Ok(eig.compose(|l| 1.0 / l.sqrt()))
}

fn check_nonsingular(eig: &HermitianEig) -> Result<()> {
    let n = eig.values.len().max(1) as f64;
    let trace: f64 = eig.values.iter().sum();
    let threshold = 1e-12 * trace.abs() / n;
    let smallest = eig.min();
    if smallest <= threshold || smallest <= 0.0 {
        return Err(Error::Singular { eigenvalue: smallest, threshold });
    }
    Ok(())
}

/// Inverse of a Hermitian positive definite matrix, re-Hermitianized.
pub fn pd_inverse(h: &CMat) -> Result<CMat> {
    check_hermitian(h)?;
    match hermitianize(h).cholesky() {
        Some(chol) => Ok(hermitianize(&chol.inverse())),
        None => {
            let eig = hermitian_eig(h)?;
            let n = eig.values.len().max(1) as f64;
            Err(Error::Singular {
                eigenvalue: eig.min(),
                threshold: 1e-12 * eig.values.iter().sum::<f64>().abs() / n,
            })
        }
    }
}

/// Largest eigenvalue modulus of a square matrix, via the complex Schur form.
pub fn spectral_radius(a: &CMat) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("spectral radius of a {}x{} matrix", a.nrows(), a.ncols())));
    }
    let schur = a
        .clone()
        .try_schur(1e-14, 10_000)
        .ok_or_else(|| Error::Internal("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|i| t[(i, i)].norm()).fold(0.0, f64::max))
}

/// Column-major stacking: entry `(i, j)` of an `L×M` matrix lands at `j·L + i`.
pub fn vec(c: &CMat) -> CMat {
    let mut out = CMat::zeros(c.nrows() * c.ncols(), 1);
    for j in 0..c.ncols() {
        for i in 0..c.nrows() {
            out[(j * c.nrows() + i, 0)] = c[(i, j)];
        }
    }
    out
}

/// Inverse of [`vec`].
pub fn unvec(v: &CMat, rows: usize, cols: usize) -> Result<CMat> {
    if v.ncols() != 1 || v.nrows() != rows * cols {
        return Err(Error::Dimension(format!(
            "cannot reshape a {}x{} vector into {rows}x{cols}",
            v.nrows(),
            v.ncols()
        )));
    }
    Ok(CMat::from_fn(rows, cols, |i, j| v[(j * rows + i, 0)]))
}

/// `[[Re H, −Im H], [Im H, Re H]]`. PSD-ness is preserved in both directions
/// and every eigenvalue of `H` appears twice.
pub fn complex_to_real_embed(h: &CMat) -> RMat {
    let n = h.nrows();
    let mut out = RMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            out[(i, j)] = z.re;
            out[(i + n, j + n)] = z.re;
            out[(i, j + n)] = -z.im;
            out[(i + n, j)] = z.im;
        }
    }
    out
}

/// Inverse of [`complex_to_real_embed`]: averages the two diagonal blocks
/// for the real part and antisymmetrizes the off-diagonal blocks for the
/// imaginary part. Exact on embeddings, a projection on anything else.
pub fn real_to_complex(x: &RMat) -> Result<CMat> {
    if !x.is_square() || !x.nrows().is_multiple_of(2) {
        return Err(Error::Dimension(format!(
            "real embedding must be square of even size, got {}x{}",
            x.nrows(),
            x.ncols()
        )));
    }
    let n = x.nrows() / 2;
    Ok(CMat::from_fn(n, n, |i, j| {
        let re = 0.5 * (x[(i, j)] + x[(i + n, j + n)]);
        let im = 0.5 * (x[(i + n, j)] - x[(i, j + n)]);
        cplx(re, im)
    }))
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;
    use rand_distr::StandardNormal;

    pub fn rng(seed: u64) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(seed)
    }

    pub fn random_cmat(rng: &mut impl Rng, rows: usize, cols: usize) -> CMat {
        CMat::from_fn(rows, cols, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            cplx(re, im) * std::f64::consts::FRAC_1_SQRT_2
        })
    }

    pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> CMat {
        hermitianize(&random_cmat(rng, n, n))
    }

    /// `A A^H + shift·I`.
    pub fn random_pd(rng: &mut impl Rng, n: usize, shift: f64) -> CMat {
        let a = random_cmat(rng, n, n);
        hermitianize(&(&a * a.adjoint() + identity(n).scale(shift)))
    }
}
