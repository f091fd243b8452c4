//! Dense complex helpers on top of `nalgebra`.

use nalgebra::{Complex, ComplexField, DMatrix};

use crate::error::{Error, Result};
use crate::scalar::{lit, CMatrix, Cx, Real};

/// Relative singularity threshold: `|det| < SINGULAR_REL * max_norm^n`.
pub const SINGULAR_REL: f64 = 1e-12;

pub fn max_norm<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(z.modulus()))
}

pub fn trace<T: Real>(m: &CMatrix<T>) -> Cx<T> {
    m.diagonal().iter().fold(Complex::new(T::zero(), T::zero()), |a, &z| a + z)
}

/// Determinant by LU with partial pivoting, together with the singularity
/// verdict of the relative threshold.
pub fn determinant<T: Real>(m: &CMatrix<T>) -> Result<(Cx<T>, bool)> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "determinant of a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok((Complex::new(T::one(), T::zero()), false));
    }
    let det = m.clone().lu().determinant();
    let scale = max_norm(m);
    let threshold = lit::<T>(SINGULAR_REL) * scale.powi(n as i32);
    let singular = scale == T::zero() || det.modulus() < threshold;
    Ok((det, singular))
}

pub fn inverse<T: Real>(m: &CMatrix<T>, what: &str) -> Result<CMatrix<T>> {
    let (_, singular) = determinant(m)?;
    if singular {
        return Err(Error::Singular(what.to_string()));
    }
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular(what.to_string()))
}

/// Eigenvalues from the complex Schur form.
pub fn eigenvalues<T: Real>(m: &CMatrix<T>) -> Result<Vec<Cx<T>>> {
    if !m.is_square() {
        return Err(Error::Dimension("eigenvalues of a non-square matrix".into()));
    }
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let (_, t) = m.clone().schur().unpack();
    Ok(t.diagonal().iter().copied().collect())
}

pub fn matrix_power<T: Real>(m: &CMatrix<T>, n: u32) -> CMatrix<T> {
    let mut result = CMatrix::<T>::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    result
}

pub fn expm<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    m.clone().exp()
}

pub fn block_diag<T: Real>(blocks: &[CMatrix<T>]) -> CMatrix<T> {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let c: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMatrix::<T>::zeros(n, c);
    let (mut r0, mut c0) = (0, 0);
    for b in blocks {
        out.view_mut((r0, c0), (b.nrows(), b.ncols())).copy_from(b);
        r0 += b.nrows();
        c0 += b.ncols();
    }
    out
}

/// Relative difference `|a - b| / max(|a|, |b|, tiny)`.
pub fn rel_diff<T: Real>(a: Cx<T>, b: Cx<T>) -> T {
    let scale = a.modulus().max(b.modulus());
    if scale == T::zero() {
        T::zero()
    } else {
        (a - b).modulus() / scale
    }
}

pub fn real_matrix_to_complex<T: Real>(m: &DMatrix<T>) -> CMatrix<T> {
    m.map(|x| Complex::new(x, T::zero()))
}

/// Frobenius norm.
pub fn fro_norm<T: Real>(m: &CMatrix<T>) -> T {
    m.iter()
        .fold(T::zero(), |acc, z| acc + z.modulus_squared())
        .sqrt()
}
