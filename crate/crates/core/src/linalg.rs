//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

pub type RMat<T> = DMatrix<T>;
pub type CMat<T> = DMatrix<Complex<T>>;

pub fn to_complex<T: Real>(m: &RMat<T>) -> CMat<T> {
    m.map(|x| Complex::new(x, T::zero()))
}

pub fn real_part<T: Real>(m: &CMat<T>) -> RMat<T> {
    m.map(|z| z.re)
}

pub fn max_abs_imag<T: Real>(m: &CMat<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(z.im.abs()))
}

/// `(A + A^*) / 2`.
pub fn hermitian_part<T: Real>(m: &CMat<T>) -> CMat<T> {
    let half = lit::<T>(0.5);
    (m + m.adjoint()).map(|z| z * half)
}

pub fn symmetric_part<T: Real>(m: &RMat<T>) -> RMat<T> {
    (m + m.transpose()) * lit::<T>(0.5)
}

pub fn min_eigenvalue_hermitian<T: Real>(m: &CMat<T>) -> T {
    hermitian_part(m).symmetric_eigen().eigenvalues.min()
}

/// Reassembles a Hermitian matrix with its eigenvalues clamped to `[floor, inf)`.
pub fn clamp_eigenvalues<T: Real>(m: &CMat<T>, floor: T) -> CMat<T> {
    let eig = hermitian_part(m).symmetric_eigen();
    if eig.eigenvalues.iter().all(|&v| v >= floor) {
        return m.clone();
    }
    let d = eig.eigenvalues.map(|v| Complex::new(v.max(floor), T::zero()));
    let v = &eig.eigenvectors;
    hermitian_part(&(v * CMat::from_diagonal(&d) * v.adjoint()))
}

/// Symmetric positive definite square root of a real symmetric matrix.
pub fn sym_sqrt<T: Real>(m: &RMat<T>) -> Result<RMat<T>> {
    let eig = symmetric_part(m).symmetric_eigen();
    if let Some(bad) = eig.eigenvalues.iter().find(|&&v| v <= T::zero()) {
        return Err(Error::Numerical(format!(
            "matrix square root requires a positive definite argument (eigenvalue {})",
            bad
        )));
    }
    let d = eig.eigenvalues.map(|v| v.sqrt());
    let v = &eig.eigenvectors;
    Ok(symmetric_part(&(v * RMat::from_diagonal(&d) * v.transpose())))
}

/// Determinant of a matrix that should be Hermitian up to roundoff.
///
/// The imaginary residue of the determinant must not exceed `1e-8 * |det|`
/// (with a roundoff floor for nearly singular arguments).
pub fn hermitian_det<T: Real>(m: &CMat<T>) -> Result<T> {
    let h = hermitian_part(m);
    let det = h.determinant();
    // roundoff floor relative to the determinant's natural scale
    let scale = h.norm().powi(h.nrows() as i32) * T::default_epsilon() * lit::<T>(1e4);
    if det.im.abs() > lit::<T>(1e-8) * det.re.abs().max(scale) {
        return Err(Error::Numerical(format!(
            "determinant of a Hermitian matrix has imaginary residue {} (real part {})",
            det.im, det.re
        )));
    }
    Ok(det.re)
}

/// Ratio of largest to smallest singular value.
pub fn condition_number<T: Real>(m: &CMat<T>) -> T {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.max();
    let min = sv.min();
    if min <= T::zero() {
        T::max_value().unwrap_or(max / T::default_epsilon())
    } else {
        max / min
    }
}

/// Spectral radius of a real square matrix.
pub fn spectral_radius<T: Real>(m: &RMat<T>) -> T {
    m.complex_eigenvalues()
        .iter()
        .fold(T::zero(), |acc, z| acc.max((z.re * z.re + z.im * z.im).sqrt()))
}

pub fn is_symmetric<T: Real>(m: &RMat<T>, tol: T) -> bool {
    m.is_square() && (m - m.transpose()).abs().max() <= tol * (T::one() + m.abs().max())
}

/// Parses nested rows into a matrix, checking rectangularity.
pub fn from_rows<T: Real>(rows: &[Vec<f64>]) -> Result<RMat<T>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Shape("ragged matrix rows".into()));
    }
    Ok(RMat::from_fn(nrows, ncols, |i, j| lit(rows[i][j])))
}

pub fn to_rows<T: Real>(m: &RMat<T>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].as_f64()).collect())
        .collect()
}
