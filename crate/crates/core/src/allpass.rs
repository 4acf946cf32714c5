//! The S-MAP filter class `Ψ(z) = S^+(λ) exp{Ω(z)} S^+(λ)^{-1}`.
//!
//! `Ω(z) = Ω_0 + Σ_{k=1}^r (Ω_k z^k - Ω_k' z^{-k})` with `Ω_0` skew-symmetric is
//! skew-Hermitian on the unit circle, so its exponential is unitary and the
//! conjugated filter preserves the spectrum the roots were taken from.
//!
//! Parameter layout (length `r n² + n(n-1)/2`): the strict lower triangle of
//! `Ω_0` in column-major order, then the entries of `Ω_1..Ω_r`, each row-major.

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::factorize::RootGrid;
use crate::linalg::{hermitian_part, CMat, RMat};
use crate::scalar::{cis, from_usize, lit, Real};
use crate::series::MapFilter;
use crate::spectral::{FreqGrid, SpectralGrid, SpectrumKind};

/// Imaginary residue above which inverted coefficients are rejected.
pub const IMAG_RESIDUE_TOL: f64 = 1e-6;

/// Free cepstral parameter vector for a given dimension `n` and order `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct CepstralParams<T: Real = f64> {
    n: usize,
    r: usize,
    theta: Vec<T>,
}

impl<T: Real> CepstralParams<T> {
    /// Number of free parameters `r n² + n(n-1)/2`.
    pub fn count(n: usize, r: usize) -> usize {
        r * n * n + n * (n.saturating_sub(1)) / 2
    }

    pub fn new(n: usize, r: usize, theta: Vec<T>) -> Result<Self> {
        let expected = Self::count(n, r);
        if n == 0 || theta.len() != expected {
            return Err(Error::Shape(format!(
                "cepstral parameters for n = {n}, r = {r} need length {expected}, got {}",
                theta.len()
            )));
        }
        Ok(CepstralParams { n, r, theta })
    }

    pub fn zeros(n: usize, r: usize) -> Self {
        CepstralParams {
            n,
            r,
            theta: vec![T::zero(); Self::count(n, r)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn as_slice(&self) -> &[T] {
        &self.theta
    }

    pub fn into_vec(self) -> Vec<T> {
        self.theta
    }

    pub fn is_zero(&self) -> bool {
        self.theta.iter().all(|v| *v == T::zero())
    }

    /// `(Ω_0, [Ω_1..Ω_r])`.
    pub fn unpack(&self) -> (RMat<T>, Vec<RMat<T>>) {
        let n = self.n;
        let mut it = self.theta.iter().copied();
        let mut omega0 = RMat::zeros(n, n);
        for c in 0..n {
            for i in c + 1..n {
                let v = it.next().expect("length checked");
                omega0[(i, c)] = v;
                omega0[(c, i)] = -v;
            }
        }
        let rest = (0..self.r)
            .map(|_| {
                let mut m = RMat::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        m[(i, j)] = it.next().expect("length checked");
                    }
                }
                m
            })
            .collect();
        (omega0, rest)
    }

    /// Inverse of [`unpack`](Self::unpack); `omega0` must be skew-symmetric.
    pub fn pack(omega0: &RMat<T>, rest: &[RMat<T>]) -> Result<Self> {
        let n = omega0.nrows();
        if !omega0.is_square() || rest.iter().any(|m| m.nrows() != n || m.ncols() != n) {
            return Err(Error::Shape(
                "cepstral matrices must be equal-size square matrices".into(),
            ));
        }
        if (omega0 + omega0.transpose()).abs().max() > lit::<T>(1e-12) * (T::one() + omega0.abs().max()) {
            return Err(Error::InvalidArgument("Ω_0 must be skew-symmetric".into()));
        }
        let mut theta = Vec::with_capacity(Self::count(n, rest.len()));
        for c in 0..n {
            for i in c + 1..n {
                theta.push(omega0[(i, c)]);
            }
        }
        for m in rest {
            for i in 0..n {
                for j in 0..n {
                    theta.push(m[(i, j)]);
                }
            }
        }
        Self::new(n, rest.len(), theta)
    }

    /// Precomputed complex cepstral matrices for repeated evaluation.
    pub fn laurent(&self) -> Laurent<T> {
        let (omega0, rest) = self.unpack();
        Laurent {
            omega0: omega0.map(|v| Complex::new(v, T::zero())),
            terms: rest.iter().map(|m| m.map(|v| Complex::new(v, T::zero()))).collect(),
        }
    }
}

/// Truncated cepstral series `Ω(z)`.
#[derive(Debug, Clone)]
pub struct Laurent<T: Real> {
    omega0: CMat<T>,
    terms: Vec<CMat<T>>,
}

impl<T: Real> Laurent<T> {
    /// `Ω(z)` at `z = e^{-iλ}`; skew-Hermitian.
    pub fn omega_at(&self, lambda: T) -> CMat<T> {
        let mut acc = self.omega0.clone();
        for (k, m) in self.terms.iter().enumerate() {
            let zk = cis(-lambda * from_usize::<T>(k + 1));
            acc += m * zk - m.transpose() * zk.conj();
        }
        acc
    }

    /// `U(λ) = exp{Ω(e^{-iλ})}`.
    pub fn unitary_at(&self, lambda: T) -> CMat<T> {
        expm_skew_hermitian(&self.omega_at(lambda))
    }
}

/// Exponential of a skew-Hermitian matrix `Ω = iH` via the eigendecomposition of `H`.
pub fn expm_skew_hermitian<T: Real>(omega: &CMat<T>) -> CMat<T> {
    let n = omega.nrows();
    if n == 1 {
        return CMat::from_element(1, 1, cis(omega[(0, 0)].im));
    }
    let minus_i = Complex::new(T::zero(), -T::one());
    let h = hermitian_part(&omega.map(|z| z * minus_i));
    let eig = h.symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = eig.eigenvalues.map(cis);
    let mut scaled = v.clone();
    for (j, p) in phases.iter().enumerate() {
        for i in 0..n {
            scaled[(i, j)] *= *p;
        }
    }
    scaled * v.adjoint()
}

/// `U(λ; θ)`.
pub fn unitary_at<T: Real>(theta: &CepstralParams<T>, lambda: T) -> CMat<T> {
    theta.laurent().unitary_at(lambda)
}

/// `Ψ(λ_j) = S^+_j U(λ_j; θ) (S^+_j)^{-1}` on the root grid.
pub fn map_frf<T: Real>(theta: &CepstralParams<T>, roots: &RootGrid<T>) -> Result<SpectralGrid<T>> {
    if theta.n() != roots.dim() {
        return Err(Error::Shape(format!(
            "cepstral dimension {} does not match root dimension {}",
            theta.n(),
            roots.dim()
        )));
    }
    let laurent = theta.laurent();
    let grid = roots.grid();
    let mats = (0..grid.size())
        .map(|j| roots.root(j) * laurent.unitary_at(grid.lambda(j)) * roots.inverse(j))
        .collect();
    SpectralGrid::new(grid.clone(), mats, SpectrumKind::Frf)
}

/// `max_j ‖Ψ_j S_j Ψ_j^* - S_j‖_F / ‖S_j‖_F`.
pub fn verify_smap<T: Real>(frf: &SpectralGrid<T>, s: &SpectralGrid<T>) -> Result<T> {
    if frf.grid() != s.grid() || frf.dim() != s.dim() {
        return Err(Error::Shape("verify_smap on mismatched grids".into()));
    }
    Ok(frf.mats().iter().zip(s.mats()).fold(T::zero(), |acc, (psi, sj)| {
        acc.max((psi * sj * psi.adjoint() - sj).norm() / sj.norm())
    }))
}

/// Fourier inversion `Ψ_k = (1/N) Σ_j e^{iλ_j k} Ψ(λ_j)`, truncated to the
/// smallest half-width whose dropped coefficients all have norm below `tail_tol`.
pub fn frf_to_coeffs<T: Real>(frf: &SpectralGrid<T>, tail_tol: T) -> Result<MapFilter<T>> {
    let size = frf.len();
    let n = frf.dim();
    let half = size / 2;
    let inv_n = T::one() / from_usize::<T>(size);
    // e^{iλ_j k} = (-1)^k e^{2πi jk/N}
    let twiddles: Vec<Complex<T>> = (0..size)
        .map(|m| cis(T::two_pi() * from_usize::<T>(m) / from_usize::<T>(size)))
        .collect();
    let mut residue = T::zero();
    let mut coeff = |k: isize| -> RMat<T> {
        let km = k.rem_euclid(size as isize) as usize;
        let mut acc = CMat::zeros(n, n);
        for (j, m) in frf.mats().iter().enumerate() {
            acc += m * twiddles[(j * km) % size];
        }
        if k.rem_euclid(2) == 1 {
            acc.neg_mut();
        }
        acc.iter().for_each(|z| residue = residue.max((z.im * inv_n).abs()));
        acc.map(|z| z.re * inv_n)
    };
    // k = -N/2+1 .. N/2
    let all: Vec<(isize, RMat<T>)> = (-(half as isize) + 1..=half as isize).map(|k| (k, coeff(k))).collect();
    if residue > lit(IMAG_RESIDUE_TOL) {
        return Err(Error::SymmetryViolation {
            residue: residue.as_f64(),
        });
    }
    let norm_at = |k: isize| all[(k + half as isize - 1) as usize].1.norm();
    let cap = half - 1;
    let mut m = cap;
    while m > 0 {
        let k = m as isize;
        if norm_at(k) >= tail_tol || norm_at(-k) >= tail_tol {
            break;
        }
        m -= 1;
    }
    let tail_norm = all
        .iter()
        .filter(|(k, _)| k.unsigned_abs() > m)
        .fold(T::zero(), |acc, (_, c)| acc.max(c.norm()));
    if tail_norm >= tail_tol {
        log::warn!("filter truncated at the grid half-size {m} with tail norm {tail_norm}");
    }
    let coeffs = all
        .into_iter()
        .filter(|(k, _)| k.unsigned_abs() <= m)
        .map(|(_, c)| c)
        .collect();
    MapFilter::new(coeffs, tail_norm)
}

/// Forward transform `Ψ(λ_j) = Σ_k Ψ_k e^{-iλ_j k}` of a coefficient set.
pub fn coeffs_to_frf<T: Real>(f: &MapFilter<T>, grid: &FreqGrid<T>) -> Result<SpectralGrid<T>> {
    let m = f.halfwidth() as isize;
    let mats = (0..grid.size())
        .map(|j| {
            let mut acc = CMat::zeros(f.dim(), f.dim());
            for k in -m..=m {
                let e = cis(-grid.lambda(j) * lit::<T>(k as f64));
                acc += f.coeff(k).map(|v| Complex::new(v, T::zero())) * e;
            }
            acc
        })
        .collect();
    SpectralGrid::new(grid.clone(), mats, SpectrumKind::Frf)
}
