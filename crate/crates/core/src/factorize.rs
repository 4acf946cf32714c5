//! Bauer spectral factorization: the block LDL' (modified Cholesky) factor of a
//! large block-Toeplitz covariance matrix converges, row by row, to the
//! moving-average factor `S(z) = Θ(z) Σ Θ(z)^*`.
//!
//! For autocovariances vanishing beyond lag `q` the Toeplitz matrix is block
//! banded and so is its unit lower factor, so only the last `q` block rows are
//! kept while sweeping down to row `m`.

use std::collections::VecDeque;

use nalgebra::{Cholesky, Complex, Dyn};

use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue_hermitian, sym_sqrt, symmetric_part, to_complex, CMat, RMat};
use crate::scalar::{from_usize, lit, Real};
use crate::series::AcvfSeq;
use crate::spectral::{FreqGrid, SpectralGrid, SpectrumKind};

/// Relative reconstruction error above which a factorization is reported as unconverged.
pub const RECONSTRUCTION_TOL: f64 = 1e-6;

/// Spectral roots above this condition number are rejected.
pub const MAX_ROOT_CONDITION: f64 = 1e10;

/// Moving-average factor `Θ_0 = I, Θ_1..Θ_q` with innovation covariance `Σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct VmaFactor<T: Real = f64> {
    theta: Vec<RMat<T>>,
    sigma: RMat<T>,
    m: usize,
    recon_error: T,
    recon_rel_error: T,
}

impl<T: Real> VmaFactor<T> {
    /// Builds a factor from known coefficients (`theta[0]` must be the identity).
    pub fn new(theta: Vec<RMat<T>>, sigma: RMat<T>) -> Result<Self> {
        let n = sigma.nrows();
        if theta.is_empty() || theta[0] != RMat::identity(n, n) {
            return Err(Error::InvalidArgument("Θ_0 must be the identity".into()));
        }
        if theta.iter().any(|t| t.nrows() != n || t.ncols() != n) {
            return Err(Error::Shape("moving-average coefficients must match Σ".into()));
        }
        sym_sqrt(&sigma)?;
        Ok(VmaFactor {
            theta,
            sigma,
            m: 0,
            recon_error: T::zero(),
            recon_rel_error: T::zero(),
        })
    }

    pub fn theta(&self) -> &[RMat<T>] {
        &self.theta
    }

    pub fn sigma(&self) -> &RMat<T> {
        &self.sigma
    }

    pub fn q(&self) -> usize {
        self.theta.len() - 1
    }

    /// Toeplitz block dimension used (0 when built directly).
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.sigma.nrows()
    }

    /// `sup_j ‖Θ(z_j) Σ Θ(z_j)^* - S(λ_j)‖_F`.
    pub fn recon_error(&self) -> T {
        self.recon_error
    }

    /// Reconstruction error relative to `‖S(λ_j)‖_F`, maximized over the grid.
    pub fn recon_rel_error(&self) -> T {
        self.recon_rel_error
    }

    pub fn converged(&self) -> bool {
        self.recon_rel_error <= lit(RECONSTRUCTION_TOL)
    }

    /// `Θ(z) = Σ_k Θ_k z^k`.
    pub fn polynomial_at(&self, z: Complex<T>) -> CMat<T> {
        let mut acc = CMat::zeros(self.dim(), self.dim());
        let mut power = Complex::new(T::one(), T::zero());
        for t in &self.theta {
            acc += to_complex(t) * power;
            power *= z;
        }
        acc
    }

    /// Winding number of `det Θ(r e^{iω})` around the origin, i.e. the number of
    /// zeros of `det Θ` inside the disk of radius `r`.
    pub fn winding_number(&self, radius: T, samples: usize) -> i64 {
        let samples = samples.max(16);
        let mut total = T::zero();
        let phase = |k: usize| {
            let w = T::two_pi() * from_usize::<T>(k) / from_usize::<T>(samples);
            let d = self
                .polynomial_at(Complex::new(radius * w.cos(), radius * w.sin()))
                .determinant();
            d.im.atan2(d.re)
        };
        let mut prev = phase(0);
        for k in 1..=samples {
            let cur = phase(k % samples);
            let mut step = cur - prev;
            while step > T::pi() {
                step -= T::two_pi();
            }
            while step < -T::pi() {
                step += T::two_pi();
            }
            total += step;
            prev = cur;
        }
        (total / T::two_pi()).round().as_f64() as i64
    }
}

/// `Σ_{|h|<=q} Γ(h) e^{-iλh}` at one frequency.
fn truncated_spectrum<T: Real>(acvf: &AcvfSeq<T>, z: Complex<T>) -> CMat<T> {
    let mut s = to_complex(acvf.gamma(0));
    let mut power = Complex::new(T::one(), T::zero());
    for h in 1..=acvf.maxlag() {
        power *= z;
        let g = to_complex(acvf.gamma(h));
        s += &g * power + g.transpose() * power.conj();
    }
    s
}

struct Row<T: Real> {
    start: usize,
    /// `L_{i,k}` for `k = start..i`.
    l: Vec<RMat<T>>,
    d: RMat<T>,
    chol: Cholesky<T, Dyn>,
}

/// Factorizes the spectrum of the autocovariances `Γ(0..q)` (taken as zero beyond
/// `q = acvf.maxlag()`) using an `m`-block Toeplitz matrix; the reconstruction
/// error is measured on `grid`.
pub fn bauer_factorize<T: Real>(acvf: &AcvfSeq<T>, m: usize, grid: &FreqGrid<T>) -> Result<VmaFactor<T>> {
    let q = acvf.maxlag();
    let n = acvf.dim();
    if m == 0 || m < 5 * q {
        return Err(Error::InvalidArgument(format!(
            "Toeplitz size {m} must be at least 5q = {}",
            5 * q
        )));
    }
    let target: Vec<CMat<T>> = (0..grid.size()).map(|j| truncated_spectrum(acvf, grid.z(j))).collect();
    for (j, s) in target.iter().enumerate() {
        let min = min_eigenvalue_hermitian(s);
        if !(min > T::zero()) {
            return Err(Error::Conditioning {
                index: j,
                detail: format!(
                    "truncated spectrum of order {q} is not positive definite (min eigenvalue {min}); \
                     floor the spectrum with pd_truncate or raise the lag budget"
                ),
            });
        }
    }

    let mut rows: VecDeque<Row<T>> = VecDeque::with_capacity(q + 1);
    for i in 0..m {
        let start = i.saturating_sub(q);
        let mut l = Vec::with_capacity(i - start);
        let mut ld: Vec<RMat<T>> = Vec::with_capacity(i - start);
        for j in start..i {
            let row_j = &rows[rows.len() - (i - j)];
            let mut acc = acvf.gamma(i - j).clone();
            for k in start..j {
                acc -= &ld[k - start] * row_j.l[k - row_j.start].transpose();
            }
            // L_{i,j} D_j = acc, D_j symmetric
            let lij = row_j.chol.solve(&acc.transpose()).transpose();
            l.push(lij);
            ld.push(acc);
        }
        let mut d = acvf.gamma(0).clone();
        for (lk, ldk) in l.iter().zip(&ld) {
            d -= ldk * lk.transpose();
        }
        let d = symmetric_part(&d);
        let chol = d.clone().cholesky().ok_or(Error::NotPositiveDefinite { block: i })?;
        if rows.len() == q.max(1) {
            rows.pop_front();
        }
        rows.push_back(Row { start, l, d, chol });
    }

    let last = rows.back().expect("m >= 1");
    let mut theta = vec![RMat::identity(n, n)];
    // L_{m-1, m-1-k} for k = 1..q
    for k in 1..=q {
        theta.push(
            (m - 1)
                .checked_sub(k)
                .filter(|&col| col >= last.start)
                .map_or_else(|| RMat::zeros(n, n), |col| last.l[col - last.start].clone()),
        );
    }
    let sigma = last.d.clone();
    let mut factor = VmaFactor {
        theta,
        sigma,
        m,
        recon_error: T::zero(),
        recon_rel_error: T::zero(),
    };

    let sig = to_complex(&factor.sigma);
    for (j, s) in target.iter().enumerate() {
        let th = factor.polynomial_at(grid.z(j));
        let err = (&th * &sig * th.adjoint() - s).norm();
        factor.recon_error = factor.recon_error.max(err);
        factor.recon_rel_error = factor.recon_rel_error.max(err / s.norm());
    }
    if !factor.converged() {
        log::warn!(
            "Bauer factorization with m = {m} has relative reconstruction error {}; increase m",
            factor.recon_rel_error
        );
    }
    Ok(factor)
}

/// Per-frequency spectral roots `S^+(λ_j) = Θ(e^{-iλ_j}) Σ^{1/2}` and their inverses.
#[derive(Debug, Clone)]
pub struct RootGrid<T: Real = f64> {
    roots: SpectralGrid<T>,
    inverses: Vec<CMat<T>>,
    max_condition: T,
}

impl<T: Real> RootGrid<T> {
    /// Inverts the supplied roots, rejecting near-singular ones. The condition
    /// of root `j` is the largest singular value over the whole grid divided by
    /// the smallest singular value at `j`, so a scalar root that dips to zero
    /// counts as singular.
    pub fn from_roots(roots: SpectralGrid<T>) -> Result<Self> {
        let svs: Vec<_> = roots
            .mats()
            .iter()
            .map(|r| r.clone().svd(false, false).singular_values)
            .collect();
        let scale = svs.iter().fold(T::zero(), |acc, sv| acc.max(sv.max()));
        let mut inverses = Vec::with_capacity(roots.len());
        let mut max_condition = T::one();
        for (j, (r, sv)) in roots.mats().iter().zip(&svs).enumerate() {
            let min = sv.min();
            let cond = if min > T::zero() {
                scale / min
            } else {
                T::max_value().unwrap_or(scale / T::default_epsilon())
            };
            if !(cond <= lit(MAX_ROOT_CONDITION)) {
                return Err(Error::NonInvertibleRoot {
                    index: j,
                    cond: cond.as_f64(),
                });
            }
            max_condition = max_condition.max(cond);
            let inv = r.clone().try_inverse().ok_or(Error::NonInvertibleRoot {
                index: j,
                cond: cond.as_f64(),
            })?;
            inverses.push(inv);
        }
        log::debug!("spectral roots: max condition number {max_condition}");
        let roots = SpectralGrid::new(roots.grid().clone(), roots.mats().to_vec(), SpectrumKind::Root)?;
        Ok(RootGrid {
            roots,
            inverses,
            max_condition,
        })
    }

    pub fn identity(grid: &FreqGrid<T>, n: usize) -> Self {
        let eye = CMat::identity(n, n);
        RootGrid {
            roots: SpectralGrid::new(grid.clone(), vec![eye.clone(); grid.size()], SpectrumKind::Root)
                .expect("consistent shapes"),
            inverses: vec![eye; grid.size()],
            max_condition: T::one(),
        }
    }

    pub fn roots(&self) -> &SpectralGrid<T> {
        &self.roots
    }

    pub fn root(&self, j: usize) -> &CMat<T> {
        self.roots.at(j)
    }

    pub fn inverse(&self, j: usize) -> &CMat<T> {
        &self.inverses[j]
    }

    pub fn grid(&self) -> &FreqGrid<T> {
        self.roots.grid()
    }

    pub fn dim(&self) -> usize {
        self.roots.dim()
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn max_condition(&self) -> T {
        self.max_condition
    }

    /// `S^+ S^{+*}` at every frequency.
    pub fn spectrum(&self) -> SpectralGrid<T> {
        self.roots
            .map(SpectrumKind::Marginal, |_, r| r * r.adjoint())
            .expect("consistent shapes")
    }
}

/// Evaluates the spectral root of `f` on `grid`, using the symmetric square root of `Σ`.
pub fn spectral_root_grid<T: Real>(f: &VmaFactor<T>, grid: &FreqGrid<T>) -> Result<RootGrid<T>> {
    let half = to_complex(&sym_sqrt(f.sigma())?);
    let mats = (0..grid.size()).map(|j| f.polynomial_at(grid.z(j)) * &half).collect();
    RootGrid::from_roots(SpectralGrid::new(grid.clone(), mats, SpectrumKind::Root)?)
}
