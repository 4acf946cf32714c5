//! Frequency grids, positive-definite lag-window spectral estimation and
//! frequency-domain conditioning.

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{clamp_eigenvalues, hermitian_part, min_eigenvalue_hermitian, to_complex, CMat};
use crate::scalar::{cis, from_usize, lit, Real};
use crate::series::AcvfSeq;

/// Symmetric grid `λ_j = -π + 2πj/N`, `j = 0..N-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqGrid<T: Real = f64> {
    lambdas: Vec<T>,
}

impl<T: Real> FreqGrid<T> {
    pub fn new(size: usize) -> Result<Self> {
        if size < 8 || !size.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "frequency grid size must be even and at least 8, got {size}"
            )));
        }
        let n = from_usize::<T>(size);
        let lambdas = (0..size)
            .map(|j| -T::pi() + T::two_pi() * from_usize::<T>(j) / n)
            .collect();
        Ok(FreqGrid { lambdas })
    }

    pub fn size(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[T] {
        &self.lambdas
    }

    pub fn lambda(&self, j: usize) -> T {
        self.lambdas[j]
    }

    /// Index of `-λ_j` (with `-π` identified with `π`).
    pub fn mirror(&self, j: usize) -> usize {
        (self.size() - j) % self.size()
    }

    /// `z = e^{-iλ_j}`.
    pub fn z(&self, j: usize) -> Complex<T> {
        cis(-self.lambdas[j])
    }
}

/// What a [`SpectralGrid`] carries; decides which symmetries must hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumKind {
    Joint,
    Marginal,
    Conditional,
    Root,
    Frf,
}

impl SpectrumKind {
    pub fn is_hermitian(self) -> bool {
        matches!(
            self,
            SpectrumKind::Joint | SpectrumKind::Marginal | SpectrumKind::Conditional
        )
    }
}

/// Complex `n x n` matrices sampled on a [`FreqGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralGrid<T: Real = f64> {
    grid: FreqGrid<T>,
    mats: Vec<CMat<T>>,
    kind: SpectrumKind,
}

impl<T: Real> SpectralGrid<T> {
    pub fn new(grid: FreqGrid<T>, mats: Vec<CMat<T>>, kind: SpectrumKind) -> Result<Self> {
        if mats.len() != grid.size() {
            return Err(Error::Shape(format!(
                "{} matrices for a grid of size {}",
                mats.len(),
                grid.size()
            )));
        }
        let n = mats[0].nrows();
        if n == 0 || mats.iter().any(|m| m.nrows() != n || m.ncols() != n) {
            return Err(Error::Shape(
                "spectral matrices must be equal-size square matrices".into(),
            ));
        }
        Ok(SpectralGrid { grid, mats, kind })
    }

    pub fn grid(&self) -> &FreqGrid<T> {
        &self.grid
    }

    pub fn mats(&self) -> &[CMat<T>] {
        &self.mats
    }

    pub fn at(&self, j: usize) -> &CMat<T> {
        &self.mats[j]
    }

    pub fn kind(&self) -> SpectrumKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.mats[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    /// `max_j ‖S(-λ_j) - conj(S(λ_j))‖_F`.
    pub fn conjugate_symmetry_error(&self) -> T {
        (0..self.len()).fold(T::zero(), |acc, j| {
            let mirror = &self.mats[self.grid.mirror(j)];
            acc.max((mirror - self.mats[j].map(|z| z.conj())).norm())
        })
    }

    /// `max_j ‖S_j - S_j^*‖_F`.
    pub fn hermitian_error(&self) -> T {
        self.mats
            .iter()
            .fold(T::zero(), |acc, m| acc.max((m - m.adjoint()).norm()))
    }

    /// Smallest eigenvalue over the grid (Hermitian kinds).
    pub fn min_eigenvalue(&self) -> T {
        self.mats
            .iter()
            .map(min_eigenvalue_hermitian)
            .fold(T::max_value().unwrap_or(T::one() / T::default_epsilon()), |a, b| {
                a.min(b)
            })
    }

    /// Sub-spectrum on the listed channels.
    pub fn select(&self, channels: &[usize], kind: SpectrumKind) -> Result<Self> {
        if let Some(&bad) = channels.iter().find(|&&c| c >= self.dim()) {
            return Err(Error::Shape(format!(
                "channel {bad} out of range for dimension {}",
                self.dim()
            )));
        }
        let mats = self
            .mats
            .iter()
            .map(|m| m.select_rows(channels).select_columns(channels))
            .collect();
        SpectralGrid::new(self.grid.clone(), mats, kind)
    }

    pub fn map<F>(&self, kind: SpectrumKind, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, &CMat<T>) -> CMat<T>,
    {
        let mats = self.mats.iter().enumerate().map(|(j, m)| f(j, m)).collect();
        SpectralGrid::new(self.grid.clone(), mats, kind)
    }
}

/// Flat-top lag window parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaperSpec<T: Real = f64> {
    /// Flat region half-width `ℓ` in lags; the weight reaches zero at `2ℓ`.
    pub bandwidth: usize,
    /// Eigenvalue floor `ε_T`.
    pub eps: T,
}

impl<T: Real> TaperSpec<T> {
    pub fn new(bandwidth: usize, eps: T) -> Result<Self> {
        if bandwidth == 0 {
            return Err(Error::InvalidArgument("taper bandwidth must be at least 1".into()));
        }
        if !(eps > T::zero()) {
            return Err(Error::InvalidArgument("eigenvalue floor must be positive".into()));
        }
        Ok(TaperSpec { bandwidth, eps })
    }

    /// `ℓ = ceil(T^{1/3})`, `ε_T = 1/T`.
    pub fn for_length(len: usize) -> Self {
        TaperSpec {
            bandwidth: default_bandwidth(len),
            eps: T::one() / from_usize::<T>(len.max(1)),
        }
    }
}

pub fn default_bandwidth(len: usize) -> usize {
    ((len as f64).cbrt().ceil() as usize).max(1)
}

/// Default autocovariance lag budget `ceil(2 T^{1/3})`; it covers the flat-top support.
pub fn default_maxlag(len: usize) -> usize {
    ((2.0 * (len as f64).cbrt()).ceil() as usize).max(1)
}

/// Trapezoidal flat-top weight: 1 on `|u| <= 1`, linear down to 0 at `|u| = 2`.
pub fn flat_top_weight<T: Real>(u: T) -> T {
    let a = u.abs();
    if a <= T::one() {
        T::one()
    } else {
        (lit::<T>(2.0) - a).max(T::zero())
    }
}

/// Lag-window estimate `Σ_{|h|<=L} w(h/ℓ) Γ(h) e^{-iλh}` on `grid`, Hermitian at every frequency.
pub fn flat_top_estimate<T: Real>(
    acvf: &AcvfSeq<T>,
    grid: &FreqGrid<T>,
    taper: &TaperSpec<T>,
) -> Result<SpectralGrid<T>> {
    if acvf.maxlag() < taper.bandwidth {
        return Err(Error::InvalidArgument(format!(
            "flat-top bandwidth {} exceeds the autocovariance lag budget {}",
            taper.bandwidth,
            acvf.maxlag()
        )));
    }
    let ell = from_usize::<T>(taper.bandwidth);
    let weighted: Vec<(usize, CMat<T>)> = (1..=acvf.maxlag())
        .filter_map(|h| {
            let w = flat_top_weight(from_usize::<T>(h) / ell);
            (w > T::zero()).then(|| (h, to_complex(&(acvf.gamma(h) * w))))
        })
        .collect();
    let g0 = to_complex(acvf.gamma(0));
    let mats = (0..grid.size())
        .map(|j| {
            let lambda = grid.lambda(j);
            let mut s = g0.clone();
            for (h, g) in &weighted {
                let e = cis(-lambda * from_usize::<T>(*h));
                s += g * e + g.transpose() * e.conj();
            }
            hermitian_part(&s)
        })
        .collect();
    SpectralGrid::new(grid.clone(), mats, SpectrumKind::Joint)
}

/// Clamps every eigenvalue to `[eps, ∞)` frequency by frequency.
pub fn pd_truncate<T: Real>(s: &SpectralGrid<T>, eps: T) -> SpectralGrid<T> {
    let mats = s.mats().iter().map(|m| clamp_eigenvalues(m, eps)).collect();
    SpectralGrid {
        grid: s.grid.clone(),
        mats,
        kind: s.kind,
    }
}

/// Schur complement `S_X - S_XZ S_Z^{-1} S_ZX` of the leading `nx x nx` block.
pub fn conditional_spectrum<T: Real>(joint: &SpectralGrid<T>, nx: usize) -> Result<SpectralGrid<T>> {
    let n = joint.dim();
    if nx == 0 || nx > n {
        return Err(Error::InvalidArgument(format!(
            "sensitive block size {nx} out of range for dimension {n}"
        )));
    }
    let nz = n - nx;
    let mut mats = Vec::with_capacity(joint.len());
    for (j, m) in joint.mats().iter().enumerate() {
        let sx = m.view((0, 0), (nx, nx)).into_owned();
        let cond = if nz == 0 {
            sx
        } else {
            let sxz = m.view((0, nx), (nx, nz));
            let szx = m.view((nx, 0), (nz, nx)).into_owned();
            let sz = hermitian_part(&m.view((nx, nx), (nz, nz)).into_owned());
            let chol = sz.cholesky().ok_or_else(|| Error::Conditioning {
                index: j,
                detail: "auxiliary spectral block is singular".into(),
            })?;
            hermitian_part(&(sx - sxz * chol.solve(&szx)))
        };
        let min = min_eigenvalue_hermitian(&cond);
        if !(min > T::zero()) {
            return Err(Error::Conditioning {
                index: j,
                detail: format!("conditional spectrum is not positive definite (min eigenvalue {min})"),
            });
        }
        mats.push(cond);
    }
    SpectralGrid::new(joint.grid().clone(), mats, SpectrumKind::Conditional)
}

/// Grid mean `(1/N) Σ_j S_j F_j^*`, or the plain mean when `frf` is absent.
pub fn grid_average<T: Real>(s: &SpectralGrid<T>, frf: Option<&SpectralGrid<T>>) -> Result<CMat<T>> {
    let n = from_usize::<T>(s.len());
    let mut acc = CMat::zeros(s.dim(), s.dim());
    match frf {
        None => {
            for m in s.mats() {
                acc += m;
            }
        }
        Some(f) => {
            if f.len() != s.len() || f.grid() != s.grid() {
                return Err(Error::Shape("grid_average on mismatched frequency grids".into()));
            }
            if f.dim() != s.dim() {
                return Err(Error::Shape("grid_average on mismatched dimensions".into()));
            }
            for (m, g) in s.mats().iter().zip(f.mats()) {
                acc += m * g.adjoint();
            }
        }
    }
    Ok(acc.map(|z| z / Complex::new(n, T::zero())))
}

/// Autocovariances `Γ(h) = (1/N) Σ_j e^{iλ_j h} S(λ_j)` implied by a grid spectrum.
pub fn spectrum_to_acvf<T: Real>(s: &SpectralGrid<T>, maxlag: usize) -> Result<AcvfSeq<T>> {
    if maxlag > s.len() / 2 {
        return Err(Error::InvalidArgument(format!(
            "lag {maxlag} exceeds half the grid size {}",
            s.len() / 2
        )));
    }
    let n = from_usize::<T>(s.len());
    let gamma = (0..=maxlag)
        .map(|h| {
            let mut acc = CMat::zeros(s.dim(), s.dim());
            for (j, m) in s.mats().iter().enumerate() {
                acc += m * cis(s.grid().lambda(j) * from_usize::<T>(h));
            }
            acc.map(|z| z.re / n)
        })
        .collect::<Vec<_>>();
    let mut gamma = gamma;
    gamma[0] = crate::linalg::symmetric_part(&gamma[0]);
    AcvfSeq::new(gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::RMat;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn white(n: usize, lags: usize) -> AcvfSeq {
        let mut g = vec![RMat::identity(n, n)];
        g.extend(std::iter::repeat_n(RMat::zeros(n, n), lags));
        AcvfSeq::new(g).unwrap()
    }

    /// Random Hermitian, conjugate-symmetric grid from a random short acvf (not necessarily PD).
    fn random_grid(n: usize, size: usize, seed: u64) -> SpectralGrid {
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let g0 = {
            let a = RMat::from_fn(n, n, |_, _| next());
            &a * a.transpose() * 0.5
        };
        let g1 = RMat::from_fn(n, n, |_, _| next());
        let g2 = RMat::from_fn(n, n, |_, _| next() * 0.5);
        let acvf = AcvfSeq::new(vec![g0, g1, g2]).unwrap();
        flat_top_estimate(&acvf, &FreqGrid::new(size).unwrap(), &TaperSpec::new(2, 1e-3).unwrap()).unwrap()
    }

    #[test]
    fn grid_rejects_odd_and_small_sizes() {
        assert!(FreqGrid::<f64>::new(6).is_err());
        assert!(FreqGrid::<f64>::new(9).is_err());
        let g = FreqGrid::<f64>::new(8).unwrap();
        assert_eq!(g.mirror(0), 0);
        assert_eq!(g.mirror(1), 7);
        assert!((g.lambda(4)).abs() < 1e-15);
    }

    #[test]
    fn flat_top_weights() {
        assert_eq!(flat_top_weight(0.5), 1.0);
        assert_eq!(flat_top_weight(-1.0), 1.0);
        assert!((flat_top_weight(1.5f64) - 0.5).abs() < 1e-15);
        assert_eq!(flat_top_weight(2.0), 0.0);
        assert_eq!(flat_top_weight(3.0), 0.0);
    }

    #[test]
    fn white_noise_estimate_is_identity() {
        let grid = FreqGrid::new(16).unwrap();
        let s = flat_top_estimate(&white(2, 4), &grid, &TaperSpec::new(2, 0.01).unwrap()).unwrap();
        for m in s.mats() {
            assert!((m - CMat::identity(2, 2)).norm() < 1e-15);
        }
        let avg = grid_average(&s, None).unwrap();
        assert!((avg - CMat::identity(2, 2)).norm() < 1e-10);
    }

    #[test]
    fn univariate_estimate_at_zero_frequency() {
        let acvf = AcvfSeq::new(vec![RMat::from_element(1, 1, 1.25), RMat::from_element(1, 1, 0.5)]).unwrap();
        let grid = FreqGrid::new(16).unwrap();
        let s = flat_top_estimate(&acvf, &grid, &TaperSpec::new(1, 0.01).unwrap()).unwrap();
        // λ_8 = 0
        assert!((s.at(8)[(0, 0)] - c(2.25, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn bandwidth_must_fit_lag_budget() {
        let grid = FreqGrid::new(16).unwrap();
        assert!(flat_top_estimate(&white(1, 2), &grid, &TaperSpec::new(3, 0.1).unwrap()).is_err());
    }

    #[test]
    fn truncation_clamps_negative_eigenvalue() {
        let grid = FreqGrid::new(8).unwrap();
        let m = CMat::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.1, 0.0)]);
        let s = SpectralGrid::new(grid, vec![m; 8], SpectrumKind::Joint).unwrap();
        let t = pd_truncate(&s, 0.01);
        let mut ev: Vec<f64> = t.at(0).clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ev[0] - 0.01).abs() < 1e-14 && (ev[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn truncation_leaves_pd_input_unchanged() {
        let grid = FreqGrid::new(8).unwrap();
        let m = CMat::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.3, 0.4), c(0.3, -0.4), c(1.0, 0.0)]);
        let s = SpectralGrid::new(grid, vec![m.clone(); 8], SpectrumKind::Joint).unwrap();
        let t = pd_truncate(&s, 0.01);
        assert!((t.at(3) - &m).norm() < 1e-12);
    }

    #[test]
    fn block_diagonal_conditioning_is_marginal() {
        let grid = FreqGrid::new(8).unwrap();
        let m = CMat::from_row_slice(
            3,
            3,
            &[
                c(2.0, 0.0),
                c(0.5, 0.1),
                c(0.0, 0.0),
                c(0.5, -0.1),
                c(1.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(3.0, 0.0),
            ],
        );
        let s = SpectralGrid::new(grid, vec![m.clone(); 8], SpectrumKind::Joint).unwrap();
        let cond = conditional_spectrum(&s, 2).unwrap();
        assert_eq!(cond.at(0), &m.view((0, 0), (2, 2)).into_owned());
    }

    #[test]
    fn scalar_schur_complement() {
        let grid = FreqGrid::new(8).unwrap();
        let m = CMat::from_row_slice(2, 2, &[c(4.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]);
        let s = SpectralGrid::new(grid, vec![m; 8], SpectrumKind::Joint).unwrap();
        let cond = conditional_spectrum(&s, 1).unwrap();
        assert!((cond.at(5)[(0, 0)] - c(3.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn singular_auxiliary_block_names_frequency() {
        let grid = FreqGrid::new(8).unwrap();
        let good = CMat::from_row_slice(2, 2, &[c(4.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]);
        let bad = CMat::from_row_slice(2, 2, &[c(4.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let mut mats = vec![good; 8];
        mats[3] = bad;
        let s = SpectralGrid::new(grid, mats, SpectrumKind::Joint).unwrap();
        assert!(matches!(
            conditional_spectrum(&s, 1),
            Err(Error::Conditioning { index: 3, .. })
        ));
    }

    #[test]
    fn average_against_pure_delay_vanishes() {
        let grid = FreqGrid::<f64>::new(32).unwrap();
        let ident = SpectralGrid::new(grid.clone(), vec![CMat::identity(2, 2); 32], SpectrumKind::Marginal).unwrap();
        let rot = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let frf = SpectralGrid::new(
            grid.clone(),
            (0..32).map(|j| rot.map(|v| v * grid.z(j))).collect(),
            SpectrumKind::Frf,
        )
        .unwrap();
        assert!(grid_average(&ident, Some(&frf)).unwrap().norm() < 1e-14);
        let constant = CMat::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(1.0, 0.0)]);
        let s = SpectralGrid::new(grid, vec![constant.clone(); 32], SpectrumKind::Joint).unwrap();
        assert!((grid_average(&s, None).unwrap() - constant).norm() < 1e-14);
    }

    #[test]
    fn acvf_roundtrips_through_grid() {
        let g0 = RMat::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let g1 = RMat::from_row_slice(2, 2, &[0.5, 0.1, -0.2, 0.3]);
        let acvf = AcvfSeq::new(vec![g0.clone(), g1.clone(), RMat::zeros(2, 2)]).unwrap();
        let s = flat_top_estimate(&acvf, &FreqGrid::new(64).unwrap(), &TaperSpec::new(2, 0.01).unwrap()).unwrap();
        let back = spectrum_to_acvf(&s, 3).unwrap();
        assert!((back.gamma(0) - g0).norm() < 1e-13);
        assert!((back.gamma(1) - g1).norm() < 1e-13);
        assert!(back.gamma(3).norm() < 1e-13);
    }

    proptest! {
        #[test]
        fn estimate_is_conjugate_symmetric(seed in 0u64..10_000) {
            let s = random_grid(3, 16, seed);
            prop_assert!(s.conjugate_symmetry_error() < 1e-12);
            prop_assert!(s.hermitian_error() == 0.0);
        }

        #[test]
        fn truncation_only_adds_psd(seed in 0u64..10_000) {
            let s = random_grid(3, 16, seed);
            let t = pd_truncate(&s, 0.05);
            for (a, b) in t.mats().iter().zip(s.mats()) {
                prop_assert!(min_eigenvalue_hermitian(&(a - b)) > -1e-12);
                prop_assert!(min_eigenvalue_hermitian(a) > 0.05 - 1e-12);
            }
        }

        #[test]
        fn truncation_is_idempotent(seed in 0u64..10_000) {
            let s = random_grid(2, 16, seed);
            let once = pd_truncate(&s, 0.05);
            let twice = pd_truncate(&once, 0.05);
            for (a, b) in once.mats().iter().zip(twice.mats()) {
                prop_assert!((a - b).norm() < 1e-12);
            }
        }
    }
}
