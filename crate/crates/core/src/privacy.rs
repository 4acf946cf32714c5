//! The m-LIP privacy criterion, its multi-start optimization, and utility metrics.
//!
//! For a filter `Ψ` and conditional spectrum `S = S_{X|Z}` the criterion is
//! `1 - det(A B^{-1} A^*) / det⟨S⟩` with `A = ⟨S Ψ^*⟩` and `B = ⟨Ψ S Ψ^*⟩`,
//! where `⟨·⟩` is the frequency-grid mean.

use std::time::{Duration, Instant};

use nalgebra::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::allpass::{CepstralParams, Laurent};
use crate::error::{Error, Result};
use crate::factorize::RootGrid;
use crate::linalg::{hermitian_det, min_eigenvalue_hermitian, CMat, RMat};
use crate::optim::{Bfgs, LocalSearch, SearchOptions};
use crate::scalar::{lit, Real};
use crate::series::{sample_acvf, AcvfSeq, MultiSeries};
use crate::spectral::{grid_average, FreqGrid, SpectralGrid};

/// Half-width of the window in which roundoff outside `[0, 1]` is clamped.
pub const CLAMP_WINDOW: f64 = 1e-9;

/// Tolerance for treating the context as conjugate symmetric.
const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
struct FreqTerm<T: Real> {
    lambda: T,
    /// Weight in the grid mean: 1 for self-mirrored frequencies, 2 when the
    /// mirror is folded in, and 1 everywhere on the full grid.
    weight: T,
    root: CMat<T>,
    root_adj: CMat<T>,
    /// `S (R^{-1})^*`
    s_rinv_adj: CMat<T>,
    /// `R^{-1} S (R^{-1})^*`
    whitened: CMat<T>,
}

/// Immutable inputs of the criterion: `S_{X|Z}` and the roots of `S_X` on a common grid.
#[derive(Debug, Clone)]
pub struct CriterionContext<T: Real = f64> {
    s_cond: SpectralGrid<T>,
    roots: RootGrid<T>,
    denom: T,
    folded: bool,
    terms: Vec<FreqTerm<T>>,
}

impl<T: Real> CriterionContext<T> {
    pub fn new(s_cond: SpectralGrid<T>, roots: RootGrid<T>) -> Result<Self> {
        if s_cond.grid() != roots.grid() || s_cond.dim() != roots.dim() {
            return Err(Error::Shape(
                "conditional spectrum and roots live on different grids".into(),
            ));
        }
        for (j, s) in s_cond.mats().iter().enumerate() {
            let min = min_eigenvalue_hermitian(s);
            if !(min > T::zero()) || s_cond.hermitian_error() > lit(1e-10) {
                return Err(Error::Conditioning {
                    index: j,
                    detail: format!("conditional spectrum is not Hermitian positive definite (min eigenvalue {min})"),
                });
            }
        }
        let denom = hermitian_det(&grid_average(&s_cond, None)?)?;
        if !(denom > T::zero()) {
            return Err(Error::Conditioning {
                index: 0,
                detail: format!("det of the averaged conditional spectrum is {denom}"),
            });
        }
        let scale = T::one() + s_cond.mats().iter().fold(T::zero(), |a, m| a.max(m.norm()));
        let folded = s_cond.conjugate_symmetry_error() <= lit::<T>(SYMMETRY_TOL) * scale
            && roots.roots().conjugate_symmetry_error()
                <= lit::<T>(SYMMETRY_TOL)
                    * (T::one() + roots.roots().mats().iter().fold(T::zero(), |a, m| a.max(m.norm())));
        let grid = s_cond.grid().clone();
        let size = grid.size();
        let indices: Vec<(usize, T)> = if folded {
            (0..=size / 2)
                .map(|j| (j, if grid.mirror(j) == j { T::one() } else { lit(2.0) }))
                .collect()
        } else {
            (0..size).map(|j| (j, T::one())).collect()
        };
        let terms = indices
            .into_iter()
            .map(|(j, weight)| {
                let s = s_cond.at(j);
                let rinv_adj = roots.inverse(j).adjoint();
                FreqTerm {
                    lambda: grid.lambda(j),
                    weight,
                    root: roots.root(j).clone(),
                    root_adj: roots.root(j).adjoint(),
                    s_rinv_adj: s * &rinv_adj,
                    whitened: roots.inverse(j) * s * &rinv_adj,
                }
            })
            .collect();
        Ok(CriterionContext {
            s_cond,
            roots,
            denom,
            folded,
            terms,
        })
    }

    pub fn s_cond(&self) -> &SpectralGrid<T> {
        &self.s_cond
    }

    pub fn roots(&self) -> &RootGrid<T> {
        &self.roots
    }

    pub fn grid(&self) -> &FreqGrid<T> {
        self.s_cond.grid()
    }

    /// `det⟨S_{X|Z}⟩`.
    pub fn denom(&self) -> T {
        self.denom
    }

    pub fn dim(&self) -> usize {
        self.s_cond.dim()
    }

    /// True when the grid sums fold onto the half grid `λ ∈ [-π, 0]`.
    pub fn is_folded(&self) -> bool {
        self.folded
    }

    /// `det(A B^{-1} A^*) / det⟨S⟩` before any clamping; `1 - ratio` is the m-LIP.
    pub fn ratio(&self, theta: &CepstralParams<T>) -> Result<T> {
        if theta.n() != self.dim() {
            return Err(Error::Shape(format!(
                "parameters for dimension {} used with a dimension {} context",
                theta.n(),
                self.dim()
            )));
        }
        let laurent: Laurent<T> = theta.laurent();
        let n = self.dim();
        let mut a = CMat::zeros(n, n);
        let mut b = CMat::zeros(n, n);
        let mut total = T::zero();
        for t in &self.terms {
            let u = laurent.unitary_at(t.lambda);
            let u_adj = u.adjoint();
            let w = Complex::new(t.weight, T::zero());
            // A_j = S Ψ^* = S R^{-*} U^* R^*,  B_j = R U (R^{-1} S R^{-*}) U^* R^*
            a += (&t.s_rinv_adj * &u_adj * &t.root_adj) * w;
            b += (&t.root * (&u * &t.whitened * &u_adj) * &t.root_adj) * w;
            total += t.weight;
        }
        let total = Complex::new(total, T::zero());
        let (a, b) = if self.folded {
            (
                a.map(|z| Complex::new(z.re, T::zero()) / total),
                b.map(|z| Complex::new(z.re, T::zero()) / total),
            )
        } else {
            (a.map(|z| z / total), b.map(|z| z / total))
        };
        let b = crate::linalg::hermitian_part(&b);
        let chol = b.clone().cholesky().ok_or_else(|| Error::Conditioning {
            index: 0,
            detail: "filtered spectral mean ⟨Ψ S Ψ^*⟩ is singular".into(),
        })?;
        let c = &a * chol.solve(&a.adjoint());
        Ok(hermitian_det(&c)? / self.denom)
    }
}

/// Clamps `1 - ratio` into `[0, 1]` when within [`CLAMP_WINDOW`], else errors.
pub fn clamp_privacy<T: Real>(ratio: T) -> Result<T> {
    let value = T::one() - ratio;
    let window = lit::<T>(CLAMP_WINDOW);
    if !(value >= -window && value <= T::one() + window) {
        return Err(Error::Numerical(format!(
            "m-LIP value {value} is outside [0, 1]; the conditional spectrum is likely not positive definite"
        )));
    }
    Ok(value.max(T::zero()).min(T::one()))
}

/// The m-LIP of the filter with parameters `theta`, in `[0, 1]`.
pub fn mlip<T: Real>(theta: &CepstralParams<T>, ctx: &CriterionContext<T>) -> Result<T> {
    clamp_privacy(ctx.ratio(theta)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptOptions {
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
    pub fd_step: f64,
    /// Indices of the parameters that are optimized; the rest stay at zero.
    /// `None` frees all of them.
    pub free: Option<Vec<usize>>,
}

impl Default for OptOptions {
    fn default() -> Self {
        OptOptions {
            restarts: 8,
            seed: 0,
            max_iter: 500,
            tol: 1e-8,
            fd_step: 1e-6,
            free: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    pub seed_stream: u64,
    pub initial_privacy: Option<f64>,
    pub privacy: Option<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub failure: Option<String>,
}

#[derive(Debug, Clone)]
pub struct OptResult<T: Real = f64> {
    pub theta_opt: CepstralParams<T>,
    pub privacy: T,
    pub restarts_used: usize,
    pub iterations: usize,
    pub converged: bool,
    pub wall_time: Duration,
    pub restarts: Vec<RestartRecord>,
}

/// Standard-normal starting point for restart `index`; streams make each restart
/// independent of how many draws the others consumed.
pub fn initial_draw<T: Real>(seed: u64, index: usize, len: usize) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    (0..len)
        .map(|_| {
            let v: f64 = StandardNormal.sample(&mut rng);
            lit(v)
        })
        .collect()
}

/// Multi-start maximization of the m-LIP over cepstral order `r`.
pub fn optimize<T: Real>(ctx: &CriterionContext<T>, r: usize, opts: &OptOptions) -> Result<OptResult<T>> {
    optimize_with(ctx, r, opts, &Bfgs::default())
}

/// [`optimize`] with a caller-supplied local search.
pub fn optimize_with<T: Real, S: LocalSearch<T>>(
    ctx: &CriterionContext<T>,
    r: usize,
    opts: &OptOptions,
    search: &S,
) -> Result<OptResult<T>> {
    let start = Instant::now();
    let n = ctx.dim();
    let count = CepstralParams::<T>::count(n, r);
    let free: Vec<usize> = match &opts.free {
        Some(idx) => {
            if let Some(bad) = idx.iter().find(|&&i| i >= count) {
                return Err(Error::InvalidArgument(format!(
                    "free parameter index {bad} is out of range for {count} parameters"
                )));
            }
            idx.clone()
        }
        None => (0..count).collect(),
    };
    let embed = |sub: &[T]| -> CepstralParams<T> {
        let mut full = vec![T::zero(); count];
        for (&i, &v) in free.iter().zip(sub) {
            full[i] = v;
        }
        CepstralParams::new(n, r, full).expect("length matches count")
    };
    if opts.restarts == 0 || free.is_empty() {
        let theta = CepstralParams::zeros(n, r);
        let privacy = mlip(&theta, ctx)?;
        return Ok(OptResult {
            theta_opt: theta,
            privacy,
            restarts_used: 0,
            iterations: 0,
            converged: true,
            wall_time: start.elapsed(),
            restarts: Vec::new(),
        });
    }
    let search_opts = SearchOptions {
        max_iter: opts.max_iter,
        tol: opts.tol,
        fd_step: opts.fd_step,
    };
    let mut objective = |sub: &[T]| ctx.ratio(&embed(sub));
    let mut best: Option<(Vec<T>, T, bool)> = None;
    let mut records = Vec::with_capacity(opts.restarts);
    let mut iterations = 0;
    let mut last_error = None;
    for i in 0..opts.restarts {
        let x0 = initial_draw::<T>(opts.seed, i, free.len());
        match search.minimize(&mut objective, &x0, &search_opts) {
            Ok(res) => {
                iterations += res.iterations;
                let privacy = clamp_privacy(res.value);
                records.push(RestartRecord {
                    seed_stream: i as u64,
                    initial_privacy: clamp_privacy(res.initial_value).ok().map(Real::as_f64),
                    privacy: privacy.as_ref().ok().map(|p| p.as_f64()),
                    iterations: res.iterations,
                    evaluations: res.evaluations,
                    converged: res.converged,
                    failure: privacy.as_ref().err().map(|e| e.to_string()),
                });
                log::debug!("restart {i}: ratio {} after {} iterations", res.value, res.iterations);
                if privacy.is_ok() && best.as_ref().is_none_or(|(_, v, _)| res.value < *v) {
                    best = Some((res.x, res.value, res.converged));
                }
            }
            Err(e) => {
                log::debug!("restart {i} failed: {e}");
                records.push(RestartRecord {
                    seed_stream: i as u64,
                    initial_privacy: None,
                    privacy: None,
                    iterations: 0,
                    evaluations: 1,
                    converged: false,
                    failure: Some(e.to_string()),
                });
                last_error = Some(e);
            }
        }
    }
    let Some((x, value, converged)) = best else {
        return Err(
            last_error.unwrap_or_else(|| Error::Numerical("no restart produced a valid criterion value".into()))
        );
    };
    Ok(OptResult {
        theta_opt: embed(&x),
        privacy: clamp_privacy(value)?,
        restarts_used: opts.restarts,
        iterations,
        converged,
        wall_time: start.elapsed(),
        restarts: records,
    })
}

/// Normalized Frobenius discrepancy over explicit lag lists (`h = -L..L`).
pub fn nfd_lags<T: Real>(gx: &[RMat<T>], gy: &[RMat<T>]) -> Result<T> {
    if gx.len() != gy.len() || gx.iter().zip(gy).any(|(a, b)| a.shape() != b.shape()) {
        return Err(Error::Shape("nfd needs equally shaped lag lists".into()));
    }
    let (num, den) = gx.iter().zip(gy).fold((T::zero(), T::zero()), |(num, den), (a, b)| {
        let sum = a.norm() + b.norm();
        (num + (a - b).norm_squared(), den + sum * sum)
    });
    if !(den > T::zero()) {
        return Err(Error::UndefinedMetric("both autocovariance sequences vanish".into()));
    }
    Ok(num / den)
}

fn two_sided<T: Real>(acvf: &AcvfSeq<T>) -> Vec<RMat<T>> {
    let l = acvf.maxlag() as isize;
    (-l..=l).map(|h| acvf.at(h)).collect()
}

/// Normalized Frobenius discrepancy between two autocovariance sequences, in `[0, 1]`.
pub fn nfd<T: Real>(acvf_x: &AcvfSeq<T>, acvf_y: &AcvfSeq<T>) -> Result<T> {
    if acvf_x.dim() != acvf_y.dim() || acvf_x.maxlag() != acvf_y.maxlag() {
        return Err(Error::Shape("nfd needs equal dimensions and lag counts".into()));
    }
    nfd_lags(&two_sided(acvf_x), &two_sided(acvf_y))
}

/// Realized utility `1 - nfd` of the sample autocovariances up to lag `lag`.
pub fn rum<T: Real>(x: &MultiSeries<T>, y: &MultiSeries<T>, lag: usize) -> Result<T> {
    if x.len() != y.len() || x.dim() != y.dim() {
        return Err(Error::Shape(format!(
            "rum needs equal shapes, got {}x{} and {}x{}",
            x.len(),
            x.dim(),
            y.len(),
            y.dim()
        )));
    }
    Ok(T::one() - nfd(&sample_acvf(x, lag)?, &sample_acvf(y, lag)?)?)
}

/// Sample auto- or cross-correlations of one channel pair for original and privatized data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTable {
    /// `"acf"` or `"ccf"`.
    pub kind: String,
    pub first: String,
    pub second: String,
    pub lags: Vec<i64>,
    /// `corr(first_{t+h}, second_t)` for the original series.
    pub original: Vec<f64>,
    pub privatized: Vec<f64>,
}

/// Correlation tables: an ACF per channel (lags `0..=lag`) and a CCF per channel
/// pair (lags `-lag..=lag`).
pub fn correlation_tables<T: Real>(
    x: &MultiSeries<T>,
    y: &MultiSeries<T>,
    lag: usize,
) -> Result<Vec<CorrelationTable>> {
    let ax = sample_acvf(x, lag)?;
    let ay = sample_acvf(y, lag)?;
    let names = x.names();
    let n = x.dim();
    let l = lag as isize;
    let mut tables = Vec::new();
    let table = |kind: &str, i: usize, j: usize, lags: Vec<isize>| CorrelationTable {
        kind: kind.to_string(),
        first: names[i].clone(),
        second: names[j].clone(),
        original: lags.iter().map(|&h| ax.correlation(h)[(i, j)].as_f64()).collect(),
        privatized: lags.iter().map(|&h| ay.correlation(h)[(i, j)].as_f64()).collect(),
        lags: lags.into_iter().map(|h| h as i64).collect(),
    };
    for i in 0..n {
        tables.push(table("acf", i, i, (0..=l).collect()));
    }
    for i in 0..n {
        for j in i + 1..n {
            tables.push(table("ccf", i, j, (-l..=l).collect()));
        }
    }
    Ok(tables)
}

/// Machine-readable summary of one privatization run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrivacyReport {
    pub privacy: f64,
    pub rum: f64,
    pub nfd: f64,
    pub smap_error: f64,
    pub r: usize,
    pub theta: Vec<f64>,
    pub converged: bool,
    pub restarts: Vec<RestartRecord>,
    pub lag: usize,
    pub tables: Vec<CorrelationTable>,
    /// Seconds spent in the optimizer; only present when timings are requested,
    /// so that reports are otherwise reproducible byte for byte.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_secs: Option<f64>,
}

/// Assembles the report from the (detrended) original `x` and privatized `y`.
pub fn privacy_report<T: Real>(
    x: &MultiSeries<T>,
    y: &MultiSeries<T>,
    opt: &OptResult<T>,
    smap_error: T,
    lag: usize,
) -> Result<PrivacyReport> {
    let lag = lag.min(x.len().saturating_sub(1));
    let rum_value = rum(x, y, lag)?;
    Ok(PrivacyReport {
        privacy: opt.privacy.as_f64(),
        rum: rum_value.as_f64(),
        nfd: 1.0 - rum_value.as_f64(),
        smap_error: smap_error.as_f64(),
        r: opt.theta_opt.r(),
        theta: opt.theta_opt.as_slice().iter().map(|v| v.as_f64()).collect(),
        converged: opt.converged,
        restarts: opt.restarts.clone(),
        lag,
        tables: correlation_tables(x, y, lag)?,
        runtime_secs: None,
    })
}

/// Min / max / mean / standard deviation of a batch of values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub count: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub std: f64,
}

impl BatchSummary {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let count = values.len();
        let mean = values.iter().sum::<f64>() / count as f64;
        let var = if count > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64
        } else {
            0.0
        };
        Some(BatchSummary {
            count,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean,
            std: var.sqrt(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorize::spectral_root_grid;
    use crate::sim::random_vma_factor;
    use crate::spectral::SpectrumKind;
    use proptest::prelude::*;

    /// Context whose spectra come from random invertible VMA(q) factors.
    fn vma_context(n: usize, q: usize, size: usize, seed: u64) -> CriterionContext {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = FreqGrid::new(size).unwrap();
        let fx = random_vma_factor(n, q, 0.9, &mut rng).unwrap();
        let fc = random_vma_factor(n, q, 0.9, &mut rng).unwrap();
        let roots = spectral_root_grid(&fx, &grid).unwrap();
        let s_cond = spectral_root_grid(&fc, &grid).unwrap().spectrum();
        CriterionContext::new(s_cond, roots).unwrap()
    }

    fn random_complex(n: usize, rng: &mut ChaCha8Rng) -> CMat<f64> {
        CMat::from_fn(n, n, |_, _| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex::new(re, im)
        })
    }

    /// Context with arbitrary (not conjugate-symmetric) PD spectra and roots.
    fn unstructured_context(n: usize, size: usize, seed: u64) -> CriterionContext {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = FreqGrid::new(size).unwrap();
        let eye = CMat::<f64>::identity(n, n);
        let s: Vec<_> = (0..size)
            .map(|_| {
                let m = random_complex(n, &mut rng);
                &m * m.adjoint() + &eye * Complex::new(0.1, 0.0)
            })
            .collect();
        let r: Vec<_> = (0..size)
            .map(|_| random_complex(n, &mut rng) + &eye * Complex::new(3.0, 0.0))
            .collect();
        let roots = RootGrid::from_roots(SpectralGrid::new(grid.clone(), r, SpectrumKind::Root).unwrap()).unwrap();
        CriterionContext::new(SpectralGrid::new(grid, s, SpectrumKind::Conditional).unwrap(), roots).unwrap()
    }

    /// `exp` by scaling and squaring of a Taylor series.
    fn taylor_exp(m: &CMat<f64>) -> CMat<f64> {
        let squarings = 10;
        let scaled = m.map(|z| z / 1024.0);
        let mut term = CMat::identity(m.nrows(), m.nrows());
        let mut sum = term.clone();
        for k in 1..30 {
            term = &term * &scaled / Complex::new(k as f64, 0.0);
            sum += &term;
        }
        for _ in 0..squarings {
            sum = &sum * &sum;
        }
        sum
    }

    /// From-scratch evaluation on the full grid with explicit inverses.
    fn oracle_mlip(theta: &CepstralParams, ctx: &CriterionContext) -> f64 {
        let (o0, rest) = theta.unpack();
        let size = ctx.grid().size();
        let n = ctx.dim();
        let mut a = CMat::zeros(n, n);
        let mut b = CMat::zeros(n, n);
        let mut avg = CMat::zeros(n, n);
        for j in 0..size {
            let lambda = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * j as f64 / size as f64;
            let mut omega = o0.map(|v| Complex::new(v, 0.0));
            for (k, m) in rest.iter().enumerate() {
                let z = Complex::from_polar(1.0, -lambda * (k + 1) as f64);
                omega += m.map(|v| Complex::new(v, 0.0)) * z - m.transpose().map(|v| Complex::new(v, 0.0)) / z;
            }
            let root = ctx.roots().root(j);
            let psi = root * taylor_exp(&omega) * root.clone().try_inverse().unwrap();
            let s = ctx.s_cond().at(j);
            a += s * psi.adjoint();
            b += &psi * s * psi.adjoint();
            avg += s;
        }
        let inv_b = b.try_inverse().unwrap();
        // the 1/N factors cancel except for one power of N per dimension
        let num = (&a * inv_b * a.adjoint()).determinant().re;
        let den = avg.determinant().re;
        1.0 - num / den
    }

    fn random_theta(n: usize, r: usize, seed: u64) -> CepstralParams {
        CepstralParams::new(n, r, initial_draw(seed, 0, CepstralParams::<f64>::count(n, r))).unwrap()
    }

    #[test]
    fn identity_filter_has_zero_privacy() {
        for seed in 0..5 {
            let ctx = vma_context(2, 2, 64, seed);
            assert!(ctx.is_folded());
            assert!(mlip(&CepstralParams::zeros(2, 1), &ctx).unwrap().abs() < 1e-12);
            let ctx = unstructured_context(3, 8, seed);
            assert!(!ctx.is_folded());
            assert!(mlip(&CepstralParams::zeros(3, 2), &ctx).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn matches_brute_force_oracle_on_unstructured_grid() {
        for seed in 0..10 {
            let ctx = unstructured_context(2, 8, seed);
            let theta = random_theta(2, 1, seed + 100);
            let fast = ctx.ratio(&theta).unwrap();
            assert!(((1.0 - fast) - oracle_mlip(&theta, &ctx)).abs() < 1e-10);
        }
    }

    #[test]
    fn folded_sum_matches_oracle() {
        for seed in 0..10 {
            let ctx = vma_context(2, 1, 32, seed);
            let theta = random_theta(2, 2, seed + 7);
            let fast = ctx.ratio(&theta).unwrap();
            assert!(((1.0 - fast) - oracle_mlip(&theta, &ctx)).abs() < 1e-10);
        }
    }

    #[test]
    fn scalar_series_has_no_privacy_to_gain() {
        let ctx = vma_context(1, 1, 32, 3);
        let res = optimize(&ctx, 0, &OptOptions::default()).unwrap();
        assert!(res.theta_opt.as_slice().is_empty());
        assert!(res.privacy.abs() < 1e-12);
    }

    #[test]
    fn zero_restarts_returns_identity() {
        let ctx = vma_context(2, 1, 32, 3);
        let res = optimize(
            &ctx,
            1,
            &OptOptions {
                restarts: 0,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(res.theta_opt.is_zero());
        assert!(res.privacy.abs() < 1e-12);
    }

    #[test]
    fn optimization_improves_every_restart_and_is_deterministic() {
        let ctx = vma_context(2, 2, 64, 12);
        let opts = OptOptions {
            restarts: 3,
            seed: 42,
            ..Default::default()
        };
        let res = optimize(&ctx, 1, &opts).unwrap();
        for rec in &res.restarts {
            assert!(rec.privacy.unwrap() >= rec.initial_privacy.unwrap());
            assert!(rec.privacy.unwrap() <= res.privacy.as_f64() + 1e-15);
        }
        assert!((res.privacy - mlip(&res.theta_opt, &ctx).unwrap()).abs() < 1e-12);
        let again = optimize(&ctx, 1, &opts).unwrap();
        assert_eq!(res.theta_opt, again.theta_opt);
    }

    #[test]
    fn free_mask_fixes_other_parameters() {
        let ctx = vma_context(2, 1, 32, 5);
        let opts = OptOptions {
            restarts: 2,
            free: Some(vec![0, 1]),
            ..Default::default()
        };
        let res = optimize(&ctx, 1, &opts).unwrap();
        assert!(res.theta_opt.as_slice()[2..].iter().all(|v| *v == 0.0));
        let bad = OptOptions {
            free: Some(vec![9]),
            ..Default::default()
        };
        assert!(optimize(&ctx, 1, &bad).is_err());
    }

    #[test]
    fn finite_differences_are_self_consistent() {
        let ctx = vma_context(2, 1, 64, 8);
        let theta = random_theta(2, 1, 3);
        let mut f = |x: &[f64]| ctx.ratio(&CepstralParams::new(2, 1, x.to_vec()).unwrap());
        let mut evals = 0;
        let g = crate::optim::fd_gradient(&mut f, theta.as_slice(), 1e-6, &mut evals).unwrap();
        let g_half = crate::optim::fd_gradient(&mut f, theta.as_slice(), 5e-7, &mut evals).unwrap();
        let diff: f64 = g.iter().zip(&g_half).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let norm: f64 = g.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!(diff / norm < 1e-3);
    }

    #[test]
    fn nfd_examples() {
        let eye = RMat::<f64>::identity(2, 2);
        let x = AcvfSeq::new(vec![eye.clone()]).unwrap();
        let y = AcvfSeq::new(vec![eye.clone() * 2.0]).unwrap();
        assert!((nfd(&x, &y).unwrap() - 1.0 / 9.0).abs() < 1e-15);
        assert_eq!(nfd(&x, &x).unwrap(), 0.0);
        let a = vec![eye.clone(), RMat::from_row_slice(2, 2, &[0.3, 0.1, -0.2, 0.5])];
        let neg: Vec<_> = a.iter().map(|m| -m).collect();
        assert!((nfd_lags(&a, &neg).unwrap() - 1.0).abs() < 1e-15);
        let zero = AcvfSeq::new(vec![RMat::<f64>::zeros(2, 2)]).unwrap();
        assert!(matches!(nfd(&zero, &zero), Err(Error::UndefinedMetric(_))));
    }

    #[test]
    fn rum_of_identical_series_is_one() {
        let m = crate::sim::presets::var1();
        let x = crate::sim::simulate_var(&m, 300, 1, 50).unwrap();
        assert_eq!(rum(&x, &x, 10).unwrap(), 1.0);
        let noise = crate::sim::simulate_var(
            &crate::sim::VarModel::new(vec![], RMat::identity(4, 4)).unwrap(),
            300,
            2,
            0,
        )
        .unwrap();
        let expected = 1.0 - nfd(&sample_acvf(&x, 10).unwrap(), &sample_acvf(&noise, 10).unwrap()).unwrap();
        let got = rum(&x, &noise, 10).unwrap();
        assert_eq!(got, expected);
        assert!(got < 0.9);
    }

    #[test]
    fn report_has_acf_and_ccf_tables() {
        let m = crate::sim::presets::var1();
        let x = crate::sim::simulate_var(&m, 200, 1, 50)
            .unwrap()
            .select(&[0, 1])
            .unwrap();
        let opt = OptResult {
            theta_opt: CepstralParams::zeros(2, 0),
            privacy: 0.0,
            restarts_used: 0,
            iterations: 0,
            converged: true,
            wall_time: Duration::ZERO,
            restarts: vec![],
        };
        let report = privacy_report(&x, &x, &opt, 0.0, 20).unwrap();
        assert_eq!(report.rum, 1.0);
        let kinds: Vec<_> = report.tables.iter().map(|t| t.kind.as_str()).collect();
        assert_eq!(kinds, ["acf", "acf", "ccf"]);
        assert_eq!(report.tables[0].original[0], 1.0);
        assert_eq!(report.tables[2].lags.len(), 41);
        assert!(!serde_json::to_string(&report).unwrap().contains("runtime"));
    }

    #[test]
    fn batch_summary() {
        let s = BatchSummary::from_values(&[0.5, 1.0, 0.75]).unwrap();
        assert_eq!((s.count, s.min, s.max), (3, 0.5, 1.0));
        assert!((s.mean - 0.75).abs() < 1e-15 && (s.std - 0.25).abs() < 1e-15);
        assert!(BatchSummary::from_values(&[]).is_none());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn privacy_lies_in_unit_interval(seed in 0u64..10_000, r in 0usize..3, scale in 0.1f64..5.0) {
            let ctx = vma_context(2, 2, 32, seed);
            let raw = initial_draw::<f64>(seed, 1, CepstralParams::<f64>::count(2, r));
            let theta = CepstralParams::new(2, r, raw.iter().map(|v| v * scale).collect()).unwrap();
            let value = mlip(&theta, &ctx).unwrap();
            prop_assert!((0.0..=1.0).contains(&value));
        }
    }
}
