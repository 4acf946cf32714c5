//! Simulation designs and their closed-form second-order structure.

use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorize::VmaFactor;
use crate::linalg::{from_rows, spectral_radius, to_complex, to_rows, CMat, RMat};
use crate::scalar::{lit, Real};
use crate::series::{AcvfSeq, MultiSeries};
use crate::spectral::{FreqGrid, SpectralGrid, SpectrumKind};

/// Default number of discarded start-up samples.
pub const DEFAULT_BURNIN: usize = 500;

/// Margin below one required of the companion spectral radius.
const STATIONARITY_MARGIN: f64 = 1e-10;

/// Block companion matrix of `W_t = Σ_k A_k W_{t-k} + ε_t`.
pub fn companion<T: Real>(coeffs: &[RMat<T>]) -> RMat<T> {
    let n = coeffs.first().map_or(0, |a| a.nrows());
    let p = coeffs.len();
    let mut f = RMat::zeros(n * p, n * p);
    for (k, a) in coeffs.iter().enumerate() {
        f.view_mut((0, k * n), (n, n)).copy_from(a);
    }
    for k in 1..p {
        f.view_mut((k * n, (k - 1) * n), (n, n)).fill_with_identity();
    }
    f
}

/// True iff the companion spectral radius is below `1 - 1e-10`.
pub fn check_stationary<T: Real>(coeffs: &[RMat<T>]) -> bool {
    coeffs.is_empty() || spectral_radius(&companion(coeffs)) < lit::<T>(1.0 - STATIONARITY_MARGIN)
}

fn require_stationary<T: Real>(coeffs: &[RMat<T>]) -> Result<()> {
    if check_stationary(coeffs) {
        Ok(())
    } else {
        Err(Error::NonStationary {
            radius: spectral_radius(&companion(coeffs)).as_f64(),
        })
    }
}

fn noise_factor<T: Real>(sigma: &RMat<T>, what: &str) -> Result<RMat<T>> {
    if !sigma.is_square() || !crate::linalg::is_symmetric(sigma, lit(1e-12)) {
        return Err(Error::InvalidArgument(format!("{what} must be a symmetric matrix")));
    }
    sigma
        .clone()
        .cholesky()
        .map(|c| c.l())
        .ok_or_else(|| Error::InvalidArgument(format!("{what} must be positive definite")))
}

fn check_square<T: Real>(mats: &[&RMat<T>], n: usize, what: &str) -> Result<()> {
    if mats.iter().any(|m| m.nrows() != n || m.ncols() != n) {
        return Err(Error::Shape(format!("{what} matrices must all be {n}x{n}")));
    }
    Ok(())
}

/// Gaussian VAR(p) `W_t = Σ_k A_k W_{t-k} + ε_t`, `ε_t ~ N(0, Σ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VarModel<T: Real = f64> {
    coeffs: Vec<RMat<T>>,
    noise_cov: RMat<T>,
    chol: RMat<T>,
}

impl<T: Real> VarModel<T> {
    pub fn new(coeffs: Vec<RMat<T>>, noise_cov: RMat<T>) -> Result<Self> {
        let n = noise_cov.nrows();
        check_square(&coeffs.iter().collect::<Vec<_>>(), n, "AR")?;
        require_stationary(&coeffs)?;
        let chol = noise_factor(&noise_cov, "noise covariance")?;
        Ok(VarModel {
            coeffs,
            noise_cov,
            chol,
        })
    }

    pub fn coeffs(&self) -> &[RMat<T>] {
        &self.coeffs
    }

    pub fn noise_cov(&self) -> &RMat<T> {
        &self.noise_cov
    }

    pub fn dim(&self) -> usize {
        self.noise_cov.nrows()
    }

    pub fn spectrum(&self, grid: &FreqGrid<T>) -> Result<SpectralGrid<T>> {
        model_spectrum(&self.coeffs, &[], &self.noise_cov, grid)
    }

    /// Exact autocovariances `Γ(0..=maxlag)` from the companion Lyapunov equation.
    pub fn acvf(&self, maxlag: usize) -> Result<AcvfSeq<T>> {
        companion_acvf(&self.coeffs, &self.noise_cov, maxlag)
    }
}

/// Gaussian VARMA(1,1) `W_t = Φ W_{t-1} + ε_t + Θ ε_{t-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Varma11Model<T: Real = f64> {
    ar: RMat<T>,
    ma: RMat<T>,
    noise_cov: RMat<T>,
    chol: RMat<T>,
}

impl<T: Real> Varma11Model<T> {
    pub fn new(ar: RMat<T>, ma: RMat<T>, noise_cov: RMat<T>) -> Result<Self> {
        check_square(&[&ar, &ma], noise_cov.nrows(), "VARMA")?;
        require_stationary(std::slice::from_ref(&ar))?;
        let chol = noise_factor(&noise_cov, "noise covariance")?;
        Ok(Varma11Model {
            ar,
            ma,
            noise_cov,
            chol,
        })
    }

    pub fn ar(&self) -> &RMat<T> {
        &self.ar
    }

    pub fn ma(&self) -> &RMat<T> {
        &self.ma
    }

    pub fn noise_cov(&self) -> &RMat<T> {
        &self.noise_cov
    }

    pub fn dim(&self) -> usize {
        self.noise_cov.nrows()
    }

    pub fn spectrum(&self, grid: &FreqGrid<T>) -> Result<SpectralGrid<T>> {
        model_spectrum(
            std::slice::from_ref(&self.ar),
            std::slice::from_ref(&self.ma),
            &self.noise_cov,
            grid,
        )
    }
}

/// Scalar ARCH(1) innovation `ζ_t = √h_t e_t`, `h_t = α_0 + α_1 ζ_{t-1}²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArchSpec {
    pub alpha0: f64,
    pub alpha1: f64,
}

impl ArchSpec {
    pub fn new(alpha0: f64, alpha1: f64) -> Result<Self> {
        if !(alpha0 > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "ARCH alpha0 must be positive, got {alpha0}"
            )));
        }
        if !(0.0..1.0).contains(&alpha1) {
            return Err(Error::InvalidArgument(format!(
                "ARCH alpha1 must lie in [0, 1), got {alpha1}"
            )));
        }
        Ok(ArchSpec { alpha0, alpha1 })
    }

    /// Unconditional variance `α_0 / (1 - α_1)`.
    pub fn variance(&self) -> f64 {
        self.alpha0 / (1.0 - self.alpha1)
    }
}

fn normal<T: Real>(rng: &mut ChaCha8Rng) -> T {
    let v: f64 = StandardNormal.sample(rng);
    lit(v)
}

fn normal_vector<T: Real>(rng: &mut ChaCha8Rng, chol: &RMat<T>) -> nalgebra::DVector<T> {
    let e = nalgebra::DVector::from_fn(chol.nrows(), |_, _| normal::<T>(rng));
    chol * e
}

fn into_series<T: Real>(rows: Vec<nalgebra::DVector<T>>, n: usize) -> Result<MultiSeries<T>> {
    let len = rows.len();
    MultiSeries::from_values(RMat::from_fn(len, n, |t, i| rows[t][i]))
}

/// Simulates `len` observations after discarding `burnin` start-up samples.
pub fn simulate_var<T: Real>(m: &VarModel<T>, len: usize, seed: u64, burnin: usize) -> Result<MultiSeries<T>> {
    let n = m.dim();
    let p = m.coeffs.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hist: Vec<nalgebra::DVector<T>> = vec![nalgebra::DVector::zeros(n); p];
    let mut out = Vec::with_capacity(len);
    for t in 0..burnin + len {
        let mut w = normal_vector(&mut rng, &m.chol);
        for (k, a) in m.coeffs.iter().enumerate() {
            w += a * &hist[(t + p - 1 - k) % p.max(1)];
        }
        if p > 0 {
            hist[t % p] = w.clone();
        }
        if t >= burnin {
            out.push(w);
        }
    }
    into_series(out, n)
}

pub fn simulate_varma11<T: Real>(m: &Varma11Model<T>, len: usize, seed: u64, burnin: usize) -> Result<MultiSeries<T>> {
    let n = m.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w_prev = nalgebra::DVector::zeros(n);
    let mut e_prev = nalgebra::DVector::zeros(n);
    let mut out = Vec::with_capacity(len);
    for t in 0..burnin + len {
        let e = normal_vector(&mut rng, &m.chol);
        let w = &m.ar * &w_prev + &e + &m.ma * &e_prev;
        if t >= burnin {
            out.push(w.clone());
        }
        w_prev = w;
        e_prev = e;
    }
    into_series(out, n)
}

/// Gaussian VMA(q) `W_t = ε_t + Σ_k Θ_k ε_{t-k}`.
pub fn simulate_vma<T: Real>(
    ma: &[RMat<T>],
    noise_cov: &RMat<T>,
    len: usize,
    seed: u64,
    burnin: usize,
) -> Result<MultiSeries<T>> {
    let n = noise_cov.nrows();
    check_square(&ma.iter().collect::<Vec<_>>(), n, "MA")?;
    let chol = noise_factor(noise_cov, "noise covariance")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = ma.len();
    let mut past: Vec<nalgebra::DVector<T>> = vec![nalgebra::DVector::zeros(n); q.max(1)];
    let mut out = Vec::with_capacity(len);
    for t in 0..burnin + len {
        let e = normal_vector(&mut rng, &chol);
        let mut w = e.clone();
        for (k, m) in ma.iter().enumerate() {
            w += m * &past[(t + q - 1 - k) % q];
        }
        if q > 0 {
            past[t % q] = e;
        }
        if t >= burnin {
            out.push(w);
        }
    }
    into_series(out, n)
}

/// VAR(1) `Q_t = A Q_{t-1} + ζ_t` whose first innovation is ARCH(1) and whose
/// remaining innovations are independent standard normals. Returns `(Q, ζ_1)`.
pub fn simulate_var_arch<T: Real>(
    a: &RMat<T>,
    arch: &ArchSpec,
    len: usize,
    seed: u64,
    burnin: usize,
) -> Result<(MultiSeries<T>, MultiSeries<T>)> {
    let arch = ArchSpec::new(arch.alpha0, arch.alpha1)?;
    if !a.is_square() || a.nrows() == 0 {
        return Err(Error::Shape(
            "VAR+ARCH coefficient must be a non-empty square matrix".into(),
        ));
    }
    require_stationary(std::slice::from_ref(a))?;
    let n = a.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q = nalgebra::DVector::zeros(n);
    let mut zeta1_prev = 0.0f64;
    let mut qs = Vec::with_capacity(len);
    let mut zs = Vec::with_capacity(len);
    for t in 0..burnin + len {
        let h = arch.alpha0 + arch.alpha1 * zeta1_prev * zeta1_prev;
        let e: f64 = StandardNormal.sample(&mut rng);
        let zeta1 = h.sqrt() * e;
        let mut zeta = nalgebra::DVector::from_element(n, T::zero());
        zeta[0] = lit(zeta1);
        for i in 1..n {
            zeta[i] = normal(&mut rng);
        }
        q = a * q + zeta;
        zeta1_prev = zeta1;
        if t >= burnin {
            qs.push(q.clone());
            zs.push(nalgebra::DVector::from_element(1, lit::<T>(zeta1)));
        }
    }
    let q_series = into_series(qs, n)?;
    let names: Vec<String> = (1..=n).map(|i| format!("q{i}")).collect();
    Ok((
        MultiSeries::new(q_series.into_values(), names)?,
        MultiSeries::new(into_series(zs, 1)?.into_values(), vec!["z1".to_string()])?,
    ))
}

/// `Φ(z)^{-1} Θ(z) Σ Θ(z)^* Φ(z)^{-*}` with `Φ(z) = I - Σ A_k z^k`,
/// `Θ(z) = I + Σ M_k z^k` and `z = e^{-iλ}`.
pub fn model_spectrum<T: Real>(
    ar: &[RMat<T>],
    ma: &[RMat<T>],
    sigma: &RMat<T>,
    grid: &FreqGrid<T>,
) -> Result<SpectralGrid<T>> {
    let n = sigma.nrows();
    check_square(&ar.iter().chain(ma).collect::<Vec<_>>(), n, "model")?;
    let sig = to_complex(sigma);
    let poly = |coeffs: &[RMat<T>], sign: T, z: Complex<T>| -> CMat<T> {
        let mut acc = CMat::identity(n, n);
        let mut zk = Complex::new(T::one(), T::zero());
        for c in coeffs {
            zk *= z;
            acc += to_complex(c) * (zk * sign);
        }
        acc
    };
    let mats = (0..grid.size())
        .map(|j| {
            let z = grid.z(j);
            let phi = poly(ar, -T::one(), z);
            let theta = poly(ma, T::one(), z);
            let inv = phi.try_inverse().ok_or(Error::Conditioning {
                index: j,
                detail: "autoregressive polynomial is singular on the unit circle".into(),
            })?;
            let h = inv * theta;
            Ok(&h * &sig * h.adjoint())
        })
        .collect::<Result<Vec<_>>>()?;
    SpectralGrid::new(grid.clone(), mats, SpectrumKind::Joint)
}

/// Exact VAR(p) autocovariances via the companion-form Lyapunov equation
/// `P = F P F' + Q`, solved by doubling.
pub fn companion_acvf<T: Real>(coeffs: &[RMat<T>], sigma: &RMat<T>, maxlag: usize) -> Result<AcvfSeq<T>> {
    require_stationary(coeffs)?;
    let n = sigma.nrows();
    if coeffs.is_empty() {
        let mut gamma = vec![RMat::zeros(n, n); maxlag + 1];
        gamma[0] = sigma.clone();
        return AcvfSeq::new(gamma);
    }
    let f = companion(coeffs);
    let dim = f.nrows();
    let mut q = RMat::zeros(dim, dim);
    q.view_mut((0, 0), (n, n)).copy_from(sigma);
    // P = Σ_k F^k Q F'^k, doubled: P_{2j} = P_j + A_j P_j A_j', A_{2j} = A_j²
    let mut p = q;
    let mut a = f.clone();
    for _ in 0..200 {
        let next = &p + &a * &p * a.transpose();
        let delta = (&next - &p).norm();
        p = next;
        a = &a * &a;
        if delta <= T::default_epsilon() * p.norm() {
            break;
        }
    }
    let p = crate::linalg::symmetric_part(&p);
    let mut gamma = Vec::with_capacity(maxlag + 1);
    let mut state = p;
    for _ in 0..=maxlag {
        gamma.push(state.view((0, 0), (n, n)).into_owned());
        state = &f * state;
    }
    AcvfSeq::new(gamma)
}

/// Random invertible VMA(q) factor: `Θ_k` scaled so that `Σ_k ‖Θ_k‖_2 ≤ shrink < 1`
/// and `Σ = L L'` with a random lower-triangular `L` of unit diagonal.
pub fn random_vma_factor<T: Real, R: Rng>(n: usize, q: usize, shrink: f64, rng: &mut R) -> Result<VmaFactor<T>> {
    let draw = |rng: &mut R| -> RMat<T> { RMat::from_fn(n, n, |_, _| lit(StandardNormal.sample(rng))) };
    let mut theta = vec![RMat::identity(n, n)];
    let raw: Vec<RMat<T>> = (0..q).map(|_| draw(rng)).collect();
    let total = raw.iter().fold(T::zero(), |acc, m| {
        acc + m.clone().svd(false, false).singular_values.max()
    });
    let budget = lit::<T>(shrink) * lit::<T>(rng.random_range(0.0..1.0));
    for m in raw {
        theta.push(if total > T::zero() { m * (budget / total) } else { m });
    }
    let mut l = draw(rng);
    for i in 0..n {
        l[(i, i)] = T::one() + l[(i, i)].abs();
        for j in i + 1..n {
            l[(i, j)] = T::zero();
        }
    }
    VmaFactor::new(theta, &l * l.transpose())
}

/// The three simulation designs.
pub mod presets {
    use super::*;

    fn rows(r: &[Vec<f64>]) -> RMat<f64> {
        from_rows(r).expect("rectangular literal")
    }

    /// The 4-variate VAR(1); channels 1-2 are confidential, 3-4 auxiliary.
    pub fn var1() -> VarModel {
        VarModel::new(
            vec![rows(&[
                vec![0.5, 0.1, 0.0, 0.0],
                vec![0.2, 0.4, 0.1, 0.0],
                vec![0.1, 0.2, 0.6, 0.2],
                vec![0.0, 0.1, 0.2, 0.5],
            ])],
            rows(&[
                vec![1.0, 0.2, 0.1, 0.0],
                vec![0.2, 1.0, 0.2, 0.1],
                vec![0.1, 0.2, 1.0, 0.3],
                vec![0.0, 0.1, 0.3, 1.0],
            ]),
        )
        .expect("preset is stationary")
    }

    /// The 4-variate VARMA(1,1); channels 1-2 are confidential, 3-4 auxiliary.
    pub fn varma11() -> Varma11Model {
        Varma11Model::new(
            rows(&[
                vec![-0.00556, -0.6353, 0.2529, -0.0096],
                vec![-0.2288, 0.3506, 0.2414, -0.02505],
                vec![-0.23423, -1.33007, 0.517, -0.1978],
                vec![0.1624, 0.5523, 0.4042, -0.1412],
            ]),
            rows(&[
                vec![0.6, 0.2, 0.0, 0.0],
                vec![0.0, 0.3, 0.0, 0.0],
                vec![0.0, 0.0, 0.0, 0.0],
                vec![0.0, 0.0, 0.0, 0.0],
            ]),
            RMat::from_diagonal(&nalgebra::DVector::from_vec(vec![0.09, 0.03, 0.05, 0.07])),
        )
        .expect("preset is stationary")
    }

    /// Bivariate VAR(1) coefficient of the ARCH design: the leading 2x2 block of
    /// the VAR(1) preset, since no separate value is published.
    pub fn var_arch_coeff() -> RMat<f64> {
        rows(&[vec![0.5, 0.1], vec![0.2, 0.4]])
    }

    pub fn arch() -> ArchSpec {
        ArchSpec {
            alpha0: 1.0,
            alpha1: 0.5,
        }
    }
}

/// Model file: `ar` (list of row-major matrices), optional `ma` (at most one
/// matrix), `sigma` (row-major; omitted for the ARCH design), optional `arch`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub ar: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ma: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arch: Option<ArchSpec>,
}

/// A validated simulation design.
#[derive(Debug, Clone, PartialEq)]
pub enum SimModel {
    Var(VarModel),
    Varma11(Varma11Model),
    /// Pure moving average `W_t = ε_t + Σ_k Θ_k ε_{t-k}`, as written by a factorization.
    Vma {
        ma: Vec<RMat<f64>>,
        noise_cov: RMat<f64>,
    },
    VarArch {
        a: RMat<f64>,
        arch: ArchSpec,
    },
}

fn matrix(rows: &[Vec<f64>], field: &str) -> Result<RMat<f64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse(format!(
            "field `{field}` must be a non-empty square row-major matrix"
        )));
    }
    from_rows(rows)
}

fn with_field<X>(field: &str, r: Result<X>) -> Result<X> {
    r.map_err(|e| match e {
        Error::NonStationary { .. } => e,
        other => Error::Parse(format!("field `{field}`: {other}")),
    })
}

impl ModelFile {
    pub fn into_model(self) -> Result<SimModel> {
        let ar = self
            .ar
            .iter()
            .enumerate()
            .map(|(k, m)| matrix(m, &format!("ar[{k}]")))
            .collect::<Result<Vec<_>>>()?;
        if let Some(arch) = self.arch {
            if ar.len() != 1 || !self.ma.is_empty() || self.sigma.is_some() {
                return Err(Error::Parse(
                    "field `arch` requires exactly one `ar` matrix and no `ma` or `sigma`".into(),
                ));
            }
            let arch = with_field("arch", ArchSpec::new(arch.alpha0, arch.alpha1))?;
            let a = ar.into_iter().next().expect("one matrix");
            with_field("ar", require_stationary(std::slice::from_ref(&a)))?;
            return Ok(SimModel::VarArch { a, arch });
        }
        let sigma = matrix(
            self.sigma
                .as_deref()
                .ok_or_else(|| Error::Parse("missing field `sigma`".into()))?,
            "sigma",
        )?;
        if ar.is_empty() && !self.ma.is_empty() {
            let ma = self
                .ma
                .iter()
                .enumerate()
                .map(|(k, m)| matrix(m, &format!("ma[{k}]")))
                .collect::<Result<Vec<_>>>()?;
            check_square(&ma.iter().collect::<Vec<_>>(), sigma.nrows(), "MA")?;
            with_field("sigma", noise_factor(&sigma, "noise covariance"))?;
            return Ok(SimModel::Vma { ma, noise_cov: sigma });
        }
        match self.ma.len() {
            0 => Ok(SimModel::Var(with_field("ar", VarModel::new(ar, sigma))?)),
            1 => {
                if ar.len() != 1 {
                    return Err(Error::Parse("a model with `ma` needs exactly one `ar` matrix".into()));
                }
                let ma = matrix(&self.ma[0], "ma[0]")?;
                let ar = ar.into_iter().next().expect("one matrix");
                Ok(SimModel::Varma11(with_field("ma", Varma11Model::new(ar, ma, sigma))?))
            }
            _ => Err(Error::Parse("field `ma` supports a single matrix".into())),
        }
    }

    pub fn from_model(model: &SimModel) -> Self {
        match model {
            SimModel::Var(m) => ModelFile {
                ar: m.coeffs().iter().map(to_rows).collect(),
                ma: Vec::new(),
                sigma: Some(to_rows(m.noise_cov())),
                arch: None,
            },
            SimModel::Varma11(m) => ModelFile {
                ar: vec![to_rows(m.ar())],
                ma: vec![to_rows(m.ma())],
                sigma: Some(to_rows(m.noise_cov())),
                arch: None,
            },
            SimModel::Vma { ma, noise_cov } => ModelFile {
                ar: Vec::new(),
                ma: ma.iter().map(to_rows).collect(),
                sigma: Some(to_rows(noise_cov)),
                arch: None,
            },
            SimModel::VarArch { a, arch } => ModelFile {
                ar: vec![to_rows(a)],
                ma: Vec::new(),
                sigma: None,
                arch: Some(*arch),
            },
        }
    }
}

impl SimModel {
    /// Total number of simulated channels (the ARCH design appends `ζ_1`).
    pub fn dim(&self) -> usize {
        match self {
            SimModel::Var(m) => m.dim(),
            SimModel::Varma11(m) => m.dim(),
            SimModel::Vma { noise_cov, .. } => noise_cov.nrows(),
            SimModel::VarArch { a, .. } => a.nrows() + 1,
        }
    }

    /// One replicate; for the ARCH design the columns are `Q` followed by `ζ_1`.
    pub fn simulate(&self, len: usize, seed: u64, burnin: usize) -> Result<MultiSeries> {
        match self {
            SimModel::Var(m) => simulate_var(m, len, seed, burnin),
            SimModel::Varma11(m) => simulate_varma11(m, len, seed, burnin),
            SimModel::Vma { ma, noise_cov } => simulate_vma(ma, noise_cov, len, seed, burnin),
            SimModel::VarArch { a, arch } => {
                let (q, z) = simulate_var_arch(a, arch, len, seed, burnin)?;
                let values = RMat::from_fn(len, q.dim() + 1, |t, i| {
                    if i < q.dim() {
                        q.values()[(t, i)]
                    } else {
                        z.values()[(t, 0)]
                    }
                });
                let mut names = q.names().to_vec();
                names.extend(z.names().iter().cloned());
                MultiSeries::new(values, names)
            }
        }
    }
}
