use super::MultiSeries;
use crate::error::{Error, Result};
use crate::linalg::RMat;
use crate::scalar::Real;

/// Two-sided real matrix filter `Ψ_{-M}..Ψ_M`.
#[derive(Debug, Clone, PartialEq)]
pub struct MapFilter<T: Real = f64> {
    coeffs: Vec<RMat<T>>,
    halfwidth: usize,
    tail_norm: T,
}

impl<T: Real> MapFilter<T> {
    /// `coeffs[k + M]` holds `Ψ_k`; the length must be odd.
    pub fn new(coeffs: Vec<RMat<T>>, tail_norm: T) -> Result<Self> {
        if coeffs.len().is_multiple_of(2) {
            return Err(Error::Shape(format!(
                "expected 2M+1 coefficients, got {}",
                coeffs.len()
            )));
        }
        let n = coeffs[0].nrows();
        if coeffs.iter().any(|c| c.nrows() != n || c.ncols() != n) {
            return Err(Error::Shape(
                "filter coefficients must be equal-size square matrices".into(),
            ));
        }
        if coeffs.iter().any(|c| c.iter().any(|v| !v.is_finite())) || !tail_norm.is_finite() {
            return Err(Error::InvalidArgument("non-finite filter coefficient".into()));
        }
        let halfwidth = coeffs.len() / 2;
        Ok(MapFilter {
            coeffs,
            halfwidth,
            tail_norm,
        })
    }

    pub fn identity(n: usize) -> Self {
        MapFilter {
            coeffs: vec![RMat::identity(n, n)],
            halfwidth: 0,
            tail_norm: T::zero(),
        }
    }

    pub fn halfwidth(&self) -> usize {
        self.halfwidth
    }

    pub fn dim(&self) -> usize {
        self.coeffs[0].nrows()
    }

    /// Frobenius norm of the largest dropped coefficient.
    pub fn tail_norm(&self) -> T {
        self.tail_norm
    }

    /// `Ψ_k` for `|k| <= M`.
    pub fn coeff(&self, k: isize) -> &RMat<T> {
        &self.coeffs[(k + self.halfwidth as isize) as usize]
    }

    pub fn coeffs(&self) -> &[RMat<T>] {
        &self.coeffs
    }
}

/// `y_t = Σ_{k=-M}^{M} Ψ_k x_{t-k}` on the central `len - 2M` points of a padded series.
pub fn apply_filter<T: Real>(x_ext: &MultiSeries<T>, f: &MapFilter<T>) -> Result<MultiSeries<T>> {
    let m = f.halfwidth();
    if x_ext.dim() != f.dim() {
        return Err(Error::Shape(format!(
            "filter of dimension {} applied to a series of dimension {}",
            f.dim(),
            x_ext.dim()
        )));
    }
    if x_ext.len() < 2 * m + 1 {
        return Err(Error::InvalidLength(format!(
            "padded series of length {} is too short for a filter of half-width {m}",
            x_ext.len()
        )));
    }
    let out_len = x_ext.len() - 2 * m;
    let xt = x_ext.values().transpose();
    let mut yt = RMat::zeros(f.dim(), out_len);
    for (idx, psi) in f.coeffs().iter().enumerate() {
        // lag k = idx - m; output t reads input (t + m) - k = t + 2m - idx
        let start = 2 * m - idx;
        yt.gemm(T::one(), psi, &xt.columns(start, out_len), T::one());
    }
    x_ext.with_values(yt.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn padded(len: usize, n: usize, seed: u64) -> MultiSeries {
        let data: Vec<f64> = (0..len * n)
            .map(|i| (((i as u64).wrapping_mul(2654435761) ^ seed) % 1000) as f64 / 100.0 - 5.0)
            .collect();
        MultiSeries::from_values(RMat::from_row_slice(len, n, &data)).unwrap()
    }

    fn naive(x: &MultiSeries, f: &MapFilter) -> RMat<f64> {
        let m = f.halfwidth() as isize;
        let out_len = x.len() - 2 * f.halfwidth();
        let n = x.dim();
        let mut y = RMat::zeros(out_len, n);
        for t in 0..out_len {
            let te = t as isize + m;
            for k in -m..=m {
                let psi = f.coeff(k);
                for i in 0..n {
                    for j in 0..n {
                        y[(t, i)] += psi[(i, j)] * x.values()[((te - k) as usize, j)];
                    }
                }
            }
        }
        y
    }

    #[test]
    fn identity_filter_is_noop() {
        let x = padded(10, 2, 1);
        let y = apply_filter(&x, &MapFilter::identity(2)).unwrap();
        assert_eq!(y, x);
    }

    #[test]
    fn unit_lag_filter_shifts() {
        let coeffs = vec![RMat::zeros(2, 2), RMat::zeros(2, 2), RMat::identity(2, 2)];
        let f = MapFilter::new(coeffs, 0.0).unwrap();
        let x = padded(12, 2, 3);
        let y = apply_filter(&x, &f).unwrap();
        assert_eq!(y.len(), 10);
        for t in 0..10 {
            // output t sits at padded index t + 1 and reads x_{t+1-1}
            assert_eq!(y.row(t), x.row(t));
        }
    }

    #[test]
    fn insufficient_padding_is_an_error() {
        let f = MapFilter::new(vec![RMat::identity(1, 1); 7], 0.0).unwrap();
        let x = padded(6, 1, 0);
        assert!(matches!(apply_filter(&x, &f), Err(Error::InvalidLength(_))));
    }

    #[test]
    fn matches_direct_convolution() {
        let m = 4;
        let coeffs: Vec<RMat<f64>> = (0..2 * m + 1)
            .map(|k| RMat::from_fn(3, 3, |i, j| ((k * 7 + i * 3 + j) % 11) as f64 / 7.0 - 0.6))
            .collect();
        let f = MapFilter::new(coeffs, 0.0).unwrap();
        let x = padded(40, 3, 9);
        let y = apply_filter(&x, &f).unwrap();
        let oracle = naive(&x, &f);
        assert!((y.values() - &oracle).abs().max() < 1e-12);
    }

    proptest! {
        #[test]
        fn filtering_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, seed in 0u64..500) {
            let coeffs: Vec<RMat<f64>> = (0..5)
                .map(|k| RMat::from_fn(2, 2, |i, j| ((seed as usize + k * 5 + i * 2 + j) % 9) as f64 / 4.0 - 1.0))
                .collect();
            let f = MapFilter::new(coeffs, 0.0).unwrap();
            let x = padded(20, 2, seed);
            let z = padded(20, 2, seed + 17);
            let combo = x.with_values(x.values() * a + z.values() * b).unwrap();
            let lhs = apply_filter(&combo, &f).unwrap();
            let rhs = apply_filter(&x, &f).unwrap().values() * a + apply_filter(&z, &f).unwrap().values() * b;
            prop_assert!((lhs.values() - rhs).abs().max() < 1e-12);
        }
    }
}
