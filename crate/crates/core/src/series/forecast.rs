use nalgebra::DVector;

use super::{AcvfSeq, MultiSeries};
use crate::error::Result;
use crate::linalg::{symmetric_part, RMat};
use crate::scalar::Real;

/// A series padded with backcasts and forecasts.
#[derive(Debug, Clone)]
pub struct Extension<T: Real = f64> {
    pub series: MultiSeries<T>,
    /// Set when the predictor system was singular and the padding fell back to the mean (zero).
    pub fallback: bool,
}

/// Yule-Walker VAR(p) coefficients `A_1..A_p` from `Γ(0..p)`.
///
/// Returns `None` when the block Toeplitz system is not positive definite.
pub fn yule_walker<T: Real>(acvf: &AcvfSeq<T>, p: usize) -> Option<Vec<RMat<T>>> {
    let n = acvf.dim();
    if p == 0 {
        return Some(Vec::new());
    }
    if p > acvf.maxlag() {
        return None;
    }
    // G block (i, h) = Γ(h - i); [Γ(1) .. Γ(p)] = [A_1 .. A_p] G
    let mut g = RMat::zeros(n * p, n * p);
    for i in 0..p {
        for h in 0..p {
            let lag = h as isize - i as isize;
            g.view_mut((i * n, h * n), (n, n)).copy_from(&acvf.at(lag));
        }
    }
    let mut rhs = RMat::zeros(n, n * p);
    for h in 0..p {
        rhs.view_mut((0, h * n), (n, n)).copy_from(acvf.gamma(h + 1));
    }
    let chol = symmetric_part(&g).cholesky()?;
    // G symmetric, so A' = G^{-1} R'
    let coeffs_t = chol.solve(&rhs.transpose());
    if coeffs_t.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let coeffs = coeffs_t.transpose();
    Some((0..p).map(|i| coeffs.view((0, i * n), (n, n)).into_owned()).collect())
}

/// Pads `x` with `m` backcasts and `m` forecasts using a Yule-Walker VAR of
/// order `min(10, L/2)` fitted to `acvf`.
pub fn forecast_extend<T: Real>(x: &MultiSeries<T>, acvf: &AcvfSeq<T>, m: usize) -> Result<Extension<T>> {
    let order = (acvf.maxlag() / 2).min(10);
    forecast_extend_with_order(x, acvf, m, order)
}

/// As [`forecast_extend`] with an explicit predictor order.
///
/// The process is taken to be mean zero. Backcasts come from the time-reversed
/// process, whose autocovariances are the transposes `Γ(h)'`.
pub fn forecast_extend_with_order<T: Real>(
    x: &MultiSeries<T>,
    acvf: &AcvfSeq<T>,
    m: usize,
    order: usize,
) -> Result<Extension<T>> {
    let n = x.dim();
    let len = x.len();
    if acvf.dim() != n {
        return Err(crate::Error::Shape(format!(
            "autocovariances of dimension {} for a series of dimension {n}",
            acvf.dim()
        )));
    }
    let forward = yule_walker(acvf, order);
    let backward = yule_walker(&acvf.reversed(), order);
    let (forward, backward, fallback) = match (forward, backward) {
        (Some(f), Some(b)) => (f, b, false),
        _ => {
            log::warn!("singular forecast system of order {order}; padding with the mean");
            (Vec::new(), Vec::new(), true)
        }
    };

    let rows: Vec<DVector<T>> = (0..len).map(|t| x.row(t)).collect();
    let ahead = predict(&rows, &forward, m, n);
    let reversed: Vec<DVector<T>> = rows.iter().rev().cloned().collect();
    let behind = predict(&reversed, &backward, m, n);

    let mut out = RMat::zeros(len + 2 * m, n);
    for (i, v) in behind.iter().enumerate() {
        out.set_row(m - 1 - i, &v.transpose());
    }
    out.rows_mut(m, len).copy_from(x.values());
    for (i, v) in ahead.iter().enumerate() {
        out.set_row(m + len + i, &v.transpose());
    }
    Ok(Extension {
        series: x.with_values(out)?,
        fallback,
    })
}

/// Iterated `h`-step predictions, `h = 1..=steps`.
fn predict<T: Real>(history: &[DVector<T>], coeffs: &[RMat<T>], steps: usize, n: usize) -> Vec<DVector<T>> {
    let mut path: Vec<DVector<T>> = history.to_vec();
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let mut next = DVector::zeros(n);
        for (i, a) in coeffs.iter().enumerate() {
            if let Some(prev) = path.len().checked_sub(i + 1).map(|idx| &path[idx]) {
                next += a * prev;
            }
        }
        out.push(next.clone());
        path.push(next);
    }
    out
}
