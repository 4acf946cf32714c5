//! Local search for smooth objectives with finite-difference gradients.

use crate::error::Result;
use crate::scalar::{lit, Real};

/// Stopping rules shared by local searches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub max_iter: usize,
    /// Stop when `|f_k - f_{k+1}| <= tol * (1 + |f_k|)`.
    pub tol: f64,
    /// Central differences use `h_i = fd_step * (1 + |x_i|)`.
    pub fd_step: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            max_iter: 500,
            tol: 1e-8,
            fd_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalResult<T> {
    pub x: Vec<T>,
    pub value: T,
    pub initial_value: T,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// A local minimizer. Objective errors at trial points are treated as
/// infeasible steps; an error at the starting point is returned.
pub trait LocalSearch<T: Real> {
    fn minimize(&self, f: &mut dyn FnMut(&[T]) -> Result<T>, x0: &[T], opts: &SearchOptions) -> Result<LocalResult<T>>;
}

/// Central-difference gradient with step `h_i = step * (1 + |x_i|)`.
pub fn fd_gradient<T: Real>(
    f: &mut dyn FnMut(&[T]) -> Result<T>,
    x: &[T],
    step: f64,
    evaluations: &mut usize,
) -> Result<Vec<T>> {
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let h = lit::<T>(step) * (T::one() + x[i].abs());
        probe[i] = x[i] + h;
        let up = f(&probe)?;
        probe[i] = x[i] - h;
        let down = f(&probe)?;
        probe[i] = x[i];
        *evaluations += 2;
        grad.push((up - down) / (h + h));
    }
    Ok(grad)
}

/// BFGS with Armijo backtracking on the inverse-Hessian approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bfgs {
    pub armijo: f64,
    pub max_backtracks: usize,
}

impl Default for Bfgs {
    fn default() -> Self {
        Bfgs {
            armijo: 1e-4,
            max_backtracks: 40,
        }
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + *x * *y)
}

impl<T: Real> LocalSearch<T> for Bfgs {
    fn minimize(&self, f: &mut dyn FnMut(&[T]) -> Result<T>, x0: &[T], opts: &SearchOptions) -> Result<LocalResult<T>> {
        let n = x0.len();
        let mut x = x0.to_vec();
        let mut fx = f(&x)?;
        let mut evaluations = 1;
        let initial_value = fx;
        if n == 0 {
            return Ok(LocalResult {
                x,
                value: fx,
                initial_value,
                iterations: 0,
                evaluations,
                converged: true,
            });
        }
        let tol = lit::<T>(opts.tol);
        let eye = |n: usize| -> Vec<Vec<T>> {
            (0..n)
                .map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect())
                .collect()
        };
        let mut h = eye(n);
        let mut fresh = true;
        let mut grad = match fd_gradient(f, &x, opts.fd_step, &mut evaluations) {
            Ok(g) => g,
            Err(_) => {
                return Ok(LocalResult {
                    x,
                    value: fx,
                    initial_value,
                    iterations: 0,
                    evaluations,
                    converged: false,
                })
            }
        };
        let mut converged = false;
        let mut iterations = 0;
        while iterations < opts.max_iter {
            iterations += 1;
            let gnorm = dot(&grad, &grad).sqrt();
            if gnorm <= lit(1e-12) {
                converged = true;
                break;
            }
            let mut d: Vec<T> = h.iter().map(|row| -dot(row, &grad)).collect();
            let mut slope = dot(&grad, &d);
            if !(slope < T::zero()) {
                h = eye(n);
                fresh = true;
                d = grad.iter().map(|g| -*g).collect();
                slope = -gnorm * gnorm;
            }
            if fresh {
                // keep the first trial step within unit length
                let len = dot(&d, &d).sqrt();
                if len > T::one() {
                    d.iter_mut().for_each(|v| *v /= len);
                    slope /= len;
                }
            }
            let mut alpha = T::one();
            let mut accepted = None;
            for _ in 0..=self.max_backtracks {
                let trial: Vec<T> = x.iter().zip(&d).map(|(xi, di)| *xi + alpha * *di).collect();
                evaluations += 1;
                if let Ok(ft) = f(&trial) {
                    if ft <= fx + lit::<T>(self.armijo) * alpha * slope {
                        accepted = Some((trial, ft));
                        break;
                    }
                }
                alpha *= lit(0.5);
            }
            let Some((x_new, f_new)) = accepted else {
                if fresh {
                    break;
                }
                h = eye(n);
                fresh = true;
                continue;
            };
            let change = (fx - f_new).abs();
            let g_new = match fd_gradient(f, &x_new, opts.fd_step, &mut evaluations) {
                Ok(g) => g,
                Err(_) => {
                    x = x_new;
                    fx = f_new;
                    break;
                }
            };
            let s: Vec<T> = x_new.iter().zip(&x).map(|(a, b)| *a - *b).collect();
            let y: Vec<T> = g_new.iter().zip(&grad).map(|(a, b)| *a - *b).collect();
            x = x_new;
            let f_old = fx;
            fx = f_new;
            grad = g_new;
            if change <= tol * (T::one() + f_old.abs()) {
                converged = true;
                break;
            }
            let sy = dot(&s, &y);
            if sy > lit::<T>(1e-14) * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
                if fresh {
                    let scale = sy / dot(&y, &y);
                    h.iter_mut().flatten().for_each(|v| *v *= scale);
                    fresh = false;
                }
                bfgs_update(&mut h, &s, &y, sy);
            }
        }
        Ok(LocalResult {
            x,
            value: fx,
            initial_value,
            iterations,
            evaluations,
            converged,
        })
    }
}

/// `H ← (I - ρ s yᵀ) H (I - ρ y sᵀ) + ρ s sᵀ` with `ρ = 1 / sᵀy`.
fn bfgs_update<T: Real>(h: &mut [Vec<T>], s: &[T], y: &[T], sy: T) {
    let n = s.len();
    let rho = T::one() / sy;
    let hy: Vec<T> = h.iter().map(|row| dot(row, y)).collect();
    let yhy = dot(y, &hy);
    let coef = (T::one() + rho * yhy) * rho;
    for i in 0..n {
        for j in 0..n {
            h[i][j] += coef * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
}
