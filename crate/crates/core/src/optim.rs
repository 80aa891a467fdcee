//! Derivative-free-to-the-caller quasi-Newton ascent: central-difference
//! gradients feeding BFGS inverse-curvature updates with a backtracking
//! line search, plus the finite-difference Hessian used for standard errors.
//!
//! Objectives return `None` for a rejected point (a non-finite likelihood);
//! the line search backs off from such points instead of failing.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimOptions<T> {
    pub max_iter: usize,
    /// Convergence threshold on the gradient ∞-norm.
    pub grad_tol: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimStatus {
    Converged,
    MaxIter,
    Stagnated,
    GradientFailed,
}

impl OptimStatus {
    pub fn is_success(self) -> bool {
        self == OptimStatus::Converged
    }
}

impl fmt::Display for OptimStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            OptimStatus::Converged => "gradient criterion satisfied",
            OptimStatus::MaxIter => "iteration limit reached",
            OptimStatus::Stagnated => "line search stagnated",
            OptimStatus::GradientFailed => "gradient could not be evaluated",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Maximum<T> {
    pub argmax: Vec<T>,
    pub value: T,
    pub status: OptimStatus,
    pub n_iter: usize,
    pub grad_inf_norm: T,
}

fn inf_norm<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

const MAX_SHRINK: usize = 3;

/// Central-difference gradient with step `ε^{1/3} max(1, |θ_j|)`.
///
/// Steps are halved (at most three times) when a perturbed value is rejected.
pub fn numeric_gradient<T, F>(f: &mut F, theta: &[T]) -> Result<Vec<T>>
where
    T: Scalar,
    F: FnMut(&[T]) -> Option<T>,
{
    let base = T::epsilon().cbrt();
    let mut x = theta.to_vec();
    let mut grad = Vec::with_capacity(theta.len());
    for j in 0..theta.len() {
        let mut h = base * theta[j].abs().max(T::one());
        let mut done = None;
        for _ in 0..=MAX_SHRINK {
            let (hp, hm) = (theta[j] + h, theta[j] - h);
            x[j] = hp;
            let fp = f(&x);
            x[j] = hm;
            let fm = f(&x);
            x[j] = theta[j];
            match (fp, fm) {
                (Some(a), Some(b)) if a.is_finite() && b.is_finite() => {
                    done = Some((a - b) / (hp - hm));
                    break;
                }
                _ => h = h * T::lit(0.5),
            }
        }
        match done {
            Some(g) => grad.push(g),
            None => {
                return Err(Error::Domain(format!(
                    "gradient component {j} not finite after {MAX_SHRINK} step reductions"
                )))
            }
        }
    }
    Ok(grad)
}

/// Central-difference Hessian with step `ε^{1/4} max(1, |θ_j|)`, symmetrized.
pub fn numeric_hessian<T, F>(f: &mut F, theta: &[T]) -> Result<Matrix<T>>
where
    T: Scalar,
    F: FnMut(&[T]) -> Option<T>,
{
    let m = theta.len();
    let f0 = f(theta)
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Domain("objective not finite at Hessian centre".into()))?;
    let base = T::epsilon().sqrt().sqrt();
    let mut scale = T::one();
    'attempt: for _ in 0..=MAX_SHRINK {
        let h: Vec<T> = theta
            .iter()
            .map(|t| {
                let hj = base * scale * t.abs().max(T::one());
                (*t + hj) - *t
            })
            .collect();
        let mut x = theta.to_vec();
        let mut eval = |x: &mut Vec<T>, shifts: &[(usize, T)]| -> Option<T> {
            for &(j, d) in shifts {
                x[j] = theta[j] + d;
            }
            let v = f(x);
            for &(j, _) in shifts {
                x[j] = theta[j];
            }
            v.filter(|v| v.is_finite())
        };
        let mut hess = Matrix::zeros(m, m);
        for i in 0..m {
            let (Some(fp), Some(fm)) = (eval(&mut x, &[(i, h[i])]), eval(&mut x, &[(i, -h[i])]))
            else {
                scale = scale * T::lit(0.5);
                continue 'attempt;
            };
            hess[(i, i)] = (fp - f0 - f0 + fm) / (h[i] * h[i]);
            for j in 0..i {
                let vals = [
                    eval(&mut x, &[(i, h[i]), (j, h[j])]),
                    eval(&mut x, &[(i, h[i]), (j, -h[j])]),
                    eval(&mut x, &[(i, -h[i]), (j, h[j])]),
                    eval(&mut x, &[(i, -h[i]), (j, -h[j])]),
                ];
                let [Some(pp), Some(pm), Some(mp), Some(mm)] = vals else {
                    scale = scale * T::lit(0.5);
                    continue 'attempt;
                };
                let v = (pp - pm - mp + mm) / (T::lit(4.0) * h[i] * h[j]);
                hess[(i, j)] = v;
                hess[(j, i)] = v;
            }
        }
        hess.symmetrize();
        return Ok(hess);
    }
    Err(Error::Domain(format!(
        "Hessian not finite after {MAX_SHRINK} step reductions"
    )))
}

/// Quasi-Newton maximization of `f` from `x0`.
///
/// Terminates when the gradient ∞-norm is at most `grad_tol` (success), when
/// the line search cannot improve even from a freshly reset curvature model,
/// or after `max_iter` iterations.
pub fn maximize<T, F>(mut f: F, x0: &[T], opts: &OptimOptions<T>) -> Result<Maximum<T>>
where
    T: Scalar,
    F: FnMut(&[T]) -> Option<T>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x)
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Initialization("objective not finite at the starting point".into()))?;
    // Minimize φ = -f; g is ∇φ.
    let mut neg = |v: &[T]| f(v).filter(|r| r.is_finite()).map(|r| -r);
    let grad = |neg: &mut dyn FnMut(&[T]) -> Option<T>, x: &[T]| {
        numeric_gradient(&mut |v: &[T]| neg(v), x)
    };
    let mut g = match grad(&mut neg, &x) {
        Ok(g) => g,
        Err(_) => {
            return Ok(Maximum {
                argmax: x,
                value: fx,
                status: OptimStatus::GradientFailed,
                n_iter: 0,
                grad_inf_norm: T::infinity(),
            })
        }
    };
    let mut h_inv = Matrix::<T>::identity(n);
    let mut fresh = true;
    let c1 = T::lit(1e-4);
    let mut status = OptimStatus::MaxIter;
    let mut iter = 0;
    while iter < opts.max_iter {
        let gnorm = inf_norm(&g);
        if gnorm <= opts.grad_tol {
            status = OptimStatus::Converged;
            break;
        }
        let mut d: Vec<T> = (0..n).map(|i| -dot(h_inv.row(i), &g)).collect();
        let mut slope = dot(&g, &d);
        if !(slope < T::zero()) || d.iter().any(|v| !v.is_finite()) {
            h_inv = Matrix::identity(n);
            fresh = true;
            d = g.iter().map(|v| -*v).collect();
            slope = dot(&g, &d);
        }
        if fresh {
            // Unit ∞-norm first step along steepest descent.
            let dn = inf_norm(&d);
            if dn > T::one() {
                let s = dn.recip();
                d.iter_mut().for_each(|v| *v = *v * s);
                slope = slope * s;
            }
        }
        let phi = -fx;
        let mut t = T::one();
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<T> = x.iter().zip(&d).map(|(&xi, &di)| xi + t * di).collect();
            if let Some(pt) = neg(&trial) {
                if pt <= phi + c1 * t * slope {
                    accepted = Some((trial, pt));
                    break;
                }
            }
            t = t * T::lit(0.5);
        }
        let Some((x_new, phi_new)) = accepted else {
            if fresh {
                status = OptimStatus::Stagnated;
                break;
            }
            h_inv = Matrix::identity(n);
            fresh = true;
            continue;
        };
        let g_new = match grad(&mut neg, &x_new) {
            Ok(g) => g,
            Err(_) => {
                x = x_new;
                fx = -phi_new;
                status = OptimStatus::GradientFailed;
                iter += 1;
                break;
            }
        };
        let s: Vec<T> = x_new.iter().zip(&x).map(|(a, b)| *a - *b).collect();
        let yv: Vec<T> = g_new.iter().zip(&g).map(|(a, b)| *a - *b).collect();
        let sy = dot(&s, &yv);
        let yy = dot(&yv, &yv);
        let ss = dot(&s, &s);
        if sy > T::lit(1e-12) * (ss * yy).sqrt() && sy > T::zero() {
            if fresh {
                h_inv = Matrix::identity(n).map(|v| v * (sy / yy));
            }
            bfgs_update(&mut h_inv, &s, &yv, sy);
            fresh = false;
        }
        let stalled = phi - phi_new <= T::epsilon() * (T::one() + phi.abs())
            && inf_norm(&s) <= T::epsilon().sqrt() * (T::one() + inf_norm(&x));
        x = x_new;
        fx = -phi_new;
        g = g_new;
        iter += 1;
        if stalled && inf_norm(&g) > opts.grad_tol {
            if fresh {
                status = OptimStatus::Stagnated;
                break;
            }
            h_inv = Matrix::identity(n);
            fresh = true;
        }
    }
    let gnorm = inf_norm(&g);
    if status == OptimStatus::MaxIter && gnorm <= opts.grad_tol {
        status = OptimStatus::Converged;
    }
    Ok(Maximum { argmax: x, value: fx, status, n_iter: iter, grad_inf_norm: gnorm })
}

/// `H ← (I - ρ s yᵀ) H (I - ρ y sᵀ) + ρ s sᵀ` with `ρ = 1/(yᵀs)`.
fn bfgs_update<T: Scalar>(h: &mut Matrix<T>, s: &[T], y: &[T], sy: T) {
    let n = s.len();
    let rho = sy.recip();
    let hy: Vec<T> = (0..n).map(|i| dot(h.row(i), y)).collect();
    let yhy = dot(y, &hy);
    let coef = (T::one() + rho * yhy) * rho;
    for i in 0..n {
        for j in 0..n {
            let v = h[(i, j)] - rho * (hy[i] * s[j] + s[i] * hy[j]) + coef * s[i] * s[j];
            h[(i, j)] = v;
        }
    }
    h.symmetrize();
}
