//! Two-part (TP) and marginalized two-part (MTP) log-likelihoods.
//!
//! Both models share a logit occurrence part, `π_i = expit(z_i'α)`, and a
//! generalized gamma density for positive outcomes. TP puts `x_i'δ` on the
//! location directly; MTP solves for the location that makes the overall
//! mean, zeros included, equal `exp(x_i'β)`:
//!
//! ```text
//! μ_i = x_i'β - ln π_i - C(σ, k)
//! ```

use crate::error::{Error, Result};
use crate::ggdist::{c_offset, Family, LogDensity, Shape, K_EPS};
use crate::linalg::{dot, Matrix};
use crate::scalar::Scalar;

/// Outcome vector with the design matrices of both parts. Rows align.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    y: Vec<T>,
    /// `ln y` for positive rows, zero elsewhere.
    ln_y: Vec<T>,
    x: Matrix<T>,
    z: Matrix<T>,
}

impl<T: Scalar> Dataset<T> {
    /// `x` is the continuous-part design, `z` the binary-part design; both are
    /// expected to carry a leading intercept column.
    pub fn new(y: Vec<T>, x: Matrix<T>, z: Matrix<T>) -> Result<Self> {
        if x.nrows() != y.len() || z.nrows() != y.len() {
            return Err(Error::Dimension(format!(
                "outcome has {} rows, X has {}, Z has {}",
                y.len(),
                x.nrows(),
                z.nrows()
            )));
        }
        if let Some((i, v)) = y.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < T::zero())
        {
            return Err(Error::Data(format!("outcome row {i} is {v}; need finite y >= 0")));
        }
        if !x.is_finite() || !z.is_finite() {
            return Err(Error::Data("design matrices contain non-finite entries".into()));
        }
        let ln_y = log_outcomes(&y);
        Ok(Self { y, ln_y, x, z })
    }

    pub fn y(&self) -> &[T] {
        &self.y
    }

    pub fn x(&self) -> &Matrix<T> {
        &self.x
    }

    pub fn z(&self) -> &Matrix<T> {
        &self.z
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn n_zero(&self) -> usize {
        self.y.iter().filter(|v| **v == T::zero()).count()
    }

    /// A two-part fit needs both zero and positive outcomes.
    pub fn check_two_part(&self) -> Result<()> {
        let zeros = self.n_zero();
        if zeros == self.len() {
            return Err(Error::Structural(
                "all outcomes are zero; the positive (continuous) part is not identified".into(),
            ));
        }
        if zeros == 0 {
            return Err(Error::Structural(
                "no zero outcomes; the binary (occurrence) part is not identified".into(),
            ));
        }
        Ok(())
    }

    /// Rows satisfying `keep`, in their original order.
    pub fn subset(&self, mut keep: impl FnMut(usize) -> bool) -> Self {
        let mask: Vec<bool> = (0..self.len()).map(&mut keep).collect();
        let y: Vec<T> = self.y.iter().zip(&mask).filter(|(_, m)| **m).map(|(v, _)| *v).collect();
        Self {
            ln_y: log_outcomes(&y),
            y,
            x: self.x.select_rows(|i| mask[i]),
            z: self.z.select_rows(|i| mask[i]),
        }
    }

    /// Same covariates, outcome multiplied by `c`.
    pub fn scaled(&self, c: T) -> Self {
        let y: Vec<T> = self.y.iter().map(|&v| v * c).collect();
        Self { ln_y: log_outcomes(&y), y, x: self.x.clone(), z: self.z.clone() }
    }
}

fn log_outcomes<T: Scalar>(y: &[T]) -> Vec<T> {
    y.iter().map(|&v| if v > T::zero() { v.ln() } else { T::zero() }).collect()
}

/// Marginalized two-part parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MtpParams<T> {
    pub alpha: Vec<T>,
    pub beta: Vec<T>,
    pub sigma: T,
    /// Ignored for `LogNormal`, forced to `sigma` for `Gamma` and to 1 for `Weibull`.
    pub k: T,
    pub family: Family,
}

/// Conventional two-part parameters with conditional coefficients `delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct TpParams<T> {
    pub alpha: Vec<T>,
    pub delta: Vec<T>,
    pub sigma: T,
    pub k: T,
    pub family: Family,
}

/// `(σ, k)` after applying the family constraint.
pub fn constrained_aux<T: Scalar>(family: Family, sigma: T, k: T) -> (T, T) {
    match family {
        Family::Gg => (sigma, k),
        Family::Gamma => (sigma, sigma),
        Family::Weibull => (sigma, T::one()),
        Family::LogNormal => (sigma, T::zero()),
    }
}

impl<T: Scalar> MtpParams<T> {
    pub fn new(alpha: Vec<T>, beta: Vec<T>, sigma: T, k: T, family: Family) -> Self {
        let (sigma, k) = constrained_aux(family, sigma, k);
        Self { alpha, beta, sigma, k, family }
    }
}

impl<T: Scalar> TpParams<T> {
    pub fn new(alpha: Vec<T>, delta: Vec<T>, sigma: T, k: T, family: Family) -> Self {
        let (sigma, k) = constrained_aux(family, sigma, k);
        Self { alpha, delta, sigma, k, family }
    }
}

/// Inverse logit, computed without overflow and clamped to the open unit
/// interval so that `0 < expit(t) < 1` holds in floating point.
pub fn expit<T: Scalar>(t: T) -> T {
    let p = if t >= T::zero() {
        (T::one() + (-t).exp()).recip()
    } else {
        let e = t.exp();
        e / (T::one() + e)
    };
    let hi = T::one() - T::epsilon() * T::lit(0.5);
    p.max(T::min_positive_value()).min(hi)
}

/// `ln(1 + e^t)` without overflow.
#[inline]
pub(crate) fn softplus<T: Scalar>(t: T) -> T {
    t.max(T::zero()) + (-t.abs()).exp().ln_1p()
}

/// MTP location `μ = xb - ln π - C`.
pub fn mtp_location<T: Scalar>(xb: T, pi: T, c: T) -> Result<T> {
    if !(pi > T::zero()) || pi > T::one() {
        return Err(Error::Domain(format!("probability must lie in (0, 1], got {pi}")));
    }
    Ok(xb - pi.ln() - c)
}

/// Per-evaluation constants for one `(family, σ, k)`.
pub(crate) struct PositivePart<T> {
    density: LogDensity<T>,
    offset: T,
}

impl<T: Scalar> PositivePart<T> {
    pub(crate) fn new(family: Family, sigma: T, k: T) -> Result<Self> {
        let (sigma, k) = constrained_aux(family, sigma, k);
        if !sigma.is_finite() || sigma <= T::zero() {
            return Err(Error::Domain(format!("scale must be positive, got {sigma}")));
        }
        let shape = match family {
            Family::LogNormal => Shape::LogNormalLimit,
            _ => {
                if !k.is_finite() || k.abs() < T::lit(K_EPS) {
                    return Err(Error::Domain(format!("shape k={k} below K_EPS")));
                }
                Shape::Power(k)
            }
        };
        Ok(Self { density: LogDensity::new(shape, sigma), offset: c_offset(sigma, k, family)? })
    }
}

fn check_dims<T: Scalar>(d: &Dataset<T>, n_alpha: usize, n_loc: usize) -> Result<()> {
    if d.z.ncols() != n_alpha {
        return Err(Error::Dimension(format!(
            "alpha has {n_alpha} entries, Z has {} columns",
            d.z.ncols()
        )));
    }
    if d.x.ncols() != n_loc {
        return Err(Error::Dimension(format!(
            "location coefficients have {n_loc} entries, X has {} columns",
            d.x.ncols()
        )));
    }
    Ok(())
}

fn non_finite<T: Scalar>(row: usize, v: T) -> Error {
    Error::Domain(format!("non-finite log-likelihood term {v} at row {row}"))
}

/// Sums zero-row and positive-row contributions separately.
fn two_part_sums<T: Scalar>(
    d: &Dataset<T>,
    alpha: &[T],
    part: &PositivePart<T>,
    location: impl Fn(&[T], T) -> T,
) -> Result<(T, T)> {
    let mut zero_sum = T::zero();
    let mut pos_sum = T::zero();
    for (i, &y) in d.y.iter().enumerate() {
        let eta = dot(d.z.row(i), alpha);
        if y == T::zero() {
            // ln(1 - π) = -ln(1 + e^η)
            let term = -softplus(eta);
            if !term.is_finite() {
                return Err(non_finite(i, term));
            }
            zero_sum = zero_sum + term;
        } else {
            // ln π = -ln(1 + e^-η)
            let ln_pi = -softplus(-eta);
            let mu = location(d.x.row(i), ln_pi);
            let term = ln_pi + part.density.eval(d.ln_y[i], mu);
            if !term.is_finite() {
                return Err(non_finite(i, term));
            }
            pos_sum = pos_sum + term;
        }
    }
    Ok((zero_sum, pos_sum))
}

/// MTP log-likelihood split into the zero-row and positive-row sums.
pub fn mtp_loglik_parts<T: Scalar>(d: &Dataset<T>, p: &MtpParams<T>) -> Result<(T, T)> {
    mtp_parts_raw(d, &p.alpha, &p.beta, p.family, p.sigma, p.k)
}

pub(crate) fn mtp_parts_raw<T: Scalar>(
    d: &Dataset<T>,
    alpha: &[T],
    beta: &[T],
    family: Family,
    sigma: T,
    k: T,
) -> Result<(T, T)> {
    check_dims(d, alpha.len(), beta.len())?;
    if alpha.iter().chain(beta).any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite coefficient".into()));
    }
    let part = PositivePart::new(family, sigma, k)?;
    let c = part.offset;
    two_part_sums(d, alpha, &part, |x, ln_pi| dot(x, beta) - ln_pi - c)
}

pub(crate) fn tp_parts_raw<T: Scalar>(
    d: &Dataset<T>,
    alpha: &[T],
    delta: &[T],
    family: Family,
    sigma: T,
    k: T,
) -> Result<(T, T)> {
    check_dims(d, alpha.len(), delta.len())?;
    if alpha.iter().chain(delta).any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite coefficient".into()));
    }
    let part = PositivePart::new(family, sigma, k)?;
    two_part_sums(d, alpha, &part, |x, _| dot(x, delta))
}

/// MTP log-likelihood. Any non-finite contribution is reported as an error
/// rather than propagated as NaN.
pub fn mtp_loglik<T: Scalar>(d: &Dataset<T>, p: &MtpParams<T>) -> Result<T> {
    mtp_loglik_parts(d, p).map(|(a, b)| a + b)
}

pub fn tp_loglik_parts<T: Scalar>(d: &Dataset<T>, p: &TpParams<T>) -> Result<(T, T)> {
    tp_parts_raw(d, &p.alpha, &p.delta, p.family, p.sigma, p.k)
}

/// TP log-likelihood with location `x_i'δ`.
pub fn tp_loglik<T: Scalar>(d: &Dataset<T>, p: &TpParams<T>) -> Result<T> {
    tp_loglik_parts(d, p).map(|(a, b)| a + b)
}

/// Overall mean implied by a TP model: `expit(z'α) exp(x'δ + C)`.
pub fn tp_marginal_mean<T: Scalar>(x: &[T], z: &[T], p: &TpParams<T>) -> Result<T> {
    let (sigma, k) = constrained_aux(p.family, p.sigma, p.k);
    let c = c_offset(sigma, k, p.family)?;
    Ok(expit(dot(z, &p.alpha)) * (dot(x, &p.delta) + c).exp())
}

/// Overall mean under an MTP model: `exp(x'β)`.
pub fn mtp_marginal_mean<T: Scalar>(x: &[T], beta: &[T]) -> T {
    dot(x, beta).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hand() -> Dataset<f64> {
        let g = [1.0, 0.0, 1.0, 1.0, 0.0];
        let design = Matrix::from_fn(5, 2, |i, j| if j == 0 { 1.0 } else { g[i] });
        Dataset::new(vec![0.0, 1.0, 2.0, 0.0, 0.5], design.clone(), design).unwrap()
    }

    #[test]
    fn expit_values() {
        assert_eq!(expit(0.0f64), 0.5);
        assert!((expit(3f64.ln()) - 0.75).abs() < 1e-15);
        let hi = expit(800.0f64);
        assert!(hi < 1.0 && hi > 1.0 - 1e-15);
        let lo = expit(-800.0f64);
        assert!(lo > 0.0 && lo < 1e-300);
        assert!(expit(-700.0f64) > 0.0);
    }

    #[test]
    fn location() {
        assert_eq!(mtp_location(2.0, 1.0, 0.0).unwrap(), 2.0);
        assert!((mtp_location(6.3, 0.5, 0.0).unwrap() - (6.3 + 2f64.ln())).abs() < 1e-15);
        assert!(mtp_location(1.0, 0.0, 0.0).is_err());
        assert!(mtp_location(1.0, 1.5, 0.0).is_err());
    }

    #[test]
    fn gamma_marginal_identity() {
        for &(xb, pi) in &[(0.3, 0.2), (6.3, 0.9), (-2.0, 0.55)] {
            let mu: f64 = mtp_location(xb, pi, 0.0).unwrap();
            assert!((mu.exp() * pi - xb.exp()).abs() < 1e-12 * xb.exp());
        }
    }

    #[test]
    fn single_zero_row() {
        let d = Dataset::new(
            vec![0.0],
            Matrix::from_rows(&[vec![1.0]]).unwrap(),
            Matrix::from_rows(&[vec![1.0]]).unwrap(),
        )
        .unwrap();
        let p = MtpParams::new(vec![0.0], vec![0.3], 1.0, 1.0, Family::Gg);
        assert!((mtp_loglik(&d, &p).unwrap() - 0.5f64.ln()).abs() < 1e-15);
        let t = TpParams::new(vec![0.0], vec![0.3], 1.0, 1.0, Family::Gg);
        assert!((tp_loglik(&d, &t).unwrap() - 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn hand_dataset_matches_high_precision_oracle() {
        // tests/oracle/eq_oracles.py
        let d = hand();
        let a = vec![0.2, -0.1];
        let b = vec![0.4, 0.3];
        let cases = [
            (1.0, 1.0, -7.744_383_142_003_134_075_1, -6.828_118_395_620_174_344_4),
            (0.8, 0.5, -7.642_532_044_098_422_397_6, -6.347_291_722_075_676_922_7),
        ];
        for (sigma, k, mtp, tp) in cases {
            let pm = MtpParams::new(a.clone(), b.clone(), sigma, k, Family::Gg);
            let pt = TpParams::new(a.clone(), b.clone(), sigma, k, Family::Gg);
            assert!((mtp_loglik(&d, &pm).unwrap() - mtp).abs() < 1e-12);
            assert!((tp_loglik(&d, &pt).unwrap() - tp).abs() < 1e-12);
        }
    }

    #[test]
    fn dataset_validation() {
        let x = Matrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap();
        assert!(Dataset::new(vec![0.0, -1.0], x.clone(), x.clone()).is_err());
        assert!(Dataset::new(vec![0.0, f64::NAN], x.clone(), x.clone()).is_err());
        assert!(Dataset::new(vec![0.0], x.clone(), x.clone()).is_err());
        let all_zero = Dataset::new(vec![0.0, 0.0], x.clone(), x.clone()).unwrap();
        assert!(matches!(all_zero.check_two_part(), Err(Error::Structural(_))));
        let all_pos = Dataset::new(vec![1.0, 2.0], x.clone(), x).unwrap();
        assert!(matches!(all_pos.check_two_part(), Err(Error::Structural(_))));
    }

    #[test]
    fn bad_parameters_are_errors_not_nan() {
        let d = hand();
        let p = MtpParams::new(vec![0.2, -0.1], vec![0.4, 0.3], -1.0, 1.0, Family::Gg);
        assert!(mtp_loglik(&d, &p).is_err());
        let p = MtpParams::new(vec![0.2, f64::NAN], vec![0.4, 0.3], 1.0, 1.0, Family::Gg);
        assert!(mtp_loglik(&d, &p).is_err());
        // Γ pole in the offset
        let p = MtpParams::new(vec![0.2, -0.1], vec![0.4, 0.3], 2.0, -1.0, Family::Gg);
        assert!(mtp_loglik(&d, &p).is_err());
        // exp overflow in the kernel
        let p = MtpParams::new(vec![0.2, -0.1], vec![-800.0, 0.3], 0.01, 3.0, Family::Gg);
        assert!(mtp_loglik(&d, &p).is_err());
        let p = MtpParams::new(vec![0.2], vec![0.4, 0.3], 1.0, 1.0, Family::Gg);
        assert!(matches!(mtp_loglik(&d, &p), Err(Error::Dimension(_))));
    }

    #[test]
    fn marginal_means() {
        let p = TpParams::new(vec![0.0f64], vec![0.0], 1.0, 1.0, Family::Weibull);
        assert!((tp_marginal_mean(&[1.0], &[1.0], &p).unwrap() - 0.5).abs() < 1e-15);
        let g = TpParams::new(vec![0.0f64], vec![0.0], 0.7, 0.0, Family::Gamma);
        assert!((tp_marginal_mean(&[1.0], &[1.0], &g).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(mtp_marginal_mean(&[1.0, 0.0], &[0.0, 2.0]), 1.0);
        let b = [0.4, -1.5];
        let ratio = mtp_marginal_mean(&[1.0, 1.0], &b) / mtp_marginal_mean(&[1.0, 0.0], &b);
        assert!((ratio - (-1.5f64).exp()).abs() < 1e-15);
    }
}
