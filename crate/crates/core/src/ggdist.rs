//! Generalized gamma density in the (k, μ, σ) log-location parameterization,
//! its moments, the family reductions and an exact sampler.
//!
//! With `η = |k|^-2` and `u = sign(k)(ln y - μ)/σ` the log-density is
//!
//! ```text
//! ln f(y) = (η - 1/2) ln η - ln Γ(η) - ln σ - ln y + u √η - η exp(|k| u)
//! ```
//!
//! Gamma is the `σ = k` slice, Weibull the `k = 1` slice, and the lognormal
//! density is the `k -> 0` limit. Everything is evaluated in log space.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::special::{exp_m1_minus_x, ln_gamma, ln_gamma_ratio, stirling_remainder, STIRLING_MIN};

/// Smallest admissible `|k|` for the power-shape path. Below it the lognormal
/// limit is used instead.
pub const K_EPS: f64 = 1e-5;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Member of the generalized gamma family used for the positive part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gg,
    Gamma,
    Weibull,
    #[serde(rename = "lognormal")]
    LogNormal,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Gg, Family::Gamma, Family::Weibull, Family::LogNormal];

    /// Number of free auxiliary (shape/scale) parameters.
    pub fn n_aux(self) -> usize {
        match self {
            Family::Gg => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Gg => "gg",
            Family::Gamma => "gamma",
            Family::Weibull => "weibull",
            Family::LogNormal => "lognormal",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gg" | "generalized-gamma" => Ok(Family::Gg),
            "gamma" | "g" => Ok(Family::Gamma),
            "weibull" | "w" => Ok(Family::Weibull),
            "lognormal" | "ln" | "log-normal" => Ok(Family::LogNormal),
            other => Err(Error::Domain(format!("unknown family '{other}'"))),
        }
    }
}

/// Shape of a generalized gamma law: a power shape `k` with `|k| >= K_EPS`,
/// or the lognormal limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape<T> {
    Power(T),
    LogNormalLimit,
}

/// Parameters of a generalized gamma density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GgParams<T> {
    shape: Shape<T>,
    mu: T,
    sigma: T,
}

fn check_loc_scale<T: Scalar>(mu: T, sigma: T) -> Result<()> {
    if !mu.is_finite() || !sigma.is_finite() {
        return Err(Error::Domain(format!("non-finite location/scale ({mu}, {sigma})")));
    }
    if sigma <= T::zero() {
        return Err(Error::Domain(format!("scale must be positive, got {sigma}")));
    }
    Ok(())
}

impl<T: Scalar> GgParams<T> {
    /// Power-shape parameters. Rejects `|k| < K_EPS`; use [`GgParams::lognormal`]
    /// for the limit.
    pub fn new(k: T, mu: T, sigma: T) -> Result<Self> {
        check_loc_scale(mu, sigma)?;
        if !k.is_finite() || k.abs() < T::lit(K_EPS) {
            return Err(Error::Domain(format!(
                "shape k={k} must be finite with |k| >= {K_EPS}"
            )));
        }
        Ok(Self { shape: Shape::Power(k), mu, sigma })
    }

    /// Lognormal limit with log-mean `mu` and log-sd `sigma`.
    pub fn lognormal(mu: T, sigma: T) -> Result<Self> {
        check_loc_scale(mu, sigma)?;
        Ok(Self { shape: Shape::LogNormalLimit, mu, sigma })
    }

    pub fn shape(&self) -> Shape<T> {
        self.shape
    }

    /// Power shape `k`, or `None` on the lognormal path.
    pub fn k(&self) -> Option<T> {
        match self.shape {
            Shape::Power(k) => Some(k),
            Shape::LogNormalLimit => None,
        }
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn with_mu(mut self, mu: T) -> Self {
        self.mu = mu;
        self
    }
}

/// Location-free part of the log-density, precomputed for a fixed `(k, σ)` so
/// that per-observation evaluation costs one `exp`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LogDensity<T> {
    kind: Kernel<T>,
    inv_sigma: T,
    norm: T,
}

#[derive(Debug, Clone, Copy)]
enum Kernel<T> {
    /// Moderate |k|: literal form.
    Direct { eta: T, sqrt_eta: T, abs_k: T, sign_k: T },
    /// Small |k| (large η): Stirling-reduced form `-(e^t - 1 - t)/k²`,
    /// `t = k (ln y - μ)/σ`, which tends to the lognormal kernel.
    Stirling { k: T, inv_k2: T },
    LogNormal,
}

impl<T: Scalar> LogDensity<T> {
    pub(crate) fn new(shape: Shape<T>, sigma: T) -> Self {
        let ln_sigma = sigma.ln();
        let (kind, norm) = match shape {
            Shape::LogNormalLimit => (Kernel::LogNormal, -T::lit(HALF_LN_2PI) - ln_sigma),
            Shape::Power(k) => {
                let k2 = k * k;
                let eta = k2.recip();
                if eta >= T::lit(STIRLING_MIN) {
                    let norm = -T::lit(HALF_LN_2PI) - stirling_remainder(eta) - ln_sigma;
                    (Kernel::Stirling { k, inv_k2: eta }, norm)
                } else {
                    let half = T::lit(0.5);
                    let norm = (eta - half) * eta.ln() - ln_gamma(eta) - ln_sigma;
                    let sign_k = if k > T::zero() { T::one() } else { -T::one() };
                    (Kernel::Direct { eta, sqrt_eta: eta.sqrt(), abs_k: k.abs(), sign_k }, norm)
                }
            }
        };
        Self { kind, inv_sigma: sigma.recip(), norm }
    }

    /// `ln f(y)` given `ln y` and location `mu`.
    #[inline]
    pub(crate) fn eval(&self, ln_y: T, mu: T) -> T {
        let z = (ln_y - mu) * self.inv_sigma;
        let kernel = match self.kind {
            Kernel::Direct { eta, sqrt_eta, abs_k, sign_k } => {
                let u = sign_k * z;
                u * sqrt_eta - eta * (abs_k * u).exp()
            }
            Kernel::Stirling { k, inv_k2 } => -exp_m1_minus_x(k * z) * inv_k2,
            Kernel::LogNormal => -T::lit(0.5) * z * z,
        };
        self.norm - ln_y + kernel
    }
}

/// Log-density of the generalized gamma law at `y > 0`.
pub fn log_pdf<T: Scalar>(y: T, p: &GgParams<T>) -> Result<T> {
    if !y.is_finite() {
        return Err(Error::Domain(format!("non-finite outcome {y}")));
    }
    if y <= T::zero() {
        return Err(Error::Domain(format!("log_pdf requires y > 0, got {y}")));
    }
    Ok(LogDensity::new(p.shape, p.sigma).eval(y.ln(), p.mu))
}

/// Offset `C(σ, k)` with `E[Y] = exp(μ + C)` for the given family.
///
/// For `Gamma` the offset is zero, for `Weibull` it is `ln Γ(1 + σ)`, for
/// `LogNormal` it is `σ²/2`, and for `Gg` it is
/// `σ ln(k²)/k + ln Γ(1/k² + σ/k) - ln Γ(1/k²)`.
pub fn c_offset<T: Scalar>(sigma: T, k: T, family: Family) -> Result<T> {
    if !sigma.is_finite() || sigma <= T::zero() {
        return Err(Error::Domain(format!("scale must be positive, got {sigma}")));
    }
    match family {
        Family::Gamma => Ok(T::zero()),
        Family::Weibull => Ok(ln_gamma(T::one() + sigma)),
        Family::LogNormal => Ok(sigma * sigma * T::lit(0.5)),
        Family::Gg => gg_offset(sigma, k),
    }
}

fn gg_offset<T: Scalar>(sigma: T, k: T) -> Result<T> {
    if !k.is_finite() || k.abs() < T::lit(K_EPS) {
        return Err(Error::Domain(format!("shape k={k} must satisfy |k| >= {K_EPS}")));
    }
    // Exact slices collapse to the subfamily closed forms.
    if k == sigma {
        return Ok(T::zero());
    }
    if k == T::one() {
        return Ok(ln_gamma(T::one() + sigma));
    }
    let a = (k * k).recip();
    let b = sigma / k;
    if !(a + b > T::zero()) {
        return Err(Error::OffsetUndefined { sigma: sigma.to_f64_lossy(), k: k.to_f64_lossy() });
    }
    let lim = T::lit(STIRLING_MIN);
    let c = if a >= lim && a + b >= lim {
        // -b ln a + ln Γ(a+b) - ln Γ(a), with the O(σ/k) terms cancelled
        // analytically: b/a = σk.
        (a + b - T::lit(0.5)) * (sigma * k).ln_1p() - b + stirling_remainder(a + b)
            - stirling_remainder(a)
    } else {
        sigma * (k * k).ln() / k + ln_gamma_ratio(a, b)
    };
    if c.is_finite() {
        Ok(c)
    } else {
        Err(Error::OffsetUndefined { sigma: sigma.to_f64_lossy(), k: k.to_f64_lossy() })
    }
}

fn shape_offset<T: Scalar>(shape: Shape<T>, sigma: T) -> Result<T> {
    match shape {
        Shape::Power(k) => gg_offset(sigma, k),
        Shape::LogNormalLimit => Ok(sigma * sigma * T::lit(0.5)),
    }
}

fn log_moment<T: Scalar>(p: &GgParams<T>, s: u32) -> Result<T> {
    if s == 0 {
        return Err(Error::Domain("moment order must be positive".into()));
    }
    let st = T::from_u32(s).expect("small integer");
    shape_offset(p.shape, st * p.sigma)
        .map(|c| st * p.mu + c)
        .map_err(|_| Error::MomentUndefined {
            order: s,
            sigma: p.sigma.to_f64_lossy(),
            k: p.k().map_or(0.0, Scalar::to_f64_lossy),
        })
}

/// `E[Y^s] = exp{ sμ + C(sσ, k) }`.
pub fn moment<T: Scalar>(p: &GgParams<T>, s: u32) -> Result<T> {
    log_moment(p, s).map(T::exp)
}

/// `E[Y] = exp(μ + C(σ, k))`.
pub fn mean<T: Scalar>(p: &GgParams<T>) -> Result<T> {
    moment(p, 1)
}

pub fn variance<T: Scalar>(p: &GgParams<T>) -> Result<T> {
    let l1 = log_moment(p, 1)?;
    let l2 = log_moment(p, 2)?;
    let two = T::lit(2.0);
    Ok((two * l1).exp() * (l2 - two * l1).exp_m1())
}

/// Draws one variate. For a power shape, `G ~ Gamma(1/k², 1)` and
/// `Y = exp(μ + σ ln(k² G)/k)`; on the lognormal path `Y = exp(μ + σ Z)`.
///
/// The draw is made in `f64` and rounded to `T`.
pub fn sample<T: Scalar, R: Rng + ?Sized>(p: &GgParams<T>, rng: &mut R) -> T {
    let mu = p.mu.to_f64_lossy();
    let sigma = p.sigma.to_f64_lossy();
    let w = match p.shape {
        Shape::Power(k) => {
            let k = k.to_f64_lossy();
            let eta = 1.0 / (k * k);
            let g: f64 = Gamma::new(eta, 1.0).expect("valid gamma shape").sample(rng);
            if eta >= 1.0 {
                // G concentrates near η: ln(k² G) = ln1p(k² (G - η))
                (k * k * (g - eta)).ln_1p() / k
            } else {
                // G can be tiny; k² G - 1 would round to -1
                ((k * k).ln() + g.ln()) / k
            }
        }
        Shape::LogNormalLimit => StandardNormal.sample(rng),
    };
    T::lit((mu + sigma * w).exp())
}
