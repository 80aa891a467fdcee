//! Log-space special functions: log-gamma, log-gamma differences and the
//! Stirling remainder used by the large-shape evaluation paths.

use crate::scalar::Scalar;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Argument above which the Stirling series is used directly.
pub(crate) const STIRLING_MIN: f64 = 10.0;

/// Remainder of Stirling's series, `ln Γ(x) - [(x - 1/2) ln x - x + ln(2π)/2]`.
///
/// Accurate to full double precision for `x >= 10`.
pub fn stirling_remainder<T: Scalar>(x: T) -> T {
    let inv = x.recip();
    let inv2 = inv * inv;
    // Bernoulli-number coefficients B_{2n} / (2n (2n - 1)), Horner in 1/x^2.
    let c = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
    ];
    let mut acc = T::lit(c[c.len() - 1]);
    for &ci in c.iter().rev().skip(1) {
        acc = acc * inv2 + T::lit(ci);
    }
    acc * inv
}

/// Natural log of the absolute value of the gamma function.
///
/// Returns `+inf` at the poles (zero and the negative integers) and NaN for NaN.
pub fn ln_gamma<T: Scalar>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    if x.is_infinite() {
        return T::infinity();
    }
    let half = T::lit(0.5);
    if x <= T::zero() && x == x.floor() {
        return T::infinity();
    }
    if x < half {
        // Reflection: Γ(x) Γ(1 - x) = π / sin(πx).
        let s = (T::PI() * x).sin().abs();
        if s == T::zero() {
            return T::infinity();
        }
        return (T::PI() / s).ln() - ln_gamma(T::one() - x);
    }
    if x >= T::lit(STIRLING_MIN) {
        let half_ln_2pi = T::lit(0.918_938_533_204_672_8);
        return (x - half) * x.ln() - x + half_ln_2pi + stirling_remainder(x);
    }
    let xm = x - T::one();
    let mut a = T::lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a = a + T::lit(c) / (xm + T::from_usize_lossy(i));
    }
    let t = xm + T::lit(LANCZOS_G) + half;
    T::lit(0.918_938_533_204_672_8) + (xm + half) * t.ln() - t + a.ln()
}

/// `ln Γ(a + b) - ln Γ(a)` without forming either term when both arguments
/// are large. Requires `a > 0` and `a + b > 0`; otherwise returns NaN.
pub fn ln_gamma_ratio<T: Scalar>(a: T, b: T) -> T {
    let apb = a + b;
    if !(a > T::zero()) || !(apb > T::zero()) {
        return T::nan();
    }
    let lim = T::lit(STIRLING_MIN);
    if a >= lim && apb >= lim {
        let half = T::lit(0.5);
        (a - half) * (b / a).ln_1p() + b * apb.ln() - b + stirling_remainder(apb)
            - stirling_remainder(a)
    } else {
        ln_gamma(apb) - ln_gamma(a)
    }
}

/// `e^t - 1 - t`, accurate near zero where the naive form cancels.
pub fn exp_m1_minus_x<T: Scalar>(t: T) -> T {
    if t.abs() < T::lit(0.5) {
        // Σ_{n>=2} t^n / n!
        let mut term = t * t * T::lit(0.5);
        let mut sum = term;
        for n in 3..=24 {
            term = term * t / T::from_usize_lossy(n);
            sum = sum + term;
            if term.abs() <= sum.abs() * T::epsilon() {
                break;
            }
        }
        sum
    } else {
        t.exp_m1() - t
    }
}
